"""Bivariate orthogonal-polynomial surface fitting with curvature
regularization and cross-validated strength selection."""

from .basis import (BasisIndex, BasisTable, basis_d2x, basis_d2y, basis_dy,
                    basis_values, build_basis_table, degree_block,
                    odd_field_mask)
from .dataset import (DataPoint, DataSplit, NormalizationMap,
                      NormalizedDataset, SplitConfig, denormalize,
                      load_dataset, normalize, save_dataset, split)
from .errors import (DegenerateAxisError, DegenerateFitError,
                     InsufficientDataError, ModelFormatError, OrthofitError,
                     ParseError)
from .fit import (FitConfig, FitResult, FitStep, RegState, fit_surface,
                  regularized_coefficient, training_error)
from .model import (SurfaceModel, dZ_dY, entropy_change, eval_monomial,
                    eval_ortho, eval_physical, load_model, save_model,
                    to_monomial)
from .ortho import (OrthoBasis, OrthoBuilder, PrecisionMode, inner,
                    orthogonality_defect)
from .select import (SweepReport, ValidationRecord, group_error,
                     lambda_sweep, overfit_degree, select_model,
                     sweep_to_csv, sweep_to_json)
from .synth import SplitMix64, SynthSpec, generate

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
