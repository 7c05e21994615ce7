"""Command-line interface.

Subcommands: ``fit`` (fit one surface, write a model file and a report),
``sweep`` (scan regularization strengths over an x grid), ``eval``
(evaluate a model file on points or a grid), ``export`` (re-emit a model
as JSON or a coefficient CSV), ``synth`` (generate a synthetic dataset),
and ``split`` (inspect the train/cv/test partition).

Exit codes: 0 success, 2 usage or input error (bad flags, missing
files), 3 data or model error (unparseable data, degenerate axes, model
version mismatch), 4 numeric failure.  Environment variables are never
consulted; identical flags and input bytes give identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

import numpy as np

from . import __version__
from .dataset import SplitConfig, load_dataset, normalize, save_dataset, split
from .errors import (DegenerateAxisError, DegenerateFitError,
                     InsufficientDataError, ModelFormatError, OrthofitError,
                     ParseError)
from .fit import FitConfig, fit_surface
from .model import (dZ_dY, entropy_change, eval_physical, load_model,
                    save_model, to_monomial)
from .basis import columns_for_degree, degree_block
from .ortho import PrecisionMode, orthogonality_defect
from .select import (group_error, lambda_sweep, overfit_degree, sweep_to_csv,
                     sweep_to_json)
from .synth import SynthSpec, generate

USAGE_ERROR, DATA_ERROR, NUMERIC_ERROR = 2, 3, 4


def _add_fit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda", dest="lambda_", type=float, default=0.0,
                   help="regularization strength (default 0)")
    p.add_argument("--sample-by", choices=("x", "y"), default="y",
                   help="coordinate used to sort before splitting")
    p.add_argument("--sample-factor", type=int, default=3,
                   help="f >= 2; training gets (f-1)/f of the data")
    p.add_argument("--max-degree", type=int, default=19,
                   help="largest total degree the fit may use")
    p.add_argument("--target-error", type=float, default=1e-28,
                   help="stop once the training error reaches this; the "
                        "default only triggers for exactly representable data")
    p.add_argument("--precision", choices=("double", "extended"),
                   default="double")
    p.add_argument("--odd-field-only", action="store_true",
                   help="keep only odd powers of x in the basis")
    p.add_argument("--fixed-S", dest="fixed_s", type=int, default=None,
                   help="use exactly S+1 polynomials, no early stopping")
    p.add_argument("--stop-rel-improvement", type=float, default=0.05)
    p.add_argument("--stop-patience", type=int, default=2)


def _fit_config(args) -> FitConfig:
    return FitConfig(
        lambda_=args.lambda_,
        max_columns=columns_for_degree(args.max_degree),
        target_error=args.target_error,
        stop_rel_improvement=args.stop_rel_improvement,
        stop_patience_blocks=args.stop_patience,
        precision=PrecisionMode(args.precision),
        odd_field_only=args.odd_field_only,
        fixed_columns=None if args.fixed_s is None else args.fixed_s + 1,
    )


def _parse_x_grid(text: str) -> list[float]:
    text = text.strip()
    if not text:
        raise ValueError("empty x grid")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("x grid range must be lo:hi:step")
        lo, hi, step = (float(p) for p in parts)
        if step <= 0 or hi < lo:
            raise ValueError("x grid range must satisfy lo <= hi, step > 0")
        out = []
        v = lo
        while v <= hi + 1e-9:
            out.append(round(v, 12))
            v += step
        return out
    return [float(p) for p in text.split(",") if p.strip()]


def _emit_report(report: dict, fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(report, indent=1) + "\n")
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(report.keys())
        writer.writerow([format(v, ".17g") if isinstance(v, float) else v
                         for v in report.values()])
        out.write(buf.getvalue())
    else:
        width = max(len(k) for k in report)
        for k, v in report.items():
            sval = format(v, ".17g") if isinstance(v, float) else str(v)
            out.write(f"{k:<{width}}  {sval}\n")


def _load_normalized(path):
    points = load_dataset(path)
    return normalize(points)


def cmd_fit(args) -> int:
    t0 = time.perf_counter()
    data = _load_normalized(args.input)
    cfg = _fit_config(args)
    parts = split(data, SplitConfig(args.sample_by, args.sample_factor))
    fit = fit_surface(parts, data, cfg)
    model = to_monomial(fit, include_audit=args.audit)
    s_cv = group_error(model, data, parts.cv_idx)
    s_te = group_error(model, data, parts.test_idx)
    defect = (orthogonality_defect(fit.basis)
              if fit.basis.n_columns >= 2 else 0.0)
    model_out = args.model_out
    if model_out is None:
        stem = args.input[:-4] if args.input.lower().endswith(".csv") else args.input
        model_out = stem + ".model.json"
    save_model(model, model_out)
    report = {
        "n_points": data.n,
        "n_train": len(parts.train_idx),
        "n_cv": len(parts.cv_idx),
        "n_test": len(parts.test_idx),
        "S": fit.S,
        "lambda": fit.lambda_,
        "sigma_tr": fit.sigma_tr,
        "sigma_cv": s_cv,
        "sigma_test": s_te,
        "gamma": overfit_degree(fit.sigma_tr, s_cv),
        "gamma_prime": overfit_degree(fit.sigma_tr, s_te),
        "defect": defect,
        "wall_time_s": time.perf_counter() - t0,
    }
    _emit_report(report, args.report)
    return 0


def cmd_sweep(args) -> int:
    try:
        grid = _parse_x_grid(args.x_grid)
        if not grid:
            raise ValueError("empty x grid")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    data = _load_normalized(args.input)
    cfg = _fit_config(args)
    parts = split(data, SplitConfig(args.sample_by, args.sample_factor))
    report = lambda_sweep(data, parts, grid, cfg, gamma_cap=args.gamma_cap)
    if args.csv_out:
        with open(args.csv_out, "w", encoding="utf-8") as fh:
            fh.write(sweep_to_csv(report))
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            fh.write(sweep_to_json(report))
    if args.report == "json":
        sys.stdout.write(sweep_to_json(report))
    else:
        sys.stdout.write(sweep_to_csv(report))
        if report.chosen is not None:
            rec = report.records[report.chosen]
            sys.stdout.write(f"# chosen: x={rec.x_log:g} S={rec.S} "
                             f"gamma={rec.gamma:.2f} gamma_prime={rec.gamma_prime:.2f}\n")
    return 0


def _read_points_2d(path):
    with open(path, "r", encoding="utf-8-sig", newline="") as fh:
        first = fh.readline()
        delim = "\t" if "\t" in first else ","
        header = [h.strip().lower() for h in next(csv.reader([first], delimiter=delim))]
        pairs = None
        for cand in (("x", "y"), ("h", "t")):
            if cand[0] in header and cand[1] in header:
                pairs = (header.index(cand[0]), header.index(cand[1]))
                break
        if pairs is None:
            raise ParseError(f"point file header {header!r} lacks x,y or H,T", line=1)
        out = []
        for lineno, row in enumerate(csv.reader(fh, delimiter=delim), start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                out.append((float(row[pairs[0]]), float(row[pairs[1]])))
            except (ValueError, IndexError):
                raise ParseError("bad point row", line=lineno) from None
        return out


def cmd_eval(args) -> int:
    model = load_model(args.model)
    nmap = model.map
    if args.grid:
        try:
            nx, ny = (int(p) for p in args.grid.lower().split("x"))
            if nx < 1 or ny < 1:
                raise ValueError
        except ValueError:
            print(f"error: bad grid spec {args.grid!r}", file=sys.stderr)
            return USAGE_ERROR
        Xs = np.linspace(nmap.x_min, nmap.x_max, nx)
        Ys = np.linspace(nmap.y_min, nmap.y_max, ny)
        pts = [(float(X), float(Y)) for Y in Ys for X in Xs]
    elif args.points:
        pts = _read_points_2d(args.points)
    else:
        print("error: need --points or --grid", file=sys.stderr)
        return USAGE_ERROR
    writer = csv.writer(sys.stdout, lineterminator="\n")
    header = ["X", "Y", "Z"]
    if args.with_slope:
        header.append("dZdY")
    if args.with_entropy:
        header.append("dS")
    writer.writerow(header)
    for X, Y in pts:
        Z, _ = eval_physical(model, X, Y)
        row = [format(X, ".17g"), format(Y, ".17g"), format(Z, ".17g")]
        if args.with_slope:
            row.append(format(dZ_dY(model, X, Y), ".17g"))
        if args.with_entropy:
            row.append(format(entropy_change(model, Y, X, args.entropy_steps), ".17g"))
        writer.writerow(row)
    return 0


def cmd_export(args) -> int:
    model = load_model(args.model)
    if args.format == "json":
        if not args.audit and model.audit is not None:
            model = type(model)(c=model.c, kept=model.kept, map=model.map,
                                S=model.S, lambda_=model.lambda_,
                                sigma_tr=model.sigma_tr, audit=None)
        save_model(model, args.out)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t", "degree", "y_power", "c"])
            for t, c in zip(model.kept, model.c):
                _, m, j = degree_block(int(t))
                writer.writerow([t, m, j, format(float(c), ".17g")])
    return 0


def cmd_synth(args) -> int:
    spec = SynthSpec(surface=args.surface, nx=args.nx, ny=args.ny,
                     noise_sigma=args.noise, seed=args.seed)
    points, _ = generate(spec)
    save_dataset(points, args.out)
    print(f"wrote {len(points)} points to {args.out}")
    return 0


def cmd_split(args) -> int:
    data = _load_normalized(args.input)
    parts = split(data, SplitConfig(args.sample_by, args.sample_factor))
    report = {
        "n_points": data.n,
        "sample_by": args.sample_by,
        "sample_factor": args.sample_factor,
        "n_train": len(parts.train_idx),
        "n_cv": len(parts.cv_idx),
        "n_test": len(parts.test_idx),
    }
    if args.indices:
        report["train_idx"] = parts.train_idx.tolist()
        report["cv_idx"] = parts.cv_idx.tolist()
        report["test_idx"] = parts.test_idx.tolist()
        _emit_report(report, "json")
    else:
        _emit_report(report, args.report)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orthofit",
        description="Fit scattered (x, y, z) data with orthogonal polynomials "
                    "under curvature regularization.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit one surface and write a model file")
    p.add_argument("input", help="CSV/TSV dataset with header x,y,z or H,T,M")
    p.add_argument("-o", "--model-out", default=None,
                   help="model file path (default: <input>.model.json)")
    p.add_argument("--report", choices=("text", "csv", "json"), default="text")
    p.add_argument("--audit", action="store_true",
                   help="embed the orthogonal expansion in the model file")
    _add_fit_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sweep", help="scan regularization strengths")
    p.add_argument("input")
    p.add_argument("--x-grid", required=True,
                   help="exponents as lo:hi:step or comma list; lambda=exp(-x)")
    p.add_argument("--gamma-cap", type=float, default=1.0)
    p.add_argument("--csv-out", default=None)
    p.add_argument("--json-out", default=None)
    p.add_argument("--report", choices=("text", "csv", "json"), default="text")
    _add_fit_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eval", help="evaluate a model file")
    p.add_argument("--model", required=True)
    p.add_argument("--points", default=None, help="CSV of X,Y points")
    p.add_argument("--grid", default=None, help="NXxNY over the data rectangle")
    p.add_argument("--with-slope", action="store_true", help="add a dZ/dY column")
    p.add_argument("--with-entropy", action="store_true",
                   help="add the field integral of dZ/dY")
    p.add_argument("--entropy-steps", type=int, default=200)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export", help="re-emit a model as JSON or CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--audit", action="store_true")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--surface", default="magnet",
                   help="plane, poly:K, or magnet")
    p.add_argument("--nx", type=int, default=30)
    p.add_argument("--ny", type=int, default=20)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("split", help="inspect the train/cv/test partition")
    p.add_argument("input")
    p.add_argument("--sample-by", choices=("x", "y"), default="y")
    p.add_argument("--sample-factor", type=int, default=3)
    p.add_argument("--report", choices=("text", "csv", "json"), default="text")
    p.add_argument("--indices", action="store_true",
                   help="include the index lists (JSON report)")
    p.set_defaults(func=cmd_split)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename}", file=sys.stderr)
        return USAGE_ERROR
    except (ParseError, DegenerateAxisError, InsufficientDataError,
            ModelFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except (DegenerateFitError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NUMERIC_ERROR
    except OrthofitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NUMERIC_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
