"""Orthonormalization of basis columns against the sample inner product.

Columns are orthonormalized one at a time against ``<u, v> = sum_i u_i
v_i`` over the training points.  Three schemes are provided:

* ``igs``  -- iterated projection: the subtraction pass repeats until the
  newly measured projections are negligible relative to the running
  residual (or a pass cap is hit), then the column is normalized.  This
  is the production scheme; one extra pass is usually enough to restore
  orthogonality that single-pass schemes progressively lose.
* ``cgs``  -- one classical pass (all projections measured against the
  incoming column).
* ``mgs``  -- one modified pass (projections measured sequentially
  against the running residual).

Whatever sequence of axpy/scale operations a column undergoes is applied
identically to its Laplacian column, so column t of the Laplacian block
is the Laplacian of orthonormal polynomial t -- the fit module only ever
sums it.  The expansion bookkeeping stores, for each orthonormal column
s, coefficients ``a[s, s]`` (of the raw basis column) and ``a[s, t]``
(of previous orthonormal columns t < s) such that

    P_s = a[s, s] * h_s + sum_{t < s} a[s, t] * P_t .

Everything runs at either plain double precision (BLAS reductions) or
software double-double ("extended") precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .ddarith import (DD, comp_dot, dd_add, dd_dot, dd_matvec, dd_matvec_t,
                      dd_mul, dd_sub, dd_sum)

REORTH_TOL = 1e-14   # pass accepted when max |delta| <= tol * column norm
MAX_PASSES = 3
RANK_TOL = 1e-20     # post-projection norm below this rejects the column


class PrecisionMode(str, Enum):
    DOUBLE = "double"
    EXTENDED = "extended"


def inner(u, v, precision: PrecisionMode = PrecisionMode.DOUBLE) -> float:
    """Sample inner product sum(u * v), accumulated at the given precision.

    Double mode uses a compensated (error-free product + pairwise dd)
    reduction; extended mode is the same with dd inputs.  Either way the
    reduction tree is fixed, so results are reproducible.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    return comp_dot(u, v)


@dataclass(frozen=True)
class OrthoBasis:
    """Finished orthonormal system over the training points.

    P, lap : (n_train, K) float64 views of the orthonormal polynomial
        values and their Laplacians (hi parts in extended mode).
    a : (K, K) lower-triangular expansion coefficients (see module doc).
    kept : original flat basis index of each orthonormal column.
    """

    P: np.ndarray
    lap: np.ndarray
    a: np.ndarray
    kept: tuple
    precision: PrecisionMode
    P_lo: Optional[np.ndarray] = None
    lap_lo: Optional[np.ndarray] = None
    a_lo: Optional[np.ndarray] = None

    @property
    def n_columns(self) -> int:
        return self.P.shape[1]

    @property
    def n_train(self) -> int:
        return self.P.shape[0]


def orthogonality_defect(basis: OrthoBasis) -> float:
    """Largest off-diagonal |<P_t, P_s>| of the basis, measured in double."""
    if basis.n_columns < 2:
        raise ValueError("need at least 2 columns to measure a defect")
    g = basis.P.T @ basis.P
    np.fill_diagonal(g, 0.0)
    return float(np.abs(g).max())


class _DoubleCore:
    """Plain float64 storage; BLAS matvecs for projections."""

    def __init__(self, n: int, cap: int):
        self.P = np.empty((n, cap))
        self.lap = np.empty((n, cap))
        self.k = 0

    def grow(self, cap):
        for name in ("P", "lap"):
            buf = getattr(self, name)
            new = np.empty((buf.shape[0], cap))
            new[:, :self.k] = buf[:, :self.k]
            setattr(self, name, new)

    def make_vec(self, arr):
        return np.array(arr, dtype=float, copy=True)

    def measure(self, v):
        return self.P[:, :self.k].T @ v

    def measure_seq(self, v, w):
        delta = np.empty(self.k)
        for t in range(self.k):
            d = float(self.P[:, t] @ v)
            v -= d * self.P[:, t]
            w -= d * self.lap[:, t]
            delta[t] = d
        return delta, v, w

    def deflate(self, v, w, delta):
        v -= self.P[:, :self.k] @ delta
        w -= self.lap[:, :self.k] @ delta
        return v, w

    def norm2(self, v):
        return float(v @ v)

    def delta_max(self, delta):
        return float(np.abs(delta).max()) if delta.size else 0.0

    def append(self, v, w, inv):
        self.P[:, self.k] = v * float(inv)
        self.lap[:, self.k] = w * float(inv)
        self.k += 1

    def column_dot(self, t, vec):
        return comp_dot(self.P[:, t], vec)

    def subtract_scaled_column(self, vec, t, coeff):
        return vec - float(coeff) * self.P[:, t]

    def lap_column_sum(self, t):
        h, l = dd_sum(self.lap[:, t], 0.0)
        return h + l

    def vec_norm2(self, vec):
        return comp_dot(vec, vec)


class _ExtendedCore:
    """(hi, lo) pair storage; all reductions in double-double."""

    def __init__(self, n: int, cap: int):
        self.Ph = np.empty((n, cap)); self.Pl = np.empty((n, cap))
        self.Lh = np.empty((n, cap)); self.Ll = np.empty((n, cap))
        self.k = 0

    def grow(self, cap):
        for name in ("Ph", "Pl", "Lh", "Ll"):
            buf = getattr(self, name)
            new = np.empty((buf.shape[0], cap))
            new[:, :self.k] = buf[:, :self.k]
            setattr(self, name, new)

    def make_vec(self, arr):
        if isinstance(arr, tuple):
            return (np.array(arr[0], dtype=float, copy=True),
                    np.array(arr[1], dtype=float, copy=True))
        return (np.array(arr, dtype=float, copy=True), np.zeros(len(arr)))

    def measure(self, v):
        k = self.k
        return dd_matvec_t(self.Ph[:, :k], self.Pl[:, :k], v[0], v[1])

    def measure_seq(self, v, w):
        dh = np.empty(self.k); dl = np.empty(self.k)
        for t in range(self.k):
            h, l = dd_dot(self.Ph[:, t], self.Pl[:, t], v[0], v[1])
            v = dd_sub(v[0], v[1], *dd_mul(self.Ph[:, t], self.Pl[:, t], h, l))
            w = dd_sub(w[0], w[1], *dd_mul(self.Lh[:, t], self.Ll[:, t], h, l))
            dh[t], dl[t] = h, l
        return (dh, dl), v, w

    def deflate(self, v, w, delta):
        k = self.k
        ph = dd_matvec(self.Ph[:, :k], self.Pl[:, :k], delta[0], delta[1])
        v = dd_sub(v[0], v[1], *ph)
        lh = dd_matvec(self.Lh[:, :k], self.Ll[:, :k], delta[0], delta[1])
        w = dd_sub(w[0], w[1], *lh)
        return v, w

    def norm2(self, v):
        return DD(*dd_dot(v[0], v[1], v[0], v[1]))

    def delta_max(self, delta):
        return float(np.abs(delta[0]).max()) if delta[0].size else 0.0

    def append(self, v, w, inv):
        k = self.k
        self.Ph[:, k], self.Pl[:, k] = dd_mul(v[0], v[1], inv.hi, inv.lo)
        self.Lh[:, k], self.Ll[:, k] = dd_mul(w[0], w[1], inv.hi, inv.lo)
        self.k += 1

    def column_dot(self, t, vec):
        return DD(*dd_dot(self.Ph[:, t], self.Pl[:, t], vec[0], vec[1]))

    def subtract_scaled_column(self, vec, t, coeff):
        ch, cl = DD._coerce(coeff)
        sh, sl = dd_mul(self.Ph[:, t], self.Pl[:, t], ch, cl)
        return dd_sub(vec[0], vec[1], sh, sl)

    def lap_column_sum(self, t):
        return DD(*dd_sum(self.Lh[:, t], self.Ll[:, t]))

    def vec_norm2(self, vec):
        h, l = dd_dot(vec[0], vec[1], vec[0], vec[1])
        return h + l


class OrthoBuilder:
    """Incremental orthonormalization state.

    Parameters
    ----------
    n_train : number of training points (column length).
    scheme : 'igs', 'cgs', or 'mgs'.
    precision : PrecisionMode for storage and reductions.
    reorth_tol, max_passes, rank_tol : see module constants.
    """

    def __init__(self, n_train: int, scheme: str = "igs",
                 precision: PrecisionMode = PrecisionMode.DOUBLE,
                 capacity: int = 64, reorth_tol: float = REORTH_TOL,
                 max_passes: int = MAX_PASSES, rank_tol: float = RANK_TOL):
        if scheme not in ("igs", "cgs", "mgs"):
            raise ValueError(f"unknown scheme {scheme!r}")
        self.scheme = scheme
        self.precision = PrecisionMode(precision)
        self.reorth_tol = reorth_tol
        self.max_passes = max_passes if scheme == "igs" else 1
        self.rank_tol = rank_tol
        self._cap = max(capacity, 8)
        self._n = n_train
        core = _ExtendedCore if self.precision is PrecisionMode.EXTENDED else _DoubleCore
        self._core = core(n_train, self._cap)
        self._a_rows: list = []       # per column: (dtot array(s), inv scalar)
        self.kept: list[int] = []
        self.passes: list[int] = []   # projection passes spent per column

    @property
    def n_columns(self) -> int:
        return self._core.k

    def add_column(self, col, lap_col, tag: int) -> bool:
        """Orthonormalize one raw column (with its Laplacian column).

        Returns False and leaves the state untouched when the residual
        norm falls below the rank tolerance (numerically dependent
        column); otherwise appends the new orthonormal column.
        """
        core = self._core
        if core.k == self._cap:
            self._cap *= 2
            core.grow(self._cap)
        v = core.make_vec(col)
        w = core.make_vec(lap_col)
        k = core.k
        extended = isinstance(v, tuple)
        if (v[0] if extended else v).shape[0] != self._n:
            raise ValueError("column length does not match the training size")
        dtot = (np.zeros(k), np.zeros(k)) if extended else np.zeros(k)
        n2 = core.norm2(v)
        col_norm = float(n2) ** 0.5
        npasses = 0
        if k:
            if self.scheme == "mgs":
                dtot, v, w = core.measure_seq(v, w)
                npasses = 1
            else:
                for _ in range(self.max_passes):
                    delta = core.measure(v)
                    v, w = core.deflate(v, w, delta)
                    npasses += 1
                    if extended:
                        dtot = dd_add(dtot[0], dtot[1], delta[0], delta[1])
                    else:
                        dtot = dtot + delta
                    # pass accepted once the newly measured projections are
                    # negligible against the incoming column's scale
                    if core.delta_max(delta) <= self.reorth_tol * col_norm:
                        break
            n2 = core.norm2(v)
        p = (DD(n2.hi, n2.lo) if isinstance(n2, DD) else DD(n2)).sqrt()
        if float(p) < self.rank_tol:
            return False
        inv = 1.0 / p
        core.append(v, w, inv)
        self._a_rows.append((dtot, inv))
        self.kept.append(tag)
        self.passes.append(npasses)
        return True

    # -- helpers used by the fitting loop ---------------------------------

    def make_vector(self, arr):
        return self._core.make_vec(arr)

    def column_dot(self, t: int, vec):
        return self._core.column_dot(t, vec)

    def subtract_scaled_column(self, vec, t: int, coeff):
        return self._core.subtract_scaled_column(vec, t, coeff)

    def lap_column_sum(self, t: int):
        return self._core.lap_column_sum(t)

    def vec_norm2(self, vec) -> float:
        return self._core.vec_norm2(vec)

    # ----------------------------------------------------------------------

    def _assemble_a(self):
        """Expand stored (projection, scale) pairs into triangular a.

        Double mode reports the coefficients exactly as applied to the
        stored columns; extended mode keeps the dd remainders so later
        conversions lose nothing.
        """
        K = self._core.k
        extended = self.precision is PrecisionMode.EXTENDED
        ah = np.zeros((K, K))
        al = np.zeros((K, K)) if extended else None
        for s, (dtot, inv) in enumerate(self._a_rows):
            if extended:
                dh, dl = dtot
                for t in range(s):
                    c = -DD(dh[t], dl[t]) * inv
                    ah[s, t], al[s, t] = c.hi, c.lo
                ah[s, s], al[s, s] = inv.hi, inv.lo
            else:
                ah[s, :s] = -dtot * float(inv)
                ah[s, s] = float(inv)
        return ah, al

    def to_basis(self) -> OrthoBasis:
        """Freeze the current state into an immutable OrthoBasis."""
        K = self._core.k
        ah, al = self._assemble_a()
        c = self._core
        if self.precision is PrecisionMode.EXTENDED:
            return OrthoBasis(
                P=c.Ph[:, :K].copy(), lap=c.Lh[:, :K].copy(), a=ah,
                kept=tuple(self.kept), precision=self.precision,
                P_lo=c.Pl[:, :K].copy(), lap_lo=c.Ll[:, :K].copy(), a_lo=al)
        return OrthoBasis(P=c.P[:, :K].copy(), lap=c.lap[:, :K].copy(), a=ah,
                          kept=tuple(self.kept), precision=self.precision)
