"""Graded bivariate monomial basis and its derivative columns.

The basis is the total-degree-ordered monomial sequence

    1, x, y, x^2, xy, y^2, x^3, x^2 y, x y^2, y^3, ...

flat index ``t = m(m+1)/2 + j`` where ``m`` is the total degree and ``j``
the power of y, so entry t is ``x**(m-j) * y**j``.  Values and second
partial derivatives are generated by recursions that reuse the previous
degree block (one multiply per entry), which is both cheap and exactly
reproducible; the dd variants run the same recursions in double-double.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt
from typing import NamedTuple

import numpy as np

from .ddarith import dd_div_d, dd_mul_d


class BasisIndex(NamedTuple):
    """Flat index t with its (degree, y-power) decomposition."""

    t: int
    m: int
    j: int


def degree_block(t: int) -> BasisIndex:
    """Invert the flat index: return (t, m, j) with t = m(m+1)/2 + j.

    Exact integer arithmetic; valid for arbitrarily large t.
    """
    if t < 0:
        raise ValueError("flat index must be non-negative")
    m = (isqrt(8 * t + 1) - 1) // 2
    j = t - m * (m + 1) // 2
    if j > m:  # isqrt guard; cannot trigger for exact m, kept for safety
        m += 1
        j = t - m * (m + 1) // 2
    return BasisIndex(t, m, j)


def block_start(m: int) -> int:
    """Flat index of the first entry (j = 0) of degree block m."""
    return m * (m + 1) // 2


def columns_for_degree(m: int) -> int:
    """Number of basis columns with total degree <= m."""
    return (m + 1) * (m + 2) // 2


def odd_field_mask(L: int) -> np.ndarray:
    """Boolean vector marking columns whose x-power (m - j) is odd.

    Used to restrict the basis to odd powers of the field coordinate;
    True entries are kept when the restriction is active.
    """
    mask = np.zeros(L + 1, dtype=bool)
    for t in range(L + 1):
        _, m, j = degree_block(t)
        mask[t] = (m - j) % 2 == 1
    return mask


def _as_rows(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scalar = x.ndim == 0 and y.ndim == 0
    x, y = np.atleast_1d(x), np.atleast_1d(y)
    if x.shape != y.shape:
        raise ValueError("x and y must have matching shapes")
    return x, y, scalar


def basis_values(x, y, L: int) -> np.ndarray:
    """Evaluate basis entries 0..L at (x, y).

    Parameters
    ----------
    x, y : float or 1-d arrays of equal length
    L : largest flat index

    Returns
    -------
    ndarray of shape (L+1,) for scalar input, else (n, L+1).
    """
    x, y, scalar = _as_rows(x, y)
    out = np.empty((x.size, L + 1))
    out[:, 0] = 1.0
    if L >= 1:
        out[:, 1] = x
    if L >= 2:
        out[:, 2] = y
    m = 2
    while block_start(m) <= L:
        start = block_start(m)
        prev = start - m
        out[:, start] = x * out[:, prev]
        for j in range(1, min(m, L - start) + 1):
            out[:, start + j] = y * out[:, prev + j - 1]
        m += 1
    return out[0] if scalar else out


def basis_d2x(x, y, L: int) -> np.ndarray:
    """Second x-derivative of every basis entry, same shapes as basis_values."""
    x, y, scalar = _as_rows(x, y)
    out = np.zeros((x.size, L + 1))
    if L >= 3:
        out[:, 3] = 2.0
    m = 3
    while block_start(m) <= L:
        start = block_start(m)
        prev = start - m
        out[:, start] = (m / (m - 2)) * x * out[:, prev]
        for j in range(1, min(m - 2, L - start) + 1):
            out[:, start + j] = y * out[:, prev + j - 1]
        # entries j = m-1 and j = m have x-power < 2: identically zero
        m += 1
    return out[0] if scalar else out


def basis_d2y(x, y, L: int) -> np.ndarray:
    """Second y-derivative of every basis entry, same shapes as basis_values."""
    x, y, scalar = _as_rows(x, y)
    out = np.zeros((x.size, L + 1))
    if L >= 5:
        out[:, 5] = 2.0
    m = 3
    while block_start(m) <= L:
        start = block_start(m)
        prev = start - m
        for j in range(2, min(m - 1, L - start) + 1):
            out[:, start + j] = x * out[:, prev + j]
        if start + m <= L:
            out[:, start + m] = (m / (m - 2)) * y * out[:, start - 1]
        m += 1
    return out[0] if scalar else out


def basis_dy(x, y, L: int) -> np.ndarray:
    """First y-derivative of every basis entry.

    Computed by the power rule: entry (m, j) is j * x**(m-j) * y**(j-1),
    i.e. j times the value column of index (m-1, j-1).
    """
    x, y, scalar = _as_rows(x, y)
    vals = np.atleast_2d(basis_values(x, y, L))
    out = np.zeros((x.size, L + 1))
    for t in range(1, L + 1):
        _, m, j = degree_block(t)
        if j >= 1:
            out[:, t] = j * vals[:, block_start(m - 1) + j - 1]
    return out[0] if scalar else out


@dataclass(frozen=True)
class BasisTable:
    """Per-point basis values and their Laplacian pieces.

    values, d2x, d2y : (n, L+1) arrays; column t holds h_t and its second
    partials at every point.
    """

    values: np.ndarray
    d2x: np.ndarray
    d2y: np.ndarray
    L: int

    @property
    def lap(self) -> np.ndarray:
        return self.d2x + self.d2y


def build_basis_table(x, y, L: int) -> BasisTable:
    """Build the full value/derivative table for points (x, y)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    return BasisTable(
        values=np.atleast_2d(basis_values(x, y, L)),
        d2x=np.atleast_2d(basis_d2x(x, y, L)),
        d2y=np.atleast_2d(basis_d2y(x, y, L)),
        L=L,
    )


# ---------------------------------------------------------------------------
# Double-double variants: same recursions carried out in dd arithmetic.
# x and y stay exact doubles; only the accumulated products are widened.
# ---------------------------------------------------------------------------

def dd_basis_values(x, y, L: int):
    """dd basis values; returns (hi, lo) arrays of shape (n, L+1)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    hi = np.empty((x.size, L + 1))
    lo = np.zeros((x.size, L + 1))
    hi[:, 0] = 1.0
    if L >= 1:
        hi[:, 1] = x
    if L >= 2:
        hi[:, 2] = y
    m = 2
    while block_start(m) <= L:
        start = block_start(m)
        prev = start - m
        hi[:, start], lo[:, start] = dd_mul_d(hi[:, prev], lo[:, prev], x)
        for j in range(1, min(m, L - start) + 1):
            hi[:, start + j], lo[:, start + j] = dd_mul_d(
                hi[:, prev + j - 1], lo[:, prev + j - 1], y)
        m += 1
    return hi, lo


def dd_basis_d2x(x, y, L: int):
    """dd second x-derivatives; the m/(m-2) factor is applied exactly."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    hi = np.zeros((x.size, L + 1))
    lo = np.zeros((x.size, L + 1))
    if L >= 3:
        hi[:, 3] = 2.0
    m = 3
    while block_start(m) <= L:
        start = block_start(m)
        prev = start - m
        h, l = dd_mul_d(hi[:, prev], lo[:, prev], x)
        h, l = dd_mul_d(h, l, float(m))
        hi[:, start], lo[:, start] = dd_div_d(h, l, float(m - 2))
        for j in range(1, min(m - 2, L - start) + 1):
            hi[:, start + j], lo[:, start + j] = dd_mul_d(
                hi[:, prev + j - 1], lo[:, prev + j - 1], y)
        m += 1
    return hi, lo


def dd_basis_d2y(x, y, L: int):
    """dd second y-derivatives."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    hi = np.zeros((x.size, L + 1))
    lo = np.zeros((x.size, L + 1))
    if L >= 5:
        hi[:, 5] = 2.0
    m = 3
    while block_start(m) <= L:
        start = block_start(m)
        prev = start - m
        for j in range(2, min(m - 1, L - start) + 1):
            hi[:, start + j], lo[:, start + j] = dd_mul_d(
                hi[:, prev + j], lo[:, prev + j], x)
        if start + m <= L:
            h, l = dd_mul_d(hi[:, start - 1], lo[:, start - 1], y)
            h, l = dd_mul_d(h, l, float(m))
            hi[:, start + m], lo[:, start + m] = dd_div_d(h, l, float(m - 2))
        m += 1
    return hi, lo
