"""Error-free transformations and double-double ("dd") arithmetic.

A dd number is an unevaluated sum ``hi + lo`` of two IEEE doubles with
``|lo| <= 0.5 ulp(hi)``, giving roughly 32 significant decimal digits.
All routines here work elementwise on scalars or ndarrays, so a pair of
equally shaped float64 arrays behaves as an array of dd numbers.  Every
operation is a fixed sequence of IEEE double operations, hence results
are bit-reproducible.

Conventions: functions prefixed ``dd_`` take and return (hi, lo) pairs;
``two_sum``/``two_prod`` are the classic error-free building blocks;
``comp_dot``/``comp_sum`` are compensated double-precision reductions
(full dd accumulation internally, rounded to double on return).
"""

from __future__ import annotations

import math

import numpy as np

# 2**27 + 1; splits a double into two 26-bit halves whose product is exact.
_SPLITTER = 134217729.0


def two_sum(a, b):
    """Return (s, e) with s = fl(a + b) and s + e == a + b exactly."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def fast_two_sum(a, b):
    """two_sum under the precondition |a| >= |b|."""
    s = a + b
    e = b - (s - a)
    return s, e


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    """Return (p, e) with p = fl(a * b) and p + e == a * b exactly."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


# ---------------------------------------------------------------------------
# dd elementwise arithmetic
# ---------------------------------------------------------------------------

def dd_add(xh, xl, yh, yl):
    s, e = two_sum(xh, yh)
    t, f = two_sum(xl, yl)
    e = e + t
    s, e = fast_two_sum(s, e)
    e = e + f
    return fast_two_sum(s, e)


def dd_sub(xh, xl, yh, yl):
    return dd_add(xh, xl, -yh, -yl)


def dd_add_d(xh, xl, d):
    s, e = two_sum(xh, d)
    e = e + xl
    return fast_two_sum(s, e)


def dd_mul(xh, xl, yh, yl):
    p, e = two_prod(xh, yh)
    e = e + (xh * yl + xl * yh)
    return fast_two_sum(p, e)


def dd_mul_d(xh, xl, d):
    p, e = two_prod(xh, d)
    e = e + xl * d
    return fast_two_sum(p, e)


def dd_div(xh, xl, yh, yl):
    # Long division with two refinement steps: full dd accuracy.
    q1 = xh / yh
    rh, rl = dd_sub(xh, xl, *dd_mul_d(yh, yl, q1))
    q2 = rh / yh
    rh, rl = dd_sub(rh, rl, *dd_mul_d(yh, yl, q2))
    q3 = rh / yh
    h, l = fast_two_sum(q1, q2)
    return dd_add_d(h, l, q3)


def dd_div_d(xh, xl, d):
    q1 = xh / d
    p, e = two_prod(q1, d)
    r = ((xh - p) - e + xl) / d
    return fast_two_sum(q1, r)


def dd_sqrt(xh, xl):
    """Elementwise square root; inputs must be non-negative."""
    y = np.sqrt(xh)
    # One dd-corrected Newton step around the double estimate.  Guard the
    # zero case: 0/0 would poison the correction.
    safe = np.where(y == 0.0, 1.0, y)
    p, e = two_prod(y, y)
    rh, rl = dd_sub(xh, xl, p, e)
    ch, cl = dd_div_d(rh, rl, 2.0 * safe)
    h, l = dd_add_d(ch, cl, y)
    h = np.where(y == 0.0, 0.0, h)
    l = np.where(y == 0.0, 0.0, l)
    return h, l


# ---------------------------------------------------------------------------
# Reductions
# ---------------------------------------------------------------------------

def dd_sum(xh, xl, axis=0):
    """Pairwise-tree dd sum along ``axis``; reduction order is fixed."""
    xh = np.asarray(xh, dtype=float)
    xl = np.asarray(xl, dtype=float) if np.ndim(xl) else np.broadcast_to(
        np.asarray(xl, dtype=float), xh.shape)
    xh = np.moveaxis(xh, axis, 0)
    xl = np.moveaxis(xl, axis, 0)
    while xh.shape[0] > 1:
        n = xh.shape[0]
        half = n // 2
        ah, al = xh[:half], xl[:half]
        bh, bl = xh[half:half + half], xl[half:half + half]
        sh, sl = dd_add(ah, al, bh, bl)
        if n % 2:
            sh = np.concatenate([sh, xh[-1:]], axis=0)
            sl = np.concatenate([sl, xl[-1:]], axis=0)
        xh, xl = sh, sl
    return xh[0], xl[0]


def dd_dot(uh, ul, vh, vl, axis=0):
    """dd dot product: exact elementwise products, pairwise dd summation."""
    p, e = two_prod(uh, vh)
    e = e + (uh * vl + ul * vh)
    return dd_sum(p, e, axis=axis)


def comp_sum(x, axis=0):
    """Compensated sum of doubles, returned as a double."""
    h, l = dd_sum(np.asarray(x, dtype=float), 0.0, axis=axis)
    return h + l


def comp_dot(u, v, axis=0):
    """Compensated dot product of double vectors (dot2 scheme)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    p, e = two_prod(u, v)
    h, l = dd_sum(p, e, axis=axis)
    return h + l


def dd_matvec(mh, ml, vh, vl):
    """dd product M @ v for an (n, k) dd matrix and length-k dd vector."""
    p, e = two_prod(mh, vh)
    e = e + (mh * vl + ml * vh)
    return dd_sum(p, e, axis=1)


def dd_matvec_t(mh, ml, vh, vl):
    """dd product M.T @ v for an (n, k) dd matrix and length-n dd vector."""
    p, e = two_prod(mh, vh[:, None])
    e = e + (mh * vl[:, None] + ml * vh[:, None])
    return dd_sum(p, e, axis=0)


# ---------------------------------------------------------------------------
# Scalar convenience wrapper
# ---------------------------------------------------------------------------

class DD:
    """Scalar double-double with operator overloading.

    Mixed expressions with plain floats promote the float exactly
    (hi = value, lo = 0), so code like ``(proj - lam * r * q) / (lam * q * q
    + 1.0)`` runs unchanged at either precision.
    """

    __slots__ = ("hi", "lo")

    def __init__(self, hi, lo=0.0):
        self.hi = float(hi)
        self.lo = float(lo)

    @staticmethod
    def _coerce(x):
        if isinstance(x, DD):
            return x.hi, x.lo
        return float(x), 0.0

    def __float__(self):
        return self.hi + self.lo

    def __repr__(self):
        return f"DD({self.hi!r}, {self.lo!r})"

    def __add__(self, other):
        yh, yl = self._coerce(other)
        return DD(*dd_add(self.hi, self.lo, yh, yl))

    __radd__ = __add__

    def __sub__(self, other):
        yh, yl = self._coerce(other)
        return DD(*dd_sub(self.hi, self.lo, yh, yl))

    def __rsub__(self, other):
        yh, yl = self._coerce(other)
        return DD(*dd_sub(yh, yl, self.hi, self.lo))

    def __mul__(self, other):
        yh, yl = self._coerce(other)
        return DD(*dd_mul(self.hi, self.lo, yh, yl))

    __rmul__ = __mul__

    def __truediv__(self, other):
        yh, yl = self._coerce(other)
        return DD(*dd_div(self.hi, self.lo, yh, yl))

    def __rtruediv__(self, other):
        yh, yl = self._coerce(other)
        return DD(*dd_div(yh, yl, self.hi, self.lo))

    def __neg__(self):
        return DD(-self.hi, -self.lo)

    def __abs__(self):
        return -self if self.hi < 0 or (self.hi == 0 and self.lo < 0) else self

    def sqrt(self):
        return DD(*dd_sqrt(self.hi, self.lo))

    def _cmp(self, other):
        yh, yl = self._coerce(other)
        dh, dl = dd_sub(self.hi, self.lo, yh, yl)
        return dh + dl

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        return self._cmp(other) == 0

    def __hash__(self):
        return hash((self.hi, self.lo))


def dd_from_float(x):
    """Promote an exact double to dd (lossless round trip)."""
    return DD(x)


def dd_isfinite(xh, xl):
    return math.isfinite(xh) and math.isfinite(xl)
