"""Error-free transforms and double-double arithmetic."""

import math
from fractions import Fraction

import numpy as np
import pytest

from orthofit.ddarith import (DD, comp_dot, comp_sum, dd_add, dd_div, dd_dot,
                              dd_matvec, dd_matvec_t, dd_mul, dd_sqrt, dd_sum,
                              fast_two_sum, two_prod, two_sum)
from orthofit.synth import SplitMix64


def _rand_doubles(n, seed=42):
    rng = SplitMix64(seed)
    return [(rng.uniform() - 0.5) * 2.0 ** (rng.next_u64() % 40 - 20)
            for _ in range(n)]


def test_two_sum_exact():
    for a in _rand_doubles(50, 1):
        for b in _rand_doubles(3, int(abs(a * 1e6)) + 1):
            s, e = two_sum(a, b)
            assert Fraction(s) + Fraction(e) == Fraction(a) + Fraction(b)


def test_two_prod_exact():
    for a in _rand_doubles(40, 2):
        for b in _rand_doubles(3, 7):
            p, e = two_prod(a, b)
            assert Fraction(p) + Fraction(e) == Fraction(a) * Fraction(b)


def test_fast_two_sum_ordered():
    s, e = fast_two_sum(1e16, 1.0)
    assert Fraction(s) + Fraction(e) == Fraction(1e16) + 1


def _dd_frac(h, l):
    return Fraction(float(h)) + Fraction(float(l))


@pytest.mark.parametrize("op,frac_op", [
    (dd_add, lambda a, b: a + b),
    (dd_mul, lambda a, b: a * b),
])
def test_dd_ops_match_fractions(op, frac_op):
    vals = _rand_doubles(12, 3)
    for a in vals[:6]:
        for b in vals[6:]:
            xh, xl = two_sum(a, b * 1e-18)
            yh, yl = two_sum(b, a * 1e-17)
            zh, zl = op(xh, xl, yh, yl)
            exact = frac_op(_dd_frac(xh, xl), _dd_frac(yh, yl))
            err = abs(_dd_frac(zh, zl) - exact)
            assert err <= abs(exact) * Fraction(1, 10 ** 30) + Fraction(1, 10 ** 300)


def test_dd_div_accuracy():
    ah, al = two_sum(1.0, 1e-20)
    bh, bl = two_sum(3.0, -1e-21)
    qh, ql = dd_div(ah, al, bh, bl)
    exact = _dd_frac(ah, al) / _dd_frac(bh, bl)
    assert abs(_dd_frac(qh, ql) - exact) < Fraction(1, 10 ** 30)


def test_dd_sqrt_accuracy():
    for v in (2.0, 3.0, 1e-8, 12345.678):
        h, l = dd_sqrt(v, 0.0)
        sq = _dd_frac(*dd_mul(h, l, h, l))
        assert abs(sq - Fraction(v)) < Fraction(v) * Fraction(1, 10 ** 29)
    assert dd_sqrt(0.0, 0.0) == (0.0, 0.0)


def test_dd_roundtrips_doubles_losslessly():
    for v in _rand_doubles(100, 5):
        d = DD(v)
        assert float(d) == v and d.hi == v and d.lo == 0.0


def test_dd_scalar_operators():
    a, b = DD(0.1), DD(0.2)
    assert abs(float(a + b - 0.3)) < 1e-16  # true double arithmetic residue
    assert float((a * 3 - DD(0.1) - DD(0.1) - DD(0.1))) == 0.0
    assert float(2.0 / DD(4.0)) == 0.5
    assert DD(2.0) < 3 < DD(4.0)
    assert abs(DD(-2.5)) == DD(2.5)
    assert float(DD(9.0).sqrt()) == 3.0


def test_dd_sum_cancellation():
    xs = np.array([1e16, 1.0, -1e16])
    h, l = dd_sum(xs, 0.0)
    assert h + l == 1.0
    assert comp_sum(xs) == 1.0


def test_comp_dot_large_uniform():
    u = np.full(10 ** 5, 0.1)
    v = np.ones_like(u)
    assert abs(comp_dot(u, v) - 1e4) < 1e-10


def test_dd_dot_matches_fractions():
    rng = SplitMix64(9)
    u = np.array([rng.uniform() for _ in range(64)])
    v = np.array([rng.uniform() for _ in range(64)])
    h, l = dd_dot(u, np.zeros_like(u), v, np.zeros_like(v))
    exact = sum((Fraction(a) * Fraction(b) for a, b in zip(u, v)), Fraction(0))
    assert abs(_dd_frac(h, l) - exact) < abs(exact) / Fraction(10 ** 28)


def test_dd_matvec_shapes_and_values():
    rng = SplitMix64(11)
    M = np.array([[rng.uniform() for _ in range(4)] for _ in range(6)])
    v = np.array([rng.uniform() for _ in range(4)])
    w = np.array([rng.uniform() for _ in range(6)])
    zM, zv, zw = np.zeros_like(M), np.zeros_like(v), np.zeros_like(w)
    h, l = dd_matvec(M, zM, v, zv)
    assert np.allclose(h + l, M @ v, rtol=0, atol=1e-15)
    h, l = dd_matvec_t(M, zM, w, zw)
    assert np.allclose(h + l, M.T @ w, rtol=0, atol=1e-15)


def test_dd_tree_sum_axis():
    arr = np.arange(12.0).reshape(3, 4)
    h, l = dd_sum(arr, np.zeros_like(arr), axis=0)
    assert np.array_equal(h + l, arr.sum(axis=0))
    h, l = dd_sum(arr, np.zeros_like(arr), axis=1)
    assert np.array_equal(h + l, arr.sum(axis=1))


def test_dd_precision_is_about_32_digits():
    # (1 + 1e-25) - 1 survives in dd, dies in double
    one_plus = dd_add(1.0, 0.0, 1e-25, 0.0)
    h, l = dd_add(*one_plus, -1.0, 0.0)
    assert math.isclose(h + l, 1e-25, rel_tol=1e-6)
