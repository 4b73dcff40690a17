from fractions import Fraction
from math import factorial

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from altmzv.quadrature import SEGMENTS, quad_I, quad_J, quad_logpow, quad_T, tanh_sinh

PREC = 160  # bits
TIGHT = mpmath.mpf("1e-40")


def near(res, want, tol=TIGHT):
    with mpmath.workprec(PREC + 60):
        return abs(res.value.value - want) < tol


def test_tanh_sinh_endpoint_singularities():
    r = tanh_sinh(lambda x, xa, xb: mpmath.log(xa) ** 2, 0, 1, PREC)
    assert r.converged and near(r, 2)
    r = tanh_sinh(lambda x, xa, xb: mpmath.log(xa) * mpmath.log(xb), 0, 1, PREC)
    with mpmath.workprec(PREC + 60):
        assert near(r, 2 - mpmath.pi**2 / 6)


def test_tanh_sinh_reports_nonconvergence():
    r = tanh_sinh(lambda x, xa, xb: mpmath.mpf(1) if x < mpmath.mpf(1) / 3 else mpmath.mpf(0), 0, 1, PREC, max_level=5)
    assert not r.converged


def test_deterministic():
    a, b = quad_I(1, 2, PREC), quad_I(1, 2, PREC)
    assert a.value.value == b.value.value and a.levels_used == b.levels_used


@given(st.integers(1, 6), st.integers(0, 4))
def test_logpow_full_segment(n, m):
    want = Fraction((-1) ** m * factorial(m), n ** (m + 1))
    with mpmath.workprec(PREC + 60):
        assert near(quad_logpow(n, m, "full", PREC), mpmath.mpf(want.numerator) / want.denominator)


@pytest.mark.parametrize("segment", ["lower-half", "upper-half"])
@pytest.mark.parametrize("n,m", [(1, 1), (2, 3), (4, 2)])
def test_logpow_half_segments_vs_mpmath(segment, n, m):
    a, b = SEGMENTS[segment]
    with mpmath.workdps(45):
        lo, hi = mpmath.mpf(a.numerator) / a.denominator, mpmath.mpf(b.numerator) / b.denominator
        want = mpmath.quad(lambda t: t ** (n - 1) * mpmath.log(t) ** m, [lo, hi])
    assert near(quad_logpow(n, m, segment, PREC), want, mpmath.mpf("1e-30"))


def test_segments_add_up():
    full = quad_logpow(3, 2, "full", PREC).value
    parts = quad_logpow(3, 2, "lower-half", PREC).value + quad_logpow(3, 2, "upper-half", PREC).value
    with mpmath.workprec(PREC + 60):
        assert abs(full.value - parts.value) < TIGHT


@pytest.mark.parametrize("k", range(0, 4))
def test_I_first_power_is_eta(k):
    # int ln^k(x) ln(1+x)/x dx = (-1)^k k! eta(k+2)
    with mpmath.workprec(PREC + 60):
        want = (-1) ** k * factorial(k) * mpmath.altzeta(k + 2)
        assert near(quad_I(k, 1, PREC), want)


@pytest.mark.parametrize("m", range(0, 5))
def test_J_without_outer_log(m):
    with mpmath.workprec(PREC + 60):
        assert near(quad_J(0, m, PREC), mpmath.ln2 ** (m + 1) / (m + 1))


@pytest.mark.parametrize("k,m", [(1, 0), (2, 1), (1, 3)])
def test_J_vs_tanh_sinh_reference(k, m):
    with mpmath.workdps(40):
        want = mpmath.quad(lambda t: mpmath.log(1 - t) ** k * mpmath.log(1 + t) ** m / (1 + t), [0, 1])
    assert near(quad_J(k, m, PREC), want, mpmath.mpf("1e-30"))


def test_T_vs_reference():
    with mpmath.workdps(40):
        want = mpmath.quad(lambda t: mpmath.log(t) * mpmath.log(1 - t) / (1 + t), [0, 1])
    assert near(quad_T(1, 1, PREC), want, mpmath.mpf("1e-30"))


def test_domain_errors():
    with pytest.raises(ValueError):
        quad_I(0, 0, PREC)
    with pytest.raises(ValueError):
        quad_logpow(0, 1, "full", PREC)
    with pytest.raises(ValueError):
        quad_logpow(1, 1, "middle", PREC)
    with pytest.raises(ValueError):
        quad_T(0, 1, PREC)
