from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from altmzv.model import ConstAtom, SignedIndex, SymExpr, parse_index
from altmzv.numeric import (
    AccuracyError,
    ConstantCache,
    DivergenceError,
    DomainError,
    digits_to_bits,
    eval_alt_outer,
    eval_atom,
    eval_expr,
    eval_mpl_at,
    nested_series_partial,
    series_tail_bound,
)

TOL = mpmath.mpf("1e-40")


def close(a, b, tol=mpmath.mpf("1e-38")):
    with mpmath.workprec(300):
        return abs(a - b) < tol


@pytest.mark.parametrize("s", [1, 2, 3, 5])
def test_depth_one_barred_is_minus_eta(s):
    v = eval_alt_outer(SignedIndex.of(-s), tol=TOL)
    with mpmath.workprec(200):
        assert close(v.value, -mpmath.altzeta(s))


@pytest.mark.parametrize("s", [2, 3, 6])
def test_depth_one_unbarred_is_zeta(s):
    v = eval_alt_outer(SignedIndex.of(s), tol=TOL)
    with mpmath.workprec(200):
        assert close(v.value, mpmath.zeta(s))


def test_euler_sum():
    with mpmath.workprec(200):
        assert close(eval_alt_outer(parse_index("2,1"), tol=TOL).value, mpmath.zeta(3))


def _depth1(slot):
    s, bar = slot
    with mpmath.workprec(200):
        return -mpmath.altzeta(s) if bar else mpmath.zeta(s)


# the signed stuffle: zeta(a) zeta(b) = zeta(a,b) + zeta(b,a) + zeta(a+b) with signs multiplied
slot = st.tuples(st.integers(1, 3), st.booleans()).filter(lambda t: t != (1, False))


@given(slot, slot)
def test_stuffle_product(a, b):
    ab = SignedIndex(((a[0], a[1]), (b[0], b[1])))
    ba = SignedIndex(((b[0], b[1]), (a[0], a[1])))
    merged = SignedIndex(((a[0] + b[0], a[1] != b[1]),))
    tol = mpmath.mpf("1e-30")
    with mpmath.workprec(200):
        lhs = _depth1(a) * _depth1(b)
        rhs = eval_alt_outer(ab, tol).value + eval_alt_outer(ba, tol).value + eval_alt_outer(merged, tol).value
        assert abs(lhs - rhs) < mpmath.mpf("1e-28")


@pytest.mark.parametrize("text", ["b1", "b2,1", "b1,1,1", "b3,2"])
def test_holder_matches_crvz(text):
    idx = parse_index(text)
    h = eval_alt_outer(idx, tol=mpmath.mpf("1e-30"))
    c = eval_alt_outer(idx, tol=mpmath.mpf("1e-20"), method="crvz")
    with mpmath.workprec(200):
        assert abs(h.value - c.value) < mpmath.mpf("1e-20")


def test_holder_matches_direct():
    idx = parse_index("3,b1")
    h = eval_alt_outer(idx, tol=mpmath.mpf("1e-30"))
    d = eval_alt_outer(idx, tol=mpmath.mpf("1e-5"), method="direct")
    with mpmath.workprec(200):
        assert abs(h.value - d.value) <= d.error_bound + mpmath.mpf("1e-30")


@given(st.sampled_from(["b1", "b2", "b1,b1", "2,b1", "b1,2"]), st.integers(30, 120))
def test_error_bound_respects_tolerance(text, digits):
    tol = mpmath.power(10, -digits)
    v = eval_alt_outer(parse_index(text), tol=tol)
    assert v.error_bound <= tol
    ref = eval_alt_outer(parse_index(text), tol=tol * mpmath.mpf("1e-20"))
    with mpmath.workprec(digits_to_bits(digits) + 200):
        assert abs(v.value - ref.value) <= tol


def test_divergent_and_invalid_routes():
    with pytest.raises(DivergenceError):
        eval_alt_outer(parse_index("1,2"))
    with pytest.raises(ValueError):
        eval_alt_outer(parse_index("2,b1"), method="crvz")
    with pytest.raises(ValueError):
        eval_alt_outer(parse_index("b2"), method="direct")
    with pytest.raises(AccuracyError) as err:
        eval_alt_outer(parse_index("2"), tol=mpmath.mpf("1e-30"), method="direct")
    assert err.value.best_bound > 0


def test_empty_index():
    assert eval_alt_outer(SignedIndex()).value == 1


@pytest.mark.parametrize("n", [1, 2, 3, 4, 7])
def test_polylog_at_half(n):
    v = eval_mpl_at(Fraction(1, 2), SignedIndex.of(n), 200)
    with mpmath.workprec(220):
        assert close(v.value, mpmath.polylog(n, mpmath.mpf(1) / 2))


def test_mpl_domain():
    with pytest.raises(DomainError):
        eval_mpl_at(Fraction(3, 4), SignedIndex.of(2), 100)
    with pytest.raises(DomainError):
        eval_mpl_at(Fraction(1, 2), parse_index("b2"), 100)


def _brute(exponents, x, n):
    # direct nested loop over n_1 > n_2 > ... in exact arithmetic
    total = Fraction(0)

    def rec(level, upper, weight):
        nonlocal total
        if level == len(exponents):
            total += weight
            return
        for p in range(1, upper):
            w = weight / Fraction(p) ** exponents[level]
            if level == 0:
                w *= Fraction(x) ** p
            rec(level + 1, p, w)

    rec(0, n + 1, Fraction(1))
    return total


@given(st.lists(st.integers(1, 3), min_size=1, max_size=3), st.integers(1, 12))
def test_partial_sum_matches_nested_loops(exps, n):
    x = Fraction(1, 2)
    with mpmath.workprec(200):
        got = nested_series_partial(exps, [x] * len(exps), n)
        want = _brute(exps, x, n)
        assert abs(got - mpmath.mpf(want.numerator) / want.denominator) < mpmath.mpf("1e-50")


def _prefix_sums(depth, x, n):
    # partial sums of sum x^p1 / (p1 ... pd) over p1 > ... > pd, for every cutoff
    level = [mpmath.mpf(1)] * (n + 1)
    for j in range(depth):
        new, acc = [mpmath.mpf(0)] * (n + 1), mpmath.mpf(0)
        for p in range(1, n + 1):
            term = level[p - 1] / p
            acc += term * mpmath.mpf(x) ** p if j == depth - 1 else term
            new[p] = acc
        level = new
    return level


@given(st.integers(1, 4), st.integers(5, 60))
def test_tail_bound_dominates(depth, n):
    with mpmath.workprec(400):
        sums = _prefix_sums(depth, 0.5, n + 250)
        tail = sums[-1] - sums[n]
        assert tail <= series_tail_bound(Fraction(1, 2), depth, n)


def test_cache_roundtrip(tmp_path):
    path = tmp_path / "c.tsv"
    c1 = ConstantCache(path)
    z = eval_atom(ConstAtom.zeta(3), 200, cache=c1)
    assert c1.derivations == 1
    c1.save()
    c2 = ConstantCache(path)
    again = eval_atom(ConstAtom.zeta(3), 200, cache=c2)
    assert c2.derivations == 0 and c2.hits == 1
    with mpmath.workprec(200):
        assert abs(z.value - again.value) < mpmath.ldexp(1, -190)
    # a request above the stored precision re-derives
    eval_atom(ConstAtom.zeta(3), 400, cache=c2)
    assert c2.derivations == 1


def test_cache_merge_keeps_higher_precision():
    a, b = ConstantCache(), ConstantCache()
    eval_atom(ConstAtom.ln2(), 100, cache=a)
    eval_atom(ConstAtom.ln2(), 300, cache=b)
    a.merge(b.entries())
    assert a.entries()["ln2"][1] == b.entries()["ln2"][1]


def test_eval_expr_linear_combination():
    e = SymExpr.zeta(2) * Fraction(1, 2) - SymExpr.ln2(2) * Fraction(1, 2)
    v = eval_expr(e, 200, cache=ConstantCache())
    with mpmath.workprec(220):
        want = mpmath.polylog(2, mpmath.mpf(1) / 2)
        assert abs(v.value - want) <= v.error_bound + mpmath.ldexp(1, -200)
    assert v.error_bound <= mpmath.ldexp(1, -200)


def test_digits_to_bits_monotone():
    assert digits_to_bits(40) >= 133
    assert digits_to_bits(41) > digits_to_bits(40)
