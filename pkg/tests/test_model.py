from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from altmzv.model import (
    ApproxReal,
    ConstAtom,
    IndexParseError,
    SignedIndex,
    SymExpr,
    canonicalize,
    parse_index,
    print_index,
)

from strategies import indices


@given(indices)
def test_print_parse_roundtrip(index):
    assert parse_index(print_index(index)) == index


def test_parse_examples():
    idx = parse_index("b1, 1 ,2")
    assert idx.exponents == (1, 1, 2)
    assert idx.bars == (True, False, False)
    assert idx.weight == 4 and idx.depth == 3
    assert parse_index("") == SignedIndex()


@pytest.mark.parametrize("text", ["b0", "1,,2", "x", "bb1", "-1", "1.5"])
def test_parse_rejects(text):
    with pytest.raises(IndexParseError):
        parse_index(text)


def test_admissibility():
    assert parse_index("b1").is_admissible()
    assert parse_index("2,1").is_admissible()
    assert not parse_index("1,2").is_admissible()


@given(indices, indices)
def test_concat_adds_weight(a, b):
    assert (a + b).weight == a.weight + b.weight
    assert (a + b).depth == a.depth + b.depth


@pytest.mark.parametrize(
    "atom",
    [
        ConstAtom.ln2(),
        ConstAtom.zeta(3),
        ConstAtom.li_half(4),
        ConstAtom.mpl_half(parse_index("3,1")),
        ConstAtom.mzv(parse_index("b1,3,1")),
    ],
)
def test_atom_key_roundtrip(atom):
    assert ConstAtom.from_key(atom.key) == atom


def test_atom_domain_errors():
    with pytest.raises(ValueError):
        ConstAtom.zeta(1)
    with pytest.raises(ValueError):
        ConstAtom.mpl_half(parse_index("b2"))
    with pytest.raises(ValueError):
        ConstAtom.mzv(parse_index("1,2"))


small = st.fractions(min_value=-5, max_value=5, max_denominator=7)


def _poly(a, b, c):
    return SymExpr.ln2(2) * a + SymExpr.zeta(2) * b + SymExpr.zeta(3) * SymExpr.ln2() * c


@given(small, small, small, small, small, small)
def test_ring_laws(a, b, c, d, e, f):
    p, q = _poly(a, b, c), _poly(d, e, f)
    assert p + q == q + p
    assert p * q == q * p
    assert (p + q) * p == p * p + q * p
    assert (p - p).is_zero


@given(small, small, small)
def test_canonical_is_idempotent(a, b, c):
    p = _poly(a, b, c)
    assert canonicalize(canonicalize(p)) == canonicalize(p)


@given(small, small, small)
def test_json_roundtrip(a, b, c):
    p = _poly(a, b, c) + SymExpr.mpl_half(parse_index("3,1"))
    assert SymExpr.from_json(p.to_json()) == p


def test_weights_and_homogeneity():
    p = SymExpr.zeta(3) * SymExpr.ln2() + SymExpr.zeta(4)
    assert p.weights() == {4}
    assert p.is_homogeneous(4)
    assert not (p + SymExpr.ln2()).is_homogeneous()


def test_float_coefficients_rejected():
    with pytest.raises(TypeError):
        SymExpr.zeta(2) * 0.5


def test_substitute():
    atom = ConstAtom.mpl_half(parse_index("3,1"))
    e = SymExpr.atom(atom) * 2 + SymExpr.ln2()
    out = e.substitute(atom, SymExpr.zeta(4) / 8)
    assert out == SymExpr.zeta(4) / 4 + SymExpr.ln2()


def test_pretty():
    e = SymExpr.zeta(3) * Fraction(-3, 4)
    assert e.pretty() == "-3/4*zeta(3)"


@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6))
def test_approx_arithmetic_bounds(a, b):
    with mpmath.workprec(120):
        x = ApproxReal(mpmath.mpf(a) / 3, 120, mpmath.mpf("1e-30"))
        y = ApproxReal(mpmath.mpf(b) / 7, 120, mpmath.mpf("1e-30"))
    with mpmath.workprec(300):
        exact_sum = mpmath.mpf(a) / 3 + mpmath.mpf(b) / 7
        assert abs((x + y).value - exact_sum) <= (x + y).error_bound
        exact_prod = (mpmath.mpf(a) / 3) * (mpmath.mpf(b) / 7)
        assert abs((x * y).value - exact_prod) <= (x * y).error_bound


def test_negation_keeps_precision():
    with mpmath.workprec(300):
        v = mpmath.mpf(1) / 3
    x = ApproxReal(v, 300)
    with mpmath.workprec(400):
        assert abs((-x).value + v) < mpmath.mpf(2) ** -290
