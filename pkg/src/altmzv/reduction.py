"""Symbolic closed forms for alternating MZVs and log integrals.

Everything here is exact: results are :class:`SymExpr` values over
ln 2, zeta(n), Li_n(1/2), and residue atoms (multiple polylogarithms at 1/2
and alternating MZVs) that no rule here can eliminate.  Residues are
never replaced by numbers; :func:`altmzv.numeric.eval_expr` resolves them.

Recurrences are memoized on their integer parameters.  Every public
reducer passes its output through :func:`reduce_basis`, so results are
directly comparable with ``==``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Iterable

import mpmath

from .model import ConstAtom, Monomial, SignedIndex, SymExpr, parse_index, print_index

__all__ = [
    "WEIGHT_LIMIT",
    "CapabilityError",
    "WeightLimitError",
    "UnsupportedTargetError",
    "FixtureNotFoundError",
    "ZetaPolynomial",
    "ReductionResult",
    "reduce_basis",
    "mpl_half_value",
    "adz_reduce",
    "mpl_half_2ones",
    "closed_I",
    "closed_J",
    "closed_logpow",
    "reduce_one_bar",
    "reduce_head_family",
    "reduce_two_bars",
    "reduce_interior_two",
    "relation_interior_three",
    "reduce_interior_three_diagonal",
    "reduce_triple_bar",
    "map_quad_bar",
    "relation_61",
    "solve_for_atom",
    "solve_relation_61",
    "fixtures",
    "lookup_fixture",
    "parse_target",
    "reduce_target",
    "resolve_residues",
    "FAMILIES",
]

WEIGHT_LIMIT = 12


class CapabilityError(Exception):
    """A request the engine cannot serve symbolically."""


class WeightLimitError(CapabilityError):
    def __init__(self, weight: int, limit: int):
        super().__init__(f"weight {weight} exceeds the configured limit {limit}")
        self.weight = weight
        self.limit = limit


class UnsupportedTargetError(CapabilityError):
    def __init__(self, target: str, nearest: str):
        super().__init__(f"no reduction covers {target}; nearest supported family: {nearest}")
        self.target = target
        self.nearest = nearest


class FixtureNotFoundError(KeyError):
    pass


def _check_weight(weight: int, limit: int | None) -> None:
    limit = WEIGHT_LIMIT if limit is None else limit
    if weight > limit:
        raise WeightLimitError(weight, limit)


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


# --------------------------------------------------------------------------
# small builders
# --------------------------------------------------------------------------

ONE = SymExpr.const(1)
ZERO = SymExpr.const(0)


def _L(p: int = 1) -> SymExpr:
    return ONE if p == 0 else SymExpr.ln2(p)


def _Z(n: int) -> SymExpr:
    return SymExpr.zeta(n)


def _Li(n: int) -> SymExpr:
    return SymExpr.li_half(n)


def _ones(n: int) -> list[int]:
    return [1] * n


def _idx(head: Iterable[int], ones: int = 0, tail: Iterable[int] = (), ones2: int = 0) -> SignedIndex:
    """Signed index from blocks; negative entries are barred."""
    return SignedIndex.of(*head, *_ones(ones), *tail, *_ones(ones2))


# --------------------------------------------------------------------------
# basis reduction
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _even_zeta_ratio(n: int) -> Fraction:
    """zeta(2n) / pi^(2n) as an exact rational."""
    p, q = mpmath.bernfrac(2 * n)
    b = Fraction(int(p), int(q))
    return (-1) ** (n + 1) * b * 2 ** (2 * n - 1) / factorial(2 * n)


@lru_cache(maxsize=1)
def _low_li_rules() -> tuple:
    li2 = _Z(2) / 2 - _L(2) / 2
    li3 = _Z(3) * Fraction(7, 8) - _Z(2) * _L() / 2 + _L(3) / 6
    return ((ConstAtom.li_half(2), li2), (ConstAtom.li_half(3), li3))


def reduce_basis(expr: SymExpr) -> SymExpr:
    """Rewrite Li2(1/2), Li3(1/2) and products of even zeta values.

    Li2(1/2) and Li3(1/2) have classical evaluations in ln 2 and zeta
    values; a product of even zeta values is a rational multiple of a
    single zeta(2N).  The result is canonical.
    """
    for atom, value in _low_li_rules():
        expr = expr.substitute(atom, value)
    out: dict[Monomial, Fraction] = {}
    for mono, c in expr.canonical().items():
        halves = []
        rest = []
        for a, p in mono.factors:
            if a.kind == "zeta" and a.params[0] % 2 == 0:
                halves.extend([a.params[0] // 2] * p)
            else:
                rest.append((a, p))
        if len(halves) >= 2:
            total = sum(halves)
            ratio = Fraction(1)
            for h in halves:
                ratio *= _even_zeta_ratio(h)
            c = c * ratio / _even_zeta_ratio(total)
            mono = Monomial.build(rest + [(ConstAtom.zeta(2 * total), 1)])
        out[mono] = out.get(mono, Fraction(0)) + c
    return SymExpr(out).canonical()


# --------------------------------------------------------------------------
# zeta polynomials and the ADZ generating function
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ZetaPolynomial:
    """Polynomial in formal zeta(n); keys are sorted tuples of arguments."""

    terms: tuple[tuple[tuple[int, ...], Fraction], ...] = ()

    @classmethod
    def from_dict(cls, d: dict) -> "ZetaPolynomial":
        return cls(tuple(sorted((k, v) for k, v in d.items() if v)))

    @classmethod
    def const(cls, c) -> "ZetaPolynomial":
        return cls.from_dict({(): Fraction(c)})

    @classmethod
    def zeta(cls, n: int, c=1) -> "ZetaPolynomial":
        return cls.from_dict({(n,): Fraction(c)})

    def as_dict(self) -> dict:
        return dict(self.terms)

    def __add__(self, other: "ZetaPolynomial") -> "ZetaPolynomial":
        d = self.as_dict()
        for k, v in other.terms:
            d[k] = d.get(k, Fraction(0)) + v
        return ZetaPolynomial.from_dict(d)

    def __neg__(self) -> "ZetaPolynomial":
        return ZetaPolynomial(tuple((k, -v) for k, v in self.terms))

    def scale(self, c) -> "ZetaPolynomial":
        return ZetaPolynomial.from_dict({k: v * c for k, v in self.terms})

    def __mul__(self, other: "ZetaPolynomial") -> "ZetaPolynomial":
        d: dict = {}
        for k1, v1 in self.terms:
            for k2, v2 in other.terms:
                k = tuple(sorted(k1 + k2))
                d[k] = d.get(k, Fraction(0)) + v1 * v2
        return ZetaPolynomial.from_dict(d)

    def weight_pieces(self) -> dict[int, "ZetaPolynomial"]:
        pieces: dict[int, dict] = {}
        for k, v in self.terms:
            pieces.setdefault(sum(k), {})[k] = v
        return {w: ZetaPolynomial.from_dict(d) for w, d in pieces.items()}

    def is_homogeneous(self) -> bool:
        return len(self.weight_pieces()) <= 1

    def to_symexpr(self) -> SymExpr:
        out = ZERO
        for k, v in self.terms:
            term = SymExpr.const(v)
            for n in k:
                term = term * _Z(n)
            out = out + term
        return out


@lru_cache(maxsize=4)
def _adz_table(max_weight: int) -> dict[tuple[int, int], ZetaPolynomial]:
    """Coefficients of x^m y^n in 1 - exp(sum zeta(k)(x^k + y^k - (x+y)^k)/k)."""
    # the pure x^k and y^k parts cancel, leaving only mixed monomials
    exponent: dict[tuple[int, int], ZetaPolynomial] = {}
    for k in range(2, max_weight + 1):
        for i in range(1, k):
            exponent[(i, k - i)] = ZetaPolynomial.zeta(k, Fraction(-comb(k, i), k))
    total = {(0, 0): ZetaPolynomial.const(1)}
    power = {(0, 0): ZetaPolynomial.const(1)}
    for r in range(1, max_weight // 2 + 1):
        nxt: dict[tuple[int, int], ZetaPolynomial] = {}
        for (a, b), p in power.items():
            for (c, d), q in exponent.items():
                if a + b + c + d > max_weight:
                    continue
                key = (a + c, b + d)
                term = (p * q).scale(Fraction(1, r))
                nxt[key] = nxt[key] + term if key in nxt else term
        power = nxt
        for key, v in power.items():
            total[key] = total[key] + v if key in total else v
    return {key: -v for key, v in total.items() if key != (0, 0)}


def adz_zeta_polynomial(s: int, ones: int, limit: int | None = None) -> ZetaPolynomial:
    _need(s >= 2 and ones >= 0, "adz_reduce needs s >= 2 and ones >= 0")
    _check_weight(s + ones, limit)
    table = _adz_table(max(WEIGHT_LIMIT, s + ones))
    return table.get((s - 1, ones + 1), ZetaPolynomial())


@lru_cache(maxsize=None)
def _adz(s: int, ones: int) -> SymExpr:
    return reduce_basis(adz_zeta_polynomial(s, ones, limit=s + ones).to_symexpr())


def adz_reduce(s: int, ones: int, limit: int | None = None) -> SymExpr:
    """zeta(s, {1}_ones) as a polynomial in zeta values."""
    _need(s >= 2 and ones >= 0, "adz_reduce needs s >= 2 and ones >= 0")
    _check_weight(s + ones, limit)
    return _adz(s, ones)


# --------------------------------------------------------------------------
# multiple polylogarithms at 1/2
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def mpl_half_2ones(m: int) -> SymExpr:
    """zeta(2, {1}_m; 1/2) in ln 2, zeta values and Li_n(1/2).

    Solves the relation obtained from J(k, 0) for its top term, using the
    ADZ values zeta(2, {1}_(i-1)) = zeta(i + 1) on the way.
    """
    _need(m >= 0, "mpl_half_2ones needs m >= 0")
    _check_weight(m + 2, None)
    k = m + 1
    rhs = _Li(k + 1) * ((-1) ** k * factorial(k)) - _L(k + 1)
    for i in range(1, k):
        c = (-1) ** i * factorial(i) * comb(k, i)
        rhs = rhs - (_adz(2, i - 1) - mpl_half_2ones(i - 1)) * _L(k - i) * c
    top = rhs / ((-1) ** k * factorial(k))
    return reduce_basis(_adz(2, m) - top)


def mpl_half_value(exponents: Iterable[int]) -> SymExpr:
    """zeta(s_1, ..., s_r; 1/2), reduced where a closed form is known."""
    exps = list(exponents)
    if not exps:
        return ONE
    if all(e == 1 for e in exps):
        return _L(len(exps)) / factorial(len(exps))
    if len(exps) == 1:
        return _Li(exps[0])
    if exps[0] == 2 and all(e == 1 for e in exps[1:]):
        return mpl_half_2ones(len(exps) - 1)
    return SymExpr.mpl_half(SignedIndex.plain(exps))


def _mpl(head: int, ones: int) -> SymExpr:
    return mpl_half_value([head] + _ones(ones))


# --------------------------------------------------------------------------
# log-power integrals
# --------------------------------------------------------------------------


def closed_logpow(n: int, m: int, segment: str) -> tuple[Fraction, dict[int, Fraction]]:
    """int t^(n-1) ln^m(t) dt over a segment, as a rational plus ln 2 powers.

    Returns ``(rational, {p: coeff})`` meaning rational + sum coeff*ln^p 2.
    """
    _need(n >= 1 and m >= 0, "closed_logpow needs n >= 1 and m >= 0")
    full = Fraction((-1) ** m * factorial(m), n ** (m + 1))
    half: dict[int, Fraction] = {}
    for l in range(m + 1):
        half[m - l] = half.get(m - l, Fraction(0)) + Fraction(
            (-1) ** m * factorial(l) * comb(m, l), 2**n * n ** (l + 1)
        )
    if segment == "full":
        return full, {}
    if segment == "lower-half":
        return Fraction(0), half
    if segment == "upper-half":
        return full, {p: -c for p, c in half.items()}
    raise ValueError(f"unknown segment {segment!r}")


def closed_logpow_expr(n: int, m: int, segment: str) -> SymExpr:
    rational, powers = closed_logpow(n, m, segment)
    out = SymExpr.const(rational)
    for p, c in powers.items():
        out = out + _L(p) * c
    return out


# --------------------------------------------------------------------------
# I(k, m) and J(k, m)
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _closed_I(k: int, m: int, reading: str) -> SymExpr:
    n = m + k
    out = _L(n + 1) / (n + 1) + _Z(n + 1) * factorial(n)
    for l in range(n + 1):
        out = out - _L(n - l) * _Li(l + 1) * (factorial(l) * comb(n, l))
    for j in range(1, k + 1):
        sign = (-1) ** (j if reading == "derived" else k)
        c = sign * factorial(j) * factorial(n - j) * comb(k, j)
        out = out + (_adz(n + 2 - j, j - 1) + _adz(n + 1 - j, j)) * c
        for l in range(n - j + 1):
            c2 = sign * factorial(j) * factorial(l) * comb(k, j) * comb(n - j, l)
            out = out - _L(n - j - l) * (_mpl(l + 2, j - 1) + _mpl(l + 1, j)) * c2
    return reduce_basis(out)


def closed_I(k: int, m: int, reading: str = "derived", limit: int | None = None) -> SymExpr:
    """I(k,m) = int_0^1 ln^k(x) ln^m(1+x)/x dx in closed form.

    The j-sums carry the sign (-1)^j (``reading="derived"``), which is what
    the substitution x = 1/u - 1 produces.  ``reading="literal"`` uses a
    uniform (-1)^k instead; the two coincide for k <= 1 and the literal one
    fails numerically for k >= 2.
    """
    _need(k >= 0 and m >= 1, "closed_I needs k >= 0 and m >= 1")
    _need(reading in ("derived", "literal"), f"unknown reading {reading!r}")
    _check_weight(k + m + 1, limit)
    return _closed_I(k, m, reading)


@lru_cache(maxsize=None)
def _closed_J(k: int, m: int, variant: str) -> SymExpr:
    w = m + k
    if variant == "A":
        out = _L(w + 1) / (m + 1)
        for i in range(1, k + 1):
            for j in range(m + 1):
                c = (-1) ** (i + j) * factorial(i) * factorial(j) * comb(k, i) * comb(m, j)
                out = out + _L(w - i - j) * _adz(j + 2, i - 1) * c
                for l in range(j + 1):
                    c2 = (-1) ** (i + j) * factorial(i) * factorial(l) * comb(k, i) * comb(m, j) * comb(j, l)
                    out = out - _L(w - i - l) * _mpl(l + 2, i - 1) * c2
        return reduce_basis(out)
    out = ZERO
    for i in range(k + 1):
        for j in range(m + 1):
            top = i if variant == "B" else j
            for l in range(top + 1):
                c = (-1) ** (i + j) * factorial(j) * factorial(l) * comb(k, i) * comb(i, l) * comb(m, j)
                if c:
                    out = out + _L(w - j - l) * _mpl(l + 1, j) * c
    return reduce_basis(out)


def closed_J(k: int, m: int, variant: str = "B", limit: int | None = None) -> SymExpr:
    """J(k,m) = int_0^1 ln^k(1-t) ln^m(1+t)/(1+t) dt in closed form.

    Variant ``"A"`` expands around t = 2u - 1 and needs k >= 1.  Variant
    ``"B"`` expands around t = 1 - 2x; its innermost sum runs over
    0 <= l <= i.  ``"B-literal"`` bounds it by j instead, which already
    gives J(1, 0) = 0 and is kept only so the harness can report it.
    """
    _need(variant in ("A", "B", "B-literal"), f"unknown variant {variant!r}")
    _need(k >= 0 and m >= 0, "closed_J needs k, m >= 0")
    if variant == "A":
        _need(k >= 1, "variant A of closed_J needs k >= 1")
    _check_weight(k + m + 1, limit)
    return _closed_J(k, m, variant)


# --------------------------------------------------------------------------
# reduction results
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ReductionResult:
    target: str
    expr: SymExpr
    route: str = ""
    residue_atoms: tuple = field(default=())

    @classmethod
    def of(cls, target, expr: SymExpr, route: str) -> "ReductionResult":
        label = print_index(target) if isinstance(target, SignedIndex) else str(target)
        expr = reduce_basis(expr)
        return cls(label, expr, route, tuple(expr.residue_atoms()))

    def to_json(self) -> dict:
        return {
            "target": self.target,
            "route": self.route,
            "expr": self.expr.to_json(),
            "pretty": self.expr.pretty(),
            "residue_atoms": [a.key for a in self.residue_atoms],
        }


def reduce_one_bar(k: int) -> ReductionResult:
    """zeta(b1, {1}_(k-1)) = (-1)^k ln^k 2 / k!."""
    _need(k >= 1, "reduce_one_bar needs k >= 1")
    _check_weight(k, None)
    expr = _L(k) * Fraction((-1) ** k, factorial(k))
    return ReductionResult.of(_idx([-1], k - 1), expr, "one-bar")


# --------------------------------------------------------------------------
# zeta(b(k+2), {1}_(m-1))
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _head(k: int, m: int, route: str) -> SymExpr:
    if route == "auto" and k == 0:
        s = (-1) ** m
        out = _L(m + 1) * Fraction(s, factorial(m + 1)) + (_Z(m + 1) - _Li(m + 1)) * s
        for j in range(1, m + 1):
            out = out - _L(m + 1 - j) * _Li(j) * Fraction(s, factorial(m + 1 - j))
        return reduce_basis(out)
    if route == "auto" and k == 1:
        s = (-1) ** (m + 1)
        brace = _Z(m + 2) * m - _L(m + 2) * Fraction((m + 1) ** 2, factorial(m + 2)) - _adz(m + 1, 1)
        out = brace * s
        for l in range(m + 1):
            c = factorial(l) * comb(m, l)
            out = out + _L(m - l) * _mpl(l + 1, 1) * Fraction(s * c, factorial(m))
            out = out - _L(m - l) * _Li(l + 2) * Fraction(s * c, factorial(m - 1))
        return reduce_basis(out)
    return reduce_basis(_closed_I(k, m, "derived") * Fraction((-1) ** (m + k), factorial(m) * factorial(k)))


def reduce_head_family(k: int, m: int, route: str = "auto", limit: int | None = None) -> ReductionResult:
    """zeta(b(k+2), {1}_(m-1)) = (-1)^(m+k)/(m! k!) * I(k, m).

    ``route="auto"`` uses the dedicated k = 0 and k = 1 expansions;
    ``route="general"`` always goes through :func:`closed_I`.
    """
    _need(k >= 0 and m >= 1, "reduce_head_family needs k >= 0 and m >= 1")
    _need(route in ("auto", "general"), f"unknown route {route!r}")
    _check_weight(k + m + 1, limit)
    name = {0: "head k=0", 1: "head k=1"}.get(k, "head via I(k,m)") if route == "auto" else "head via I(k,m)"
    return ReductionResult.of(_idx([-(k + 2)], m - 1), _head(k, m, route), name)


# --------------------------------------------------------------------------
# zeta(b1, {1}_(m-1), b1, {1}_(k-1))
# --------------------------------------------------------------------------


def _two_bars_k1_literal(m: int) -> SymExpr:
    """Closed recurrence for zeta(b1, {1}_(m-1), b1) as printed.

    For m = 1 it omits the Li2(1/2) contribution, so callers use it for
    m >= 2 only.
    """
    out = _L(m + 1) / factorial(m) - _Z(2) * _L(m - 1) / factorial(m - 1)
    for i in range(1, m):
        out = out - _L(i) / factorial(i) * _two_bars(m - i, 1, "auto")
    inner = ZERO
    for kk in range(1, m):
        brace = ZERO
        for l in range(1, kk + 1):
            brace = brace + _L(m - l - 1) * _Li(l + 2) * (factorial(l) * comb(kk, l))
        brace = brace - _L(m - kk - 1) * _Z(kk + 2) * factorial(kk)
        inner = inner + brace * (comb(m - 1, kk) * (-1) ** (kk + 1))
    return out - inner / factorial(m - 1)


@lru_cache(maxsize=None)
def _two_bars(m: int, k: int, route: str) -> SymExpr:
    if route == "auto":
        if m == 1:
            return -_Li(k + 1)
        if k == 1:
            return reduce_basis(_two_bars_k1_literal(m))
        if m == 2:
            out = _L() * _Li(k + 1)
            s = Fraction((-1) ** k, factorial(k))
            for i in range(k + 1):
                for l in range(i + 1):
                    c = factorial(l) * comb(k, i) * comb(i, l)
                    out = out - _L(k + 1 - l) * _Li(l + 1) * (s * (-1) ** i * c)
                    out = out - _L(k - l) * _mpl(l + 1, 1) * (-s * (-1) ** i * c)
            return reduce_basis(out)
    out = _closed_J(k, m - 1, "B") * Fraction((-1) ** (k - 1), factorial(k) * factorial(m - 1))
    for i in range(1, m):
        out = out - _L(i) / factorial(i) * _two_bars(m - i, k, route)
    return reduce_basis(out)


def reduce_two_bars(m: int, k: int, route: str = "auto", limit: int | None = None) -> ReductionResult:
    """zeta(b1, {1}_(m-1), b1, {1}_(k-1)) by recursion on m with a J(k, m-1) source.

    ``route="auto"`` takes the shortcuts for m = 1 (-Li_(k+1)(1/2)), k = 1
    and m = 2; ``route="general"`` uses only the recursion.
    """
    _need(m >= 1 and k >= 1, "reduce_two_bars needs m, k >= 1")
    _need(route in ("auto", "general"), f"unknown route {route!r}")
    _check_weight(m + k, limit)
    if route == "general":
        name = "two-bars recursion"
    else:
        name = "two-bars m=1" if m == 1 else "two-bars k=1" if k == 1 else "two-bars m=2" if m == 2 else "two-bars recursion"
    return ReductionResult.of(_idx([-1], m - 1, [-1], k - 1), _two_bars(m, k, route), name)


# --------------------------------------------------------------------------
# zeta(b1, {1}_(m-1), 2, {1}_(k-1)) and the weight-3 interior relation
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _interior_two(m: int, k: int) -> SymExpr:
    out = _head(0, m + k, "auto") * ((-1) ** m * comb(m + k, k))
    out = out - _L(m) / factorial(m) * _head(0, k, "auto")
    for i in range(1, m):
        out = out - _L(i) / factorial(i) * _interior_two(m - i, k)
    return reduce_basis(out)


def reduce_interior_two(m: int, k: int, limit: int | None = None) -> ReductionResult:
    """zeta(b1, {1}_(m-1), 2, {1}_(k-1)) in ln 2, zeta values and Li_n(1/2)."""
    _need(m >= 1 and k >= 1, "reduce_interior_two needs m, k >= 1")
    _check_weight(m + k + 1, limit)
    return ReductionResult.of(_idx([-1], m - 1, [2], k - 1), _interior_two(m, k), "interior-two")


def _three_atom(m: int, k: int) -> SymExpr:
    return SymExpr.mzv(_idx([-1], m - 1, [3], k - 1))


def relation_interior_three(m: int, k: int, limit: int | None = None) -> tuple[SymExpr, SymExpr]:
    """Both sides of the symmetric relation among zeta(b1, {1}, 3, {1}) values.

    The zeta(b1, {1}_(a-1), 3, {1}_(b-1)) values stay as residue atoms;
    zeta(b2, ...) and zeta(b3, ...) are reduced.
    """
    _need(m >= 1 and k >= 1, "relation_interior_three needs m, k >= 1")
    _check_weight(m + k + 2, limit)
    lhs = _three_atom(m, k) * (-1) ** m + _three_atom(k, m) * (-1) ** k
    rhs = _L(m) * _head(1, k, "auto") * Fraction((-1) ** (m + 1), factorial(m))
    rhs = rhs + _L(k) * _head(1, m, "auto") * Fraction((-1) ** (k + 1), factorial(k))
    rhs = rhs + _head(0, m, "auto") * _head(0, k, "auto")
    for i in range(1, m):
        rhs = rhs + _L(i) * _three_atom(m - i, k) * Fraction((-1) ** (m + 1), factorial(i))
    for i in range(1, k):
        rhs = rhs + _L(i) * _three_atom(k - i, m) * Fraction((-1) ** (k + 1), factorial(i))
    return reduce_basis(lhs), reduce_basis(rhs)


def reduce_interior_three_diagonal(k: int, limit: int | None = None) -> ReductionResult:
    """zeta(b1, {1}_(k-1), 3, {1}_(k-1)) from the m = k case of the relation.

    Off-diagonal zeta(b1, {1}_(k-i-1), 3, {1}_(k-1)) values for i >= 1 remain
    as residue atoms.
    """
    _need(k >= 1, "reduce_interior_three_diagonal needs k >= 1")
    _check_weight(2 * k + 1, limit)
    out = -_L(k) / factorial(k) * _head(1, k, "auto")
    out = out + _head(0, k, "auto") ** 2 * Fraction((-1) ** k, 2)
    for i in range(1, k):
        out = out - _L(i) / factorial(i) * _three_atom(k - i, k)
    return ReductionResult.of(_idx([-1], k - 1, [3], k - 1), out, "interior-three diagonal")


# --------------------------------------------------------------------------
# three and four consecutive bars
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _triple_bar(m: int, k: int) -> SymExpr:
    src = _L(m) * _closed_J(1, k - 1, "B") * k - _closed_J(1, m + k - 1, "B") * (m + k)
    out = src * Fraction((-1) ** (k - 1), factorial(m) * factorial(k))
    for i in range(1, m):
        out = out - _L(i) / factorial(i) * _triple_bar(m - i, k)
    return reduce_basis(out)


def reduce_triple_bar(m: int, k: int, limit: int | None = None) -> ReductionResult:
    """zeta(b1, {1}_(m-1), b1, b1, {1}_(k-1)) via J(1, .) closed forms."""
    _need(m >= 1 and k >= 1, "reduce_triple_bar needs m, k >= 1")
    _check_weight(m + k + 1, limit)
    return ReductionResult.of(_idx([-1], m - 1, [-1, -1], k - 1), _triple_bar(m, k), "triple-bar")


def map_quad_bar(m: int, k: int, limit: int | None = None) -> ReductionResult:
    """zeta(b1, {1}_(m-1), b1, b1, b1, {1}_(k-1)) = (-1)^(m+1) zeta(k+1, 2, {1}_(m-1); 1/2)."""
    _need(m >= 1 and k >= 1, "map_quad_bar needs m, k >= 1")
    _check_weight(m + k + 2, limit)
    atom = SymExpr.mpl_half(SignedIndex.plain([k + 1, 2] + _ones(m - 1)))
    return ReductionResult.of(_idx([-1], m - 1, [-1, -1, -1], k - 1), atom * (-1) ** (m + 1), "quad-bar")


# --------------------------------------------------------------------------
# the relation between zeta(m+1, {1}_k) and polylogarithms at 1/2
# --------------------------------------------------------------------------


def relation_61(m: int, k: int, reading: str = "statement", limit: int | None = None) -> tuple[SymExpr, SymExpr]:
    """Both sides of the identity tying zeta(m+1, {1}_k) to values at 1/2.

    LHS = m! sum_l l! C(k,l) ln^(k-l)2 zeta(l+2, {1}_r; 1/2)
        + k! sum_l l! C(m,l) ln^(m-l)2 zeta(l+1, {1}_k; 1/2),
    RHS = m! k! zeta(m+1, {1}_k), with r = m-1 (``"statement"``) or
    r = k-1 (``"proof"``, needs k >= 1).
    """
    _need(m >= 1 and k >= 0, "relation_61 needs m >= 1 and k >= 0")
    _need(reading in ("statement", "proof"), f"unknown reading {reading!r}")
    r = m - 1 if reading == "statement" else k - 1
    _need(r >= 0, "the proof reading needs k >= 1")
    _check_weight(m + k + 1, limit)
    lhs = ZERO
    for l in range(k + 1):
        lhs = lhs + _L(k - l) * _mpl(l + 2, r) * (factorial(m) * factorial(l) * comb(k, l))
    for l in range(m + 1):
        lhs = lhs + _L(m - l) * _mpl(l + 1, k) * (factorial(k) * factorial(l) * comb(m, l))
    rhs = _adz(m + 1, k) * (factorial(m) * factorial(k))
    return reduce_basis(lhs), reduce_basis(rhs)


def solve_for_atom(lhs: SymExpr, rhs: SymExpr, atom: ConstAtom) -> SymExpr:
    """Solve lhs = rhs for ``atom``, which must occur linearly with a rational coefficient."""
    diff = (lhs - rhs).canonical()
    coeff = Fraction(0)
    rest: dict[Monomial, Fraction] = {}
    for mono, c in diff.items():
        powers = dict(mono.factors)
        if atom in powers:
            if powers[atom] != 1 or len(powers) != 1:
                raise CapabilityError(f"{atom.pretty()} does not occur linearly with a rational coefficient")
            coeff += c
        else:
            rest[mono] = c
    if coeff == 0:
        raise CapabilityError(f"{atom.pretty()} cancels from the relation")
    return (SymExpr(rest) / -coeff).canonical()


def solve_relation_61(m: int, k: int, limit: int | None = None) -> ReductionResult:
    """zeta(m+1, {1}_k; 1/2) solved from :func:`relation_61` (statement reading)."""
    _need(m >= 2 and k >= 1, "solve_relation_61 needs m >= 2 and k >= 1")
    index = SignedIndex.plain([m + 1] + _ones(k))
    lhs, rhs = relation_61(m, k, limit=limit)
    expr = solve_for_atom(lhs, rhs, ConstAtom.mpl_half(index))
    return ReductionResult.of(f"mplhalf:{print_index(index)}", expr, "polylog relation")


# --------------------------------------------------------------------------
# fixture table
# --------------------------------------------------------------------------


@lru_cache(maxsize=1)
def _fixture_table() -> tuple[tuple[str, str, SymExpr], ...]:
    L, Z, Li = _L, _Z, _Li
    F = Fraction
    rows = [
        # integrals
        ("J(0,1)", "integral", L(2) / 2),
        ("I(1,1)", "integral", Z(3) * F(-3, 4)),
        ("J(1,1)", "integral", L(3) / 3 - Z(2) * L() / 2 + Z(3) / 8),
        ("J(2,1)", "integral", L(4) / 4 + Z(3) * L() * 2 - Z(2) * L(2) - Z(4) / 4),
        ("I(0,3)", "integral", Z(4) * 6 + Z(2) * L(2) * F(3, 2) - L(4) / 4 - Z(3) * L() * F(21, 4) - Li(4) * 6),
        ("I(1,2)", "integral", Z(4) * F(15, 4) + Z(2) * L(2) - L(4) / 6 - Z(3) * L() * F(7, 2) - Li(4) * 4),
        ("J(1,2)", "integral", L(4) / 3 + Z(3) * L() * 2 + Li(4) * 2 - Z(2) * L(2) - Z(4) * 2),
        (
            "I(0,4)",
            "integral",
            -Li(5) * 24 - L() * Li(4) * 24 - L(5) * F(4, 5) - Z(3) * L(2) * F(21, 2) + Z(5) * 24 + Z(2) * L(3) * 4,
        ),
        # alternating MZVs
        ("b1,1,b1", "mzv", Z(3) / 8 - L(3) / 6),
        ("b1,2", "mzv", Z(2) * L() / 2 - Z(3) / 4),
        ("b1,3", "mzv", Z(3) * L() * F(3, 4) - Z(4) * F(5, 16)),
        ("b2,1,1", "mzv", Li(4) + L(4) / 24 + Z(3) * L() * F(7, 8) - Z(2) * L(2) / 4 - Z(4)),
        ("b1,1,2", "mzv", Li(4) * 3 + L(4) / 8 + Z(3) * L() * F(23, 8) - Z(2) * L(2) - Z(4) * 3),
        ("b1,1,1,b1", "mzv", Li(4) + L(4) / 12 + Z(3) * L() * F(7, 8) - Z(2) * L(2) / 2 - Z(4)),
        ("b1,b1,b1,b1", "mzv", L(4) / 24 + Z(3) * L() / 4 - Z(2) * L(2) / 4 + Z(4) / 16),
        ("b1,b1,b1,1", "mzv", Li(4) * 3 + L(4) / 6 + Z(3) * L() * F(23, 8) - Z(2) * L(2) - Z(4) * 3),
        ("b1,1,b1,b1", "mzv", -Li(4) * 3 - L(4) / 12 - Z(3) * L() * F(11, 4) - Z(2) * L(2) * F(3, 4) + Z(4) * 3),
        # polylogarithms at 1/2
        ("mplhalf:2", "mplhalf", (Z(2) - L(2)) / 2),
        ("mplhalf:2,1", "mplhalf", Z(3) / 8 - L(3) / 6),
        ("mplhalf:2,1,1", "mplhalf", Z(4) + Z(2) * L(2) / 4 - Li(4) - L(4) / 12 - L() * Z(3) * F(7, 8)),
        ("mplhalf:3,1", "mplhalf", Z(4) / 8 - Z(3) * L() / 8 + L(4) / 24),
    ]
    return tuple((label, kind, expr.canonical()) for label, kind, expr in rows)


def fixtures() -> list[tuple[str, SymExpr]]:
    """Published closed forms, labelled by index text, ``I(k,m)``/``J(k,m)`` or ``mplhalf:...``."""
    return [(label, expr) for label, _, expr in _fixture_table()]


def fixture_kinds() -> dict[str, str]:
    return {label: kind for label, kind, _ in _fixture_table()}


def lookup_fixture(label: str) -> SymExpr:
    for name, _, expr in _fixture_table():
        if name == label.strip():
            return expr
    raise FixtureNotFoundError(label)


# --------------------------------------------------------------------------
# target dispatch
# --------------------------------------------------------------------------

_INTEGRAL_RE = re.compile(r"^\s*([IJ])\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*$")

FAMILIES = {
    "adz": "s,{1}_n with s >= 2",
    "one-bar": "b1,{1}_(k-1)",
    "head": "b(k+2),{1}_(m-1)",
    "two-bars": "b1,{1}_(m-1),b1,{1}_(k-1)",
    "interior-two": "b1,{1}_(m-1),2,{1}_(k-1)",
    "interior-three": "b1,{1}_(k-1),3,{1}_(k-1)",
    "triple-bar": "b1,{1}_(m-1),b1,b1,{1}_(k-1)",
    "quad-bar": "b1,{1}_(m-1),b1,b1,b1,{1}_(k-1)",
    "integral": "I(k,m) or J(k,m)",
    "mplhalf": "mplhalf:{1}_n, mplhalf:2,{1}_n, mplhalf:s,{1}_k (s >= 3)",
}

# skeleton = the index with its unbarred 1 entries removed
_SKELETONS = {
    "adz": ["s"],
    "one-bar": ["b1"],
    "head": ["bs"],
    "two-bars": ["b1", "b1"],
    "interior-two": ["b1", "2"],
    "interior-three": ["b1", "3"],
    "triple-bar": ["b1", "b1", "b1"],
    "quad-bar": ["b1", "b1", "b1", "b1"],
}


def parse_target(text: str):
    """Classify a target string as ``("I"|"J", k, m)``, ``("mplhalf", index)`` or ``("mzv", index)``."""
    mo = _INTEGRAL_RE.match(text)
    if mo:
        return (mo.group(1), int(mo.group(2)), int(mo.group(3)))
    t = text.strip()
    if t.startswith("mplhalf:"):
        index = parse_index(t[len("mplhalf:"):])
        if index.depth == 0 or index.has_bars:
            raise ValueError(f"mplhalf target needs a nonempty unbarred index: {text!r}")
        return ("mplhalf", index)
    return ("mzv", parse_index(t))


def _blocks(index: SignedIndex) -> tuple[list[str], list[int]]:
    """Non-one entries and the run lengths of unbarred ones after each."""
    tokens = [("b" if b else "") + str(e) for e, b in index.slots]
    skel: list[str] = []
    runs: list[int] = []
    lead = 0
    for t in tokens:
        if t == "1":
            if runs:
                runs[-1] += 1
            else:
                lead += 1
        else:
            skel.append(t)
            runs.append(0)
    if lead:
        skel.insert(0, "1")
        runs.insert(0, lead - 1)
    return skel, runs


def _nearest_family(skel: list[str]) -> str:
    def norm(tok: str) -> str:
        if tok.startswith("b") and tok != "b1":
            return "bs"
        if not tok.startswith("b") and tok not in ("2", "3"):
            return "s"
        return tok

    shape = [norm(t) for t in skel]
    best, score = "two-bars", -1
    for name, pattern in _SKELETONS.items():
        common = 0
        for a, b in zip(shape, pattern):
            if a != b and not (b == "s" and a in ("2", "3", "s")):
                break
            common += 1
        s = 2 * common - abs(len(shape) - len(pattern))
        if s > score:
            best, score = name, s
    return f"{best} ({FAMILIES[best]})"


@lru_cache(maxsize=None)
def _solved_mpl(index: SignedIndex) -> SymExpr | None:
    exps = index.exponents
    if exps[0] < 3 or any(e != 1 for e in exps[1:]) or len(exps) < 2:
        return None
    try:
        expr = solve_relation_61(exps[0] - 1, len(exps) - 1).expr
    except CapabilityError:
        return None
    return None if expr.residue_atoms() else expr


def resolve_residues(expr: SymExpr) -> SymExpr:
    """Replace polylog residues that the zeta(m+1,{1}_k) relation determines outright."""
    for atom in expr.residue_atoms():
        if atom.kind == "mplhalf":
            value = _solved_mpl(atom.index)
            if value is not None:
                expr = expr.substitute(atom, value)
    return reduce_basis(expr)


def reduce_target(text: str, limit: int | None = None) -> ReductionResult:
    """Route a target string to the matching reduction.

    Polylog residues fixed by the zeta(m+1,{1}_k) relation are substituted,
    so e.g. ``J(2,1)`` comes back free of residue atoms.
    """
    res = _reduce_target(text, limit)
    resolved = resolve_residues(res.expr)
    if resolved != res.expr:
        res = ReductionResult.of(res.target, resolved, res.route + " + polylog relation")
    return res


def _reduce_target(text: str, limit: int | None) -> ReductionResult:
    kind, *rest = parse_target(text)
    if kind in ("I", "J"):
        k, m = rest
        expr = closed_I(k, m, limit=limit) if kind == "I" else closed_J(k, m, limit=limit)
        return ReductionResult.of(f"{kind}({k},{m})", expr, f"closed {kind}")
    index = rest[0]
    _check_weight(index.weight, limit)
    if kind == "mplhalf":
        exps = list(index.exponents)
        value = mpl_half_value(exps)
        label = f"mplhalf:{print_index(index)}"
        if value.residue_atoms() and exps[0] >= 3 and all(e == 1 for e in exps[1:]):
            return solve_relation_61(exps[0] - 1, len(exps) - 1, limit=limit)
        if value.residue_atoms():
            raise UnsupportedTargetError(label, FAMILIES["mplhalf"])
        return ReductionResult.of(label, value, "mplhalf")
    if not index.is_admissible():
        from .numeric import DivergenceError

        raise DivergenceError(f"zeta({print_index(index)}) diverges: leading slot is an unbarred 1")
    skel, runs = _blocks(index)
    if not index.has_bars:
        if len(skel) == 1:
            return ReductionResult.of(index, adz_reduce(index.exponents[0], runs[0], limit), "adz")
    elif skel == ["b1"]:
        return reduce_one_bar(runs[0] + 1)
    elif len(skel) == 1 and skel[0].startswith("b"):
        return reduce_head_family(index.exponents[0] - 2, runs[0] + 1, limit=limit)
    elif skel == ["b1", "b1"]:
        return reduce_two_bars(runs[0] + 1, runs[1] + 1, limit=limit)
    elif skel == ["b1", "2"]:
        return reduce_interior_two(runs[0] + 1, runs[1] + 1, limit=limit)
    elif skel == ["b1", "3"] and runs[0] == runs[1]:
        return reduce_interior_three_diagonal(runs[0] + 1, limit=limit)
    elif skel == ["b1", "b1", "b1"] and runs[1] == 0:
        return reduce_triple_bar(runs[0] + 1, runs[2] + 1, limit=limit)
    elif skel == ["b1", "b1", "b1", "b1"] and runs[1] == runs[2] == 0:
        return map_quad_bar(runs[0] + 1, runs[3] + 1, limit=limit)
    raise UnsupportedTargetError(f"zeta({print_index(index)})", _nearest_family(skel))
