"""Domain types shared by every other module.

A :class:`SignedIndex` is the argument of every nested sum in the package.
Its leftmost slot binds the outermost (largest) summation variable, so
``parse_index("b1,2")`` denotes

    sum_{k1 > k2 >= 1} (-1)^k1 / (k1 * k2^2).

Symbolic results are :class:`SymExpr` values: rational linear combinations of
:class:`Monomial` products of :class:`ConstAtom` constants.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

import mpmath

__all__ = [
    "IndexParseError",
    "SignedIndex",
    "parse_index",
    "print_index",
    "ConstAtom",
    "Monomial",
    "SymExpr",
    "canonicalize",
    "ApproxReal",
    "Scalar",
]

Scalar = Union[int, Fraction]


class IndexParseError(ValueError):
    """Raised for text that does not match the index grammar."""

    def __init__(self, message: str, token: str):
        super().__init__(message)
        self.token = token


# --------------------------------------------------------------------------
# SignedIndex
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SignedIndex:
    slots: tuple[tuple[int, bool], ...] = ()

    def __post_init__(self):
        slots = tuple((int(e), bool(b)) for e, b in self.slots)
        for e, _ in slots:
            if e < 1:
                raise ValueError(f"exponent must be >= 1, got {e}")
        object.__setattr__(self, "slots", slots)

    @classmethod
    def of(cls, *entries: int) -> "SignedIndex":
        """Build from signed integers: ``SignedIndex.of(-1, 2)`` is ``b1,2``."""
        return cls(tuple((abs(e), e < 0) for e in entries))

    @classmethod
    def plain(cls, exponents: Iterable[int]) -> "SignedIndex":
        return cls(tuple((e, False) for e in exponents))

    @property
    def depth(self) -> int:
        return len(self.slots)

    @property
    def weight(self) -> int:
        return sum(e for e, _ in self.slots)

    @property
    def exponents(self) -> tuple[int, ...]:
        return tuple(e for e, _ in self.slots)

    @property
    def bars(self) -> tuple[bool, ...]:
        return tuple(b for _, b in self.slots)

    @property
    def has_bars(self) -> bool:
        return any(self.bars)

    def is_admissible(self) -> bool:
        """True when the infinite nested sum converges."""
        if not self.slots:
            return True
        e, b = self.slots[0]
        return e >= 2 or b

    def __add__(self, other: "SignedIndex") -> "SignedIndex":
        return SignedIndex(self.slots + other.slots)

    def __len__(self) -> int:
        return len(self.slots)

    def __iter__(self) -> Iterator[tuple[int, bool]]:
        return iter(self.slots)

    def __str__(self) -> str:
        return print_index(self)

    def sort_key(self) -> tuple:
        return (len(self.slots), self.slots)


_ENTRY_RE = re.compile(r"^(b?)([0-9]+)$")


def parse_index(text: str) -> SignedIndex:
    """Parse ``"b1,1,2"`` style text.

    Entries are separated by commas; a leading ``b`` marks a barred
    (sign-alternating) slot. Whitespace around entries is ignored and blank
    text yields the empty index.
    """
    if not text.strip():
        return SignedIndex()
    slots = []
    for raw in text.split(","):
        token = raw.strip()
        if not token:
            raise IndexParseError(f"empty entry in index {text!r}", token=raw)
        m = _ENTRY_RE.match(token)
        if m is None:
            raise IndexParseError(f"malformed index entry {token!r}", token=token)
        exponent = int(m.group(2))
        if exponent == 0:
            raise IndexParseError(f"zero exponent in entry {token!r}", token=token)
        slots.append((exponent, bool(m.group(1))))
    return SignedIndex(tuple(slots))


def print_index(index: SignedIndex) -> str:
    return ",".join(("b" if b else "") + str(e) for e, b in index.slots)


# --------------------------------------------------------------------------
# Constant atoms
# --------------------------------------------------------------------------

_KIND_RANK = {"ln2": 0, "zeta": 1, "lihalf": 2, "mplhalf": 3, "mzv": 4}


@dataclass(frozen=True)
class ConstAtom:
    """One basis constant.

    The classmethod constructors canonicalize (``li_half(1)`` is ``ln2``);
    the bare dataclass constructor does not, which :func:`canonicalize`
    repairs.
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in _KIND_RANK:
            raise ValueError(f"unknown atom kind {self.kind!r}")

    @classmethod
    def ln2(cls) -> "ConstAtom":
        return cls("ln2")

    @classmethod
    def zeta(cls, n: int) -> "ConstAtom":
        if n < 2:
            raise ValueError(f"Zeta(n) requires n >= 2, got {n}")
        return cls("zeta", (int(n),))

    @classmethod
    def li_half(cls, n: int) -> "ConstAtom":
        if n < 1:
            raise ValueError(f"LiHalf(n) requires n >= 1, got {n}")
        if n == 1:
            return cls.ln2()
        return cls("lihalf", (int(n),))

    @classmethod
    def mpl_half(cls, index: SignedIndex) -> "ConstAtom":
        if index.depth == 0 or index.has_bars:
            raise ValueError(f"MplHalf needs a nonempty unbarred index, got {index}")
        if index.depth == 1:
            return cls.li_half(index.exponents[0])
        return cls("mplhalf", (index,))

    @classmethod
    def mzv(cls, index: SignedIndex) -> "ConstAtom":
        if index.depth == 0 or not index.is_admissible():
            raise ValueError(f"Mzv atom needs an admissible index, got {index}")
        return cls("mzv", (index,))

    @property
    def index(self) -> SignedIndex | None:
        if self.kind in ("mplhalf", "mzv"):
            return self.params[0]
        return None

    @property
    def weight(self) -> int:
        if self.kind == "ln2":
            return 1
        if self.kind in ("zeta", "lihalf"):
            return self.params[0]
        return self.params[0].weight

    @property
    def is_residue(self) -> bool:
        return self.kind in ("mplhalf", "mzv")

    def sort_key(self) -> tuple:
        if self.kind in ("mplhalf", "mzv"):
            return (_KIND_RANK[self.kind], self.params[0].sort_key())
        return (_KIND_RANK[self.kind], self.params)

    def __lt__(self, other: "ConstAtom") -> bool:
        return self.sort_key() < other.sort_key()

    @property
    def key(self) -> str:
        """Stable text key, e.g. ``zeta:3``, ``ln2``, ``mplhalf:2,1``."""
        if self.kind == "ln2":
            return "ln2"
        if self.kind in ("zeta", "lihalf"):
            return f"{self.kind}:{self.params[0]}"
        return f"{self.kind}:{print_index(self.params[0])}"

    @classmethod
    def from_key(cls, key: str) -> "ConstAtom":
        kind, _, rest = key.partition(":")
        if kind == "ln2" and not rest:
            return cls.ln2()
        if kind == "zeta":
            return cls.zeta(int(rest))
        if kind == "lihalf":
            return cls.li_half(int(rest))
        if kind == "mplhalf":
            return cls.mpl_half(parse_index(rest))
        if kind == "mzv":
            return cls.mzv(parse_index(rest))
        raise ValueError(f"bad atom key {key!r}")

    def pretty(self) -> str:
        if self.kind == "ln2":
            return "ln(2)"
        if self.kind == "zeta":
            return f"zeta({self.params[0]})"
        if self.kind == "lihalf":
            return f"Li{self.params[0]}(1/2)"
        if self.kind == "mplhalf":
            return f"zeta({print_index(self.params[0])};1/2)"
        return f"zeta({print_index(self.params[0])})"

    def __str__(self) -> str:
        return self.pretty()

    def to_json(self) -> dict:
        if self.kind == "ln2":
            params: list = []
        elif self.kind in ("zeta", "lihalf"):
            params = [self.params[0]]
        else:
            params = [print_index(self.params[0])]
        return {"kind": self.kind, "params": params}


def normalize_atom(atom: ConstAtom) -> ConstAtom:
    if atom.kind == "lihalf" and atom.params[0] == 1:
        return ConstAtom.ln2()
    if atom.kind == "mplhalf" and atom.params[0].depth == 1:
        return ConstAtom.li_half(atom.params[0].exponents[0])
    return atom


# --------------------------------------------------------------------------
# Monomials and expressions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Monomial:
    """Sorted product of atom powers; the empty monomial is 1."""

    factors: tuple[tuple[ConstAtom, int], ...] = ()

    @classmethod
    def build(cls, pairs: Iterable[tuple[ConstAtom, int]]) -> "Monomial":
        powers: dict[ConstAtom, int] = {}
        for atom, p in pairs:
            atom = normalize_atom(atom)
            powers[atom] = powers.get(atom, 0) + int(p)
        items = sorted(((a, p) for a, p in powers.items() if p != 0), key=lambda t: t[0].sort_key())
        for a, p in items:
            if p < 0:
                raise ValueError(f"negative exponent for {a}")
        return cls(tuple(items))

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial.build(self.factors + other.factors)

    @property
    def weight(self) -> int:
        return sum(a.weight * p for a, p in self.factors)

    @property
    def atoms(self) -> tuple[ConstAtom, ...]:
        return tuple(a for a, _ in self.factors)

    def sort_key(self) -> tuple:
        return tuple((a.sort_key(), p) for a, p in self.factors)

    def pretty(self) -> str:
        parts = []
        for a, p in self.factors:
            parts.append(a.pretty() if p == 1 else f"{a.pretty()}^{p}")
        return "*".join(parts)


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"coefficients must be exact rationals, got {type(c).__name__}")


class SymExpr:
    """Rational linear combination of monomials.

    Instances are treated as immutable.  Arithmetic always returns canonical
    expressions; the raw constructor keeps whatever it is given so that
    :func:`canonicalize` has something to do.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None):
        self._terms: dict[Monomial, Fraction] = {
            m: _as_fraction(c) for m, c in (terms or {}).items()
        }
        self._hash = None

    # constructors -----------------------------------------------------
    @classmethod
    def const(cls, c: Scalar) -> "SymExpr":
        return cls({Monomial(): c}).canonical()

    @classmethod
    def atom(cls, atom: ConstAtom, power: int = 1) -> "SymExpr":
        return cls({Monomial.build([(atom, power)]): 1}).canonical()

    @classmethod
    def ln2(cls, power: int = 1) -> "SymExpr":
        return cls.atom(ConstAtom.ln2(), power)

    @classmethod
    def zeta(cls, n: int) -> "SymExpr":
        return cls.atom(ConstAtom.zeta(n))

    @classmethod
    def li_half(cls, n: int) -> "SymExpr":
        return cls.atom(ConstAtom.li_half(n))

    @classmethod
    def mpl_half(cls, index: SignedIndex) -> "SymExpr":
        return cls.atom(ConstAtom.mpl_half(index))

    @classmethod
    def mzv(cls, index: SignedIndex) -> "SymExpr":
        return cls.atom(ConstAtom.mzv(index))

    @classmethod
    def sum(cls, exprs: Iterable["SymExpr"]) -> "SymExpr":
        acc: dict[Monomial, Fraction] = {}
        for e in exprs:
            for m, c in e._terms.items():
                acc[m] = acc.get(m, Fraction(0)) + c
        return cls(acc).canonical()

    # access -----------------------------------------------------------
    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items(), key=lambda t: t[0].sort_key())

    def is_zero(self) -> bool:
        return not self.canonical()._terms

    def atoms(self) -> set[ConstAtom]:
        return {a for m in self._terms for a in m.atoms}

    def residue_atoms(self) -> list[ConstAtom]:
        return sorted((a for a in self.atoms() if a.is_residue), key=lambda a: a.sort_key())

    def coefficient(self, monomial: Monomial) -> Fraction:
        return self._terms.get(monomial, Fraction(0))

    def weights(self) -> set[int]:
        return {m.weight for m in self.canonical()._terms}

    def is_homogeneous(self, weight: int | None = None) -> bool:
        w = self.weights()
        if weight is None:
            return len(w) <= 1
        return w <= {weight}

    # canonical form -----------------------------------------------------
    def canonical(self) -> "SymExpr":
        acc: dict[Monomial, Fraction] = {}
        for m, c in self._terms.items():
            m = Monomial.build(m.factors)
            acc[m] = acc.get(m, Fraction(0)) + c
        out = SymExpr.__new__(SymExpr)
        out._terms = {m: c for m, c in acc.items() if c != 0}
        out._hash = None
        return out

    # arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "SymExpr":
        if isinstance(other, SymExpr):
            return other
        if isinstance(other, (int, Fraction)):
            return SymExpr.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return SymExpr.sum([self, other])

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return SymExpr.sum([self, other.scale(-1)])

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def scale(self, c: Scalar) -> "SymExpr":
        c = _as_fraction(c)
        return SymExpr({m: v * c for m, v in self._terms.items()}).canonical()

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, SymExpr):
            return NotImplemented
        acc: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = m1 * m2
                acc[m] = acc.get(m, Fraction(0)) + c1 * c2
        return SymExpr(acc).canonical()

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / _as_fraction(other))
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers are supported")
        out = SymExpr.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def substitute(self, atom: ConstAtom, value: "SymExpr") -> "SymExpr":
        """Replace every occurrence of ``atom`` by ``value``."""
        parts = []
        for m, c in self._terms.items():
            term = SymExpr.const(c)
            for a, p in m.factors:
                term = term * (value ** p if a == atom else SymExpr.atom(a, p))
            parts.append(term)
        return SymExpr.sum(parts)

    # comparison ---------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = SymExpr.const(other)
        if not isinstance(other, SymExpr):
            return NotImplemented
        return self.canonical()._terms == other.canonical()._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.canonical()._terms.items()))
        return self._hash

    # rendering ----------------------------------------------------------
    def pretty(self) -> str:
        items = self.canonical().items()
        if not items:
            return "0"
        out = []
        for i, (m, c) in enumerate(items):
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if not m.factors:
                body = str(a)
            elif a == 1:
                body = m.pretty()
            else:
                body = f"{a}*{m.pretty()}"
            if i == 0:
                out.append(("-" if c < 0 else "") + body)
            else:
                out.append(f" {sign} {body}")
        return "".join(out)

    def __str__(self) -> str:
        return self.pretty()

    def __repr__(self) -> str:
        return f"SymExpr({self.pretty()})"

    def to_json(self) -> list[dict]:
        out = []
        for m, c in self.canonical().items():
            out.append(
                {
                    "coeff": f"{c.numerator}/{c.denominator}",
                    "atoms": [dict(a.to_json(), pow=p) for a, p in m.factors],
                }
            )
        return out

    @classmethod
    def from_json(cls, data: list[dict]) -> "SymExpr":
        terms: dict[Monomial, Fraction] = {}
        for rec in data:
            pairs = []
            for a in rec["atoms"]:
                kind, params = a["kind"], a["params"]
                key = kind if kind == "ln2" else f"{kind}:{params[0]}"
                pairs.append((ConstAtom.from_key(key), int(a["pow"])))
            m = Monomial.build(pairs)
            terms[m] = terms.get(m, Fraction(0)) + Fraction(rec["coeff"])
        return cls(terms).canonical()


def canonicalize(expr: SymExpr) -> SymExpr:
    """Drop zero coefficients and normalize atoms; idempotent."""
    return expr.canonical()


# --------------------------------------------------------------------------
# ApproxReal
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ApproxReal:
    """A real number known to within an absolute ``error_bound``.

    Arithmetic propagates worst-case bounds and adds one rounding unit of the
    result at the working precision of the operands.
    """

    value: mpmath.mpf
    precision_bits: int
    error_bound: mpmath.mpf = field(default_factory=lambda: mpmath.mpf(0))

    @classmethod
    def exact(cls, value, precision_bits: int) -> "ApproxReal":
        with mpmath.workprec(precision_bits):
            v = mpmath.mpf(value)
        return cls(v, precision_bits, mpmath.mpf(0))

    def _round(self, v: mpmath.mpf, prec: int) -> mpmath.mpf:
        return abs(v) * mpmath.ldexp(1, -prec + 1)

    def __add__(self, other: "ApproxReal") -> "ApproxReal":
        prec = min(self.precision_bits, other.precision_bits)
        with mpmath.workprec(prec):
            v = self.value + other.value
            err = self.error_bound + other.error_bound + self._round(v, prec)
        return ApproxReal(v, prec, err)

    def __neg__(self) -> "ApproxReal":
        # unary minus on an mpf rounds to the ambient precision
        with mpmath.workprec(max(self.precision_bits, self.value.context.prec)):
            v = -self.value
        return ApproxReal(v, self.precision_bits, self.error_bound)

    def __sub__(self, other: "ApproxReal") -> "ApproxReal":
        return self + (-other)

    def __mul__(self, other: "ApproxReal") -> "ApproxReal":
        prec = min(self.precision_bits, other.precision_bits)
        with mpmath.workprec(prec):
            v = self.value * other.value
            err = (
                abs(self.value) * other.error_bound
                + abs(other.value) * self.error_bound
                + self.error_bound * other.error_bound
                + self._round(v, prec)
            )
        return ApproxReal(v, prec, err)

    def scale(self, c: Fraction) -> "ApproxReal":
        c = _as_fraction(c)
        with mpmath.workprec(self.precision_bits):
            f = mpmath.mpf(c.numerator) / c.denominator
            v = self.value * f
            err = self.error_bound * abs(f) + self._round(v, self.precision_bits)
        return ApproxReal(v, self.precision_bits, err)

    def __pow__(self, n: int) -> "ApproxReal":
        out = ApproxReal.exact(1, self.precision_bits)
        for _ in range(n):
            out = out * self
        return out

    def to_decimal(self, digits: int) -> str:
        return mpmath.nstr(self.value, digits, strip_zeros=False, min_fixed=-mpmath.inf, max_fixed=mpmath.inf)

    def __float__(self) -> float:
        return float(self.value)
