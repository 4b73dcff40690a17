"""Arbitrary-precision evaluation of basis constants and nested sums.

Every evaluator returns an :class:`~altmzv.model.ApproxReal` whose
``error_bound`` is an absolute bound.  Precisions are in bits; the CLI
converts from decimal digits.

Alternating multiple zeta values are evaluated by Hölder convolution: the
iterated-integral word of the sum is split at 1/2, which turns the slowly
converging alternating series into products of multiple polylogarithms
whose arguments have modulus at most 1/2.  Cohen-Rodriguez Villegas-Zagier
acceleration and plain direct summation are available as independent
second routes.
"""

from __future__ import annotations

import math
import os
import tempfile
import threading
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import mpmath

from .exact import HarmonicTable
from .model import ApproxReal, ConstAtom, SignedIndex, SymExpr, print_index

__all__ = [
    "GUARD_BITS",
    "digits_to_bits",
    "DivergenceError",
    "AccuracyError",
    "DomainError",
    "series_tail_bound",
    "nested_series",
    "nested_series_partial",
    "eval_mpl_at",
    "holder_terms",
    "eval_alt_outer",
    "ConstantCache",
    "default_cache",
    "eval_atom",
    "eval_expr",
]

# 15 decimal guard digits
GUARD_BITS = 50


def digits_to_bits(digits: int) -> int:
    return int(math.ceil(digits * math.log2(10)))


def _mpf(q) -> mpmath.mpf:
    if isinstance(q, Fraction):
        return mpmath.mpf(q.numerator) / q.denominator
    return mpmath.mpf(q)


def _tol_bits(tol) -> int:
    tol = mpmath.mpf(tol)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    return max(8, int(-mpmath.floor(mpmath.log(tol, 2))))


class DivergenceError(ValueError):
    """The requested infinite sum does not converge."""


class DomainError(ValueError):
    """Argument outside the supported region."""


class AccuracyError(RuntimeError):
    """The requested tolerance could not be certified within the budget."""

    def __init__(self, message: str, best_bound):
        super().__init__(message)
        self.best_bound = best_bound


# --------------------------------------------------------------------------
# Geometrically convergent nested series
# --------------------------------------------------------------------------


def series_tail_bound(r, depth: int, n: int):
    """Bound on sum_{p > n} r^p (1 + ln p)^(depth-1).

    Inner sums of a depth-d series are at most H_p^(d-1) <= (1 + ln p)^(d-1),
    and consecutive ratios of the summand decrease in p, so the tail is
    dominated by a geometric series with the first ratio.
    """
    r = _mpf(r)
    d = depth - 1
    f = lambda p: (1 + mpmath.log(p)) ** d  # noqa: E731
    q = r * f(n + 2) / f(n + 1)
    if q >= 1:
        return mpmath.inf
    return r ** (n + 1) * f(n + 1) / (1 - q)


def nested_series_partial(exponents: Sequence[int], zs: Sequence, n_terms: int):
    """Partial sum of sum_{p_1 > ... > p_k >= 1} prod z_j^(p_j - p_{j+1}) / p_j^(s_j).

    ``zs`` are the cumulative arguments (p_{k+1} = 0).  Only factors of
    modulus <= max|z_j| are ever formed, so nothing grows.  Runs at the
    ambient mpmath precision.
    """
    k = len(exponents)
    if k == 0:
        return mpmath.mpf(1)
    zs = [_mpf(z) for z in zs]
    inv_pow = [[mpmath.mpf(1)] * (n_terms + 1) for _ in range(k)]
    for j, s in enumerate(exponents):
        row = inv_pow[j]
        for p in range(1, n_terms + 1):
            row[p] = mpmath.mpf(p) ** (-s)
    # innermost level: T_k(p) = z_k^p / p^s_k
    t = [mpmath.mpf(0)] * (n_terms + 1)
    zp = mpmath.mpf(1)
    for p in range(1, n_terms + 1):
        zp *= zs[-1]
        t[p] = zp * inv_pow[-1][p]
    for j in range(k - 2, -1, -1):
        z = zs[j]
        new = [mpmath.mpf(0)] * (n_terms + 1)
        w = mpmath.mpf(0)
        for p in range(1, n_terms + 1):
            w = z * (w + t[p - 1])
            new[p] = w * inv_pow[j][p]
        t = new
    return mpmath.fsum(t[1:])


def nested_series(exponents: Sequence[int], zs: Sequence, prec: int) -> ApproxReal:
    """Evaluate the nested series to absolute error <= 2^-prec."""
    k = len(exponents)
    if k == 0:
        return ApproxReal.exact(1, prec)
    r = max(abs(Fraction(z)) for z in zs)
    if r > Fraction(1, 2):
        raise DomainError(f"argument modulus {r} exceeds 1/2")
    if r == 0:
        return ApproxReal.exact(0, prec)
    target = mpmath.ldexp(1, -prec - 1)
    n = max(10 * k, 8)
    while series_tail_bound(r, k, n) > target:
        n = int(n * 1.25) + 1
    wp = prec + 20 + int(math.log2(n * (k + 1)) + 1)
    with mpmath.workprec(wp):
        zs_mp = [_mpf(Fraction(z)) for z in zs]
        value = nested_series_partial(exponents, zs_mp, n)
        err = series_tail_bound(r, k, n) + n * (k + 1) * mpmath.ldexp(1, -wp + 4)
    return ApproxReal(value, prec, err)


def eval_mpl_at(x, index: SignedIndex, prec: int) -> ApproxReal:
    """zeta(s_1,...,s_m; x) = sum_{k_1 > ... > k_m} x^k_1 / prod k_j^s_j for |x| <= 1/2."""
    if index.has_bars:
        raise DomainError("barred slots are not supported by eval_mpl_at")
    x = Fraction(x)
    if abs(x) > Fraction(1, 2):
        raise DomainError(f"|x| = {abs(x)} > 1/2 is outside the supported region")
    if index.depth == 0:
        return ApproxReal.exact(1, prec)
    return nested_series(index.exponents, [x] * index.depth, prec)


# --------------------------------------------------------------------------
# Hölder convolution for alternating sums
# --------------------------------------------------------------------------


def _word(index: SignedIndex) -> list[int]:
    """Integral word of zeta(index) = (-1)^depth G(word; 1); letters in {0, 1, -1}."""
    word: list[int] = []
    sign = 1
    for exponent, barred in index.slots:
        if barred:
            sign = -sign
        word.extend([0] * (exponent - 1))
        word.append(sign)
    return word


def _g_to_series(word: Sequence[int], y: Fraction):
    """G(word; y) = sign * series(exponents, zs); word must not end in 0."""
    exponents, zs = [], []
    run = 0
    for a in word:
        if a == 0:
            run += 1
        else:
            exponents.append(run + 1)
            zs.append(y / a)
            run = 0
    if run:
        raise ValueError("word ends in 0")
    return (-1) ** len(exponents), exponents, zs


def holder_terms(index: SignedIndex):
    """Split zeta(index) into signed products of two series at y = 1/2.

    Returns a list of ``(sign, (exps_left, zs_left), (exps_right, zs_right))``
    whose signed sum of products equals the alternating multiple zeta value.
    """
    if not index.is_admissible():
        raise DivergenceError(f"zeta({print_index(index)}) diverges")
    word = _word(index)
    n = len(word)
    half = Fraction(1, 2)
    out = []
    overall = (-1) ** index.depth
    for j in range(n + 1):
        left = [1 - a for a in reversed(word[:j])]
        right = word[j:]
        s1, e1, z1 = _g_to_series(left, half)
        s2, e2, z2 = _g_to_series(right, half)
        out.append((overall * (-1) ** j * s1 * s2, (e1, z1), (e2, z2)))
    return out


def _holder(index: SignedIndex, prec: int) -> ApproxReal:
    terms = holder_terms(index)
    inner = prec + 4 + len(terms).bit_length()
    total = ApproxReal.exact(0, inner + 10)
    for sign, (e1, z1), (e2, z2) in terms:
        a = nested_series(e1, z1, inner)
        b = nested_series(e2, z2, inner)
        p = a * b
        total = total + (p if sign > 0 else -p)
    return ApproxReal(total.value, prec, total.error_bound)


# --------------------------------------------------------------------------
# Second routes: CRVZ acceleration and direct summation
# --------------------------------------------------------------------------


def _crvz_sum(a: Sequence, n: int):
    """Chebyshev-accelerated sum_{k >= 0} (-1)^k a_k from a_0..a_{n-1}."""
    d = (3 + mpmath.sqrt(8)) ** n
    d = (d + 1 / d) / 2
    b = mpmath.mpf(-1)
    c = -d
    s = mpmath.mpf(0)
    for k in range(n):
        c = b - c
        s += c * a[k]
        b = (k + n) * (k - n) * b / ((k + mpmath.mpf(1) / 2) * (k + 1))
    return s / d


_CRVZ_TABLE = HarmonicTable()


def _crvz(index: SignedIndex, tol, max_order: int = 1024) -> ApproxReal:
    if not index.slots or not index.slots[0][1]:
        raise ValueError("CRVZ route needs a barred first slot")
    if any(b for _, b in index.slots[1:]):
        raise ValueError("CRVZ route needs unbarred inner slots")
    s1 = index.slots[0][0]
    inner = SignedIndex(index.slots[1:])
    bits = _tol_bits(tol) + 20
    order = 16
    prev = None
    diff = mpmath.inf
    with mpmath.workprec(bits + 2 * max_order):
        while order <= max_order:
            row = _CRVZ_TABLE.row(inner, order, star=False)
            a = [
                _mpf(row[k]) / mpmath.mpf(k + 1) ** s1
                for k in range(order)
            ]
            cur = -_crvz_sum(a, order)
            if prev is not None:
                diff = abs(cur - prev)
                if diff <= mpmath.mpf(tol) / 4:
                    return ApproxReal(cur, bits, diff)
            prev = cur
            order *= 2
    raise AccuracyError(f"CRVZ did not certify zeta({print_index(index)})", best_bound=diff)


def _direct(index: SignedIndex, tol, max_terms: int = 200_000) -> ApproxReal:
    if not index.slots or index.slots[0][1] or index.slots[0][0] < 2:
        raise ValueError("direct route needs an unbarred first slot with exponent >= 2")
    s1 = index.slots[0][0]
    d = index.depth
    tol = mpmath.mpf(tol)

    def tail(n):
        return (1 + mpmath.log(n)) ** (d - 1) * mpmath.mpf(n) ** (1 - s1) / (s1 - 1)

    n = 16
    while tail(n) > tol / 2:
        n *= 2
        if n > max_terms:
            raise AccuracyError(
                f"direct summation of zeta({print_index(index)}) needs more than {max_terms} terms",
                best_bound=tail(max_terms),
            )
    bits = _tol_bits(tol) + 20
    with mpmath.workprec(bits):
        level = [mpmath.mpf(1)] * (n + 1)
        for exponent, barred in reversed(index.slots):
            new = [mpmath.mpf(0)] * (n + 1)
            acc = mpmath.mpf(0)
            for k in range(1, n + 1):
                t = level[k - 1] / mpmath.mpf(k) ** exponent
                acc += -t if (barred and k % 2) else t
                new[k] = acc
            level = new
        return ApproxReal(level[n], bits, tail(n) + n * d * mpmath.ldexp(1, -bits + 4))


def eval_alt_outer(index: SignedIndex, tol=mpmath.mpf("1e-30"), method: str = "holder") -> ApproxReal:
    """Alternating multiple zeta value with certified absolute error <= tol.

    ``method`` is ``"holder"`` (default, any admissible index),
    ``"crvz"`` (barred first slot, unbarred inner slots) or ``"direct"``
    (unbarred first slot of exponent >= 2; practical only for loose tol).
    """
    if not index.is_admissible():
        raise DivergenceError(f"zeta({print_index(index)}) diverges: leading slot is an unbarred 1")
    if index.depth == 0:
        return ApproxReal.exact(1, _tol_bits(tol))
    if method == "holder":
        return _holder(index, _tol_bits(tol) + 2)
    if method == "crvz":
        return _crvz(index, tol)
    if method == "direct":
        return _direct(index, tol)
    raise ValueError(f"unknown method {method!r}")


# --------------------------------------------------------------------------
# Constant cache
# --------------------------------------------------------------------------


class ConstantCache:
    """Decimal values of atoms keyed by ``atom.key``.

    A value stored at ``p`` bits answers requests at up to ``p - guard``
    bits.  The optional backing file is a sorted tab-separated table,
    rewritten atomically by :meth:`save`.
    """

    def __init__(self, path: str | os.PathLike | None = None, guard_bits: int = GUARD_BITS):
        self.path = Path(path) if path else None
        self.guard_bits = guard_bits
        self._values: dict[str, tuple[str, int]] = {}
        self._lock = threading.Lock()
        self._dirty = False
        self.hits = 0
        self.derivations = 0
        if self.path and self.path.exists():
            self.load()

    def load(self) -> None:
        with self._lock:
            for line in self.path.read_text(encoding="ascii").splitlines():
                if not line.strip():
                    continue
                key, bits, value = line.split("\t")
                self._values[key] = (value, int(bits))

    def save(self) -> None:
        if not self.path or not self._dirty:
            return
        with self._lock:
            lines = [f"{k}\t{b}\t{v}\n" for k, (v, b) in sorted(self._values.items())]
            self.path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=self.path.parent, prefix=".cache-", suffix=".tmp")
            with os.fdopen(fd, "w", encoding="ascii") as fh:
                fh.writelines(lines)
            os.replace(tmp, self.path)
            self._dirty = False

    def lookup(self, atom: ConstAtom, prec: int):
        with self._lock:
            rec = self._values.get(atom.key)
        if rec is None or rec[1] < prec + self.guard_bits:
            return None
        self.hits += 1
        return rec

    def store(self, atom: ConstAtom, value, bits: int) -> None:
        digits = int(math.ceil(bits * math.log10(2))) + 2
        text = mpmath.nstr(value, digits, strip_zeros=False)
        with self._lock:
            old = self._values.get(atom.key)
            if old is None or old[1] < bits:
                self._values[atom.key] = (text, bits)
                self._dirty = True

    def entries(self) -> dict[str, tuple[str, int]]:
        with self._lock:
            return dict(self._values)

    def merge(self, entries: dict[str, tuple[str, int]]) -> None:
        with self._lock:
            for key, (value, bits) in entries.items():
                old = self._values.get(key)
                if old is None or old[1] < bits:
                    self._values[key] = (value, bits)
                    self._dirty = True

    def stats(self) -> dict[str, int]:
        return {"hits": self.hits, "derivations": self.derivations, "entries": len(self._values)}


_DEFAULT_CACHE = ConstantCache()


def default_cache() -> ConstantCache:
    return _DEFAULT_CACHE


MzvResolver = Callable[[SignedIndex, int], ApproxReal]


def _derive_atom(atom: ConstAtom, wp: int, mzv_resolver: MzvResolver | None) -> ApproxReal:
    if atom.kind == "ln2":
        with mpmath.workprec(wp + 10):
            return ApproxReal(+mpmath.ln2, wp, mpmath.ldexp(1, -wp - 8))
    if atom.kind == "zeta":
        with mpmath.workprec(wp + 10):
            return ApproxReal(mpmath.zeta(atom.params[0]), wp, mpmath.ldexp(1, -wp - 8))
    if atom.kind == "lihalf":
        return nested_series([atom.params[0]], [Fraction(1, 2)], wp)
    if atom.kind == "mplhalf":
        return eval_mpl_at(Fraction(1, 2), atom.params[0], wp)
    index = atom.params[0]
    if not index.is_admissible():
        raise DivergenceError(f"zeta({print_index(index)}) diverges")
    if mzv_resolver is not None:
        return mzv_resolver(index, wp)
    return eval_alt_outer(index, tol=mpmath.ldexp(1, -wp))


def eval_atom(
    atom: ConstAtom,
    prec: int,
    cache: ConstantCache | None = None,
    mzv_resolver: MzvResolver | None = None,
) -> ApproxReal:
    """Value of ``atom`` with error_bound <= 2^-prec."""
    cache = cache if cache is not None else _DEFAULT_CACHE
    rec = cache.lookup(atom, prec)
    if rec is not None:
        text, bits = rec
        with mpmath.workprec(bits):
            v = mpmath.mpf(text)
        return ApproxReal(v, prec, mpmath.ldexp(1, -bits + 2))
    wp = prec + cache.guard_bits
    value = _derive_atom(atom, wp, mzv_resolver)
    cache.derivations += 1
    cache.store(atom, value.value, wp)
    return ApproxReal(value.value, prec, value.error_bound)


def eval_expr(
    expr: SymExpr,
    prec: int,
    cache: ConstantCache | None = None,
    mzv_resolver: MzvResolver | None = None,
) -> ApproxReal:
    """Numeric value of a symbolic expression with error_bound <= 2^-prec."""
    items = expr.canonical().items()
    if not items:
        return ApproxReal.exact(0, prec)
    biggest = max(abs(c) for _, c in items)
    max_pow = max((sum(p for _, p in m.factors) for m, _ in items), default=1)
    extra = 8 + len(items).bit_length() + max(0, math.ceil(math.log2(float(biggest) + 1))) + 2 * max_pow
    wp = prec + extra
    values: dict[ConstAtom, ApproxReal] = {}
    total = ApproxReal.exact(0, wp)
    for m, c in items:
        term = ApproxReal.exact(1, wp)
        for a, p in m.factors:
            if a not in values:
                values[a] = eval_atom(a, wp, cache=cache, mzv_resolver=mzv_resolver)
            term = term * values[a] ** p
        total = total + term.scale(c)
    return ApproxReal(total.value, prec, total.error_bound)
