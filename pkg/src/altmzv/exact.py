"""Exact rational multiple harmonic (star) numbers and Stirling numbers."""

from __future__ import annotations

import itertools
import threading
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from .model import SignedIndex

__all__ = [
    "mhn",
    "mhsn",
    "mhn_brute",
    "mhsn_brute",
    "stirling1",
    "check_stirling_mhn",
    "stirling_specializations",
    "check_stirling_specializations",
    "binom_star_rhs",
    "check_binom_star",
    "HarmonicTable",
]


def _term(exponent: int, barred: bool, k: int) -> Fraction:
    sign = -1 if (barred and k % 2) else 1
    return Fraction(sign, k**exponent)


def _prefix_table(index: SignedIndex, n: int, star: bool) -> list[Fraction]:
    """Return [value(index, j) for j in 0..n] by prefix sums, innermost first.

    ``level[j]`` holds the sum restricted to k_1 <= j for the current suffix
    of the index.  Strict sums read the inner level at k-1, star sums at k.
    """
    level = [Fraction(1)] * (n + 1)  # empty index: value 1 for every n
    for exponent, barred in reversed(index.slots):
        new = [Fraction(0)] * (n + 1)
        acc = Fraction(0)
        for k in range(1, n + 1):
            inner = level[k] if star else level[k - 1]
            if inner:
                acc += _term(exponent, barred, k) * inner
            new[k] = acc
        level = new
    return level


class HarmonicTable:
    """Memo of (index, n, star) -> exact value.

    Tables are filled a whole prefix at a time, so asking for ``n`` also
    stores every smaller ``n`` for the same index.  Access is serialized by
    a lock; share one instance between threads or keep one per thread.
    """

    def __init__(self):
        self._rows: dict[tuple[SignedIndex, bool], list[Fraction]] = {}
        self._lock = threading.Lock()

    def get(self, index: SignedIndex, n: int, star: bool = False) -> Fraction:
        if n < 0:
            raise ValueError("n must be >= 0")
        key = (index, star)
        with self._lock:
            row = self._rows.get(key)
            if row is None or len(row) <= n:
                row = _prefix_table(index, max(n, 2 * len(row) if row else n), star)
                self._rows[key] = row
            return row[n]

    def row(self, index: SignedIndex, n: int, star: bool = False) -> list[Fraction]:
        self.get(index, n, star)
        return self._rows[(index, star)][: n + 1]

    def clear(self) -> None:
        with self._lock:
            self._rows.clear()


_TABLE = HarmonicTable()


def mhn(index: SignedIndex, n: int) -> Fraction:
    """Multiple harmonic number: sum over 1 <= k_m < ... < k_1 <= n.

    Barred slots contribute the sign (-1)^k_j.  Zero whenever n < depth;
    the empty index gives 1.
    """
    return _TABLE.get(index, n, star=False)


def mhsn(index: SignedIndex, n: int) -> Fraction:
    """Multiple harmonic star number: weak inequalities k_m <= ... <= k_1 <= n."""
    return _TABLE.get(index, n, star=True)


def _brute(index: SignedIndex, n: int, star: bool) -> Fraction:
    total = Fraction(0)
    depth = index.depth
    if depth == 0:
        return Fraction(1)
    if star:
        choices = itertools.combinations_with_replacement(range(1, n + 1), depth)
    else:
        choices = itertools.combinations(range(1, n + 1), depth)
    for ks in choices:
        # combinations come ascending; slot 1 takes the largest value
        term = Fraction(1)
        for (e, b), k in zip(index.slots, reversed(ks)):
            term *= _term(e, b, k)
        total += term
    return total


def mhn_brute(index: SignedIndex, n: int) -> Fraction:
    """Enumeration oracle for :func:`mhn` (small n only)."""
    return _brute(index, n, star=False)


def mhsn_brute(index: SignedIndex, n: int) -> Fraction:
    """Enumeration oracle for :func:`mhsn` (small n only)."""
    return _brute(index, n, star=True)


@lru_cache(maxsize=None)
def _stirling_row(n: int) -> tuple[int, ...]:
    if n == 0:
        return (1,)
    prev = _stirling_row(n - 1)
    row = [0] * (n + 1)
    for k in range(1, n + 1):
        a = prev[k - 1]
        b = prev[k] if k < len(prev) else 0
        row[k] = a + (n - 1) * b
    return tuple(row)


def stirling1(n: int, k: int) -> int:
    """Unsigned Stirling number of the first kind, s(n,k) = s(n-1,k-1) + (n-1)s(n-1,k)."""
    if n < 0 or k < 0:
        raise ValueError("n and k must be nonnegative")
    if k > n:
        return 0
    return _stirling_row(n)[k]


def _ones(n: int) -> SignedIndex:
    return SignedIndex.plain([1] * n)


def check_stirling_mhn(n: int, k: int) -> bool:
    """s(n,k) == (n-1)! * zeta_{n-1}({1}_{k-1}) exactly."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    return Fraction(stirling1(n, k)) == factorial(n - 1) * mhn(_ones(k - 1), n - 1)


def stirling_specializations(n: int) -> dict[int, Fraction]:
    """s(n,1..5) as polynomials in H_{n-1} and zeta_{n-1}(2..4)."""
    m = n - 1
    f = factorial(m)
    h = mhn(SignedIndex.plain([1]), m)
    z2 = mhn(SignedIndex.plain([2]), m)
    z3 = mhn(SignedIndex.plain([3]), m)
    z4 = mhn(SignedIndex.plain([4]), m)
    return {
        1: Fraction(f),
        2: f * h,
        3: f * (h**2 - z2) / 2,
        4: f * (h**3 - 3 * h * z2 + 2 * z3) / 6,
        5: f * (h**4 - 6 * z4 - 6 * h**2 * z2 + 3 * z2**2 + 8 * h * z3) / 24,
    }


def check_stirling_specializations(n: int) -> bool:
    if n < 1:
        raise ValueError("n must be >= 1")
    return all(stirling1(n, k) == v for k, v in stirling_specializations(n).items())


def binom_star_rhs(n: int, a: int) -> Fraction:
    return 2 * sum(
        (Fraction(comb(n, k), k ** (2 * a + 1) * comb(n + k, k)) for k in range(1, n + 1)),
        Fraction(0),
    )


def check_binom_star(n: int, a: int) -> bool:
    """zeta*_n({2}_a, 1) == 2 sum_k C(n,k) / (k^(2a+1) C(n+k,k)) exactly."""
    if n < 1 or a < 1:
        raise ValueError("need n, a >= 1")
    index = SignedIndex.plain([2] * a + [1])
    return mhsn(index, n) == binom_star_rhs(n, a)
