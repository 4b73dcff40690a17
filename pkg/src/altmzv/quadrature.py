"""Tanh-sinh quadrature for one-dimensional log-power integrals.

The integrands here have logarithmic singularities at the endpoints, so they
receive the distance to each endpoint computed from the transformed variable
rather than by subtracting nearly equal numbers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import mpmath

from .model import ApproxReal
from .numeric import GUARD_BITS, AccuracyError

__all__ = [
    "QuadResult",
    "tanh_sinh",
    "quad_I",
    "quad_J",
    "quad_logpow",
    "quad_T",
    "SEGMENTS",
]

MAX_LEVEL = 14
MIN_LEVEL = 3

SEGMENTS = {
    "full": (Fraction(0), Fraction(1)),
    "lower-half": (Fraction(0), Fraction(1, 2)),
    "upper-half": (Fraction(1, 2), Fraction(1)),
}


@dataclass(frozen=True)
class QuadResult:
    value: ApproxReal
    levels_used: int
    converged: bool
    history: tuple = field(default=(), compare=False, repr=False)


@lru_cache(maxsize=64)
def _nodes(level: int, wp: int) -> tuple:
    """Abscissa data on [-1, 1] for the points first used at ``level``.

    Each entry is ``(e2u, weight)`` where u = pi/2 sinh(t), so the node is
    tanh(u) and its distances to -1 and 1 are 2/(1 + e^-2u) and 2/(1 + e^2u).
    Level 0 has step 1 and includes t = 0; deeper levels add the odd
    multiples of 2^-level.
    """
    with mpmath.workprec(wp):
        umax = (wp + 30) * mpmath.ln2 / 2
        tmax = mpmath.asinh(2 * umax / mpmath.pi)
        h = mpmath.ldexp(1, -level)
        out = []
        if level == 0:
            ks = range(0, int(tmax) + 2)
        else:
            ks = range(1, int(tmax * 2**level) + 2, 2)
        half_pi = mpmath.pi / 2
        for k in ks:
            t = k * h
            if t > tmax:
                break
            u = half_pi * mpmath.sinh(t)
            w = half_pi * mpmath.cosh(t) / mpmath.cosh(u) ** 2
            e2u = mpmath.exp(2 * u)
            out.append((e2u, w))
            if k != 0:
                out.append((1 / e2u, w))
        return tuple(out)


Integrand = Callable[[mpmath.mpf, mpmath.mpf, mpmath.mpf], mpmath.mpf]


def tanh_sinh(f: Integrand, a, b, prec: int, max_level: int = MAX_LEVEL) -> QuadResult:
    """Integrate ``f(x, x - a, b - x)`` over [a, b].

    Halves the step each level, reusing earlier nodes, and stops when two
    successive levels differ by less than 2^-(prec+8).  The summation order
    is fixed, so results are deterministic.
    """
    wp = prec + GUARD_BITS
    with mpmath.workprec(wp):
        a = mpmath.mpf(a.numerator) / a.denominator if isinstance(a, Fraction) else mpmath.mpf(a)
        b = mpmath.mpf(b.numerator) / b.denominator if isinstance(b, Fraction) else mpmath.mpf(b)
        length = b - a
        half = length / 2
        raw = mpmath.mpf(0)
        history = []
        prev = None
        target = mpmath.ldexp(1, -prec - 8)
        for level in range(0, max_level + 1):
            terms = []
            for e2u, w in _nodes(level, wp):
                xb = length / (1 + e2u)
                xa = length / (1 + 1 / e2u)
                x = a + xa if xa <= xb else b - xb
                terms.append(w * f(x, xa, xb))
            raw += mpmath.fsum(terms)
            est = raw * half * mpmath.ldexp(1, -level)
            history.append(est)
            if prev is not None and level >= MIN_LEVEL:
                diff = abs(est - prev)
                if diff < target:
                    err = diff + abs(est) * mpmath.ldexp(1, -wp + 8)
                    return QuadResult(ApproxReal(est, prec, err), level, True, tuple(history))
            prev = est
    diff = abs(history[-1] - history[-2])
    return QuadResult(ApproxReal(history[-1], prec, diff), max_level, False, tuple(history))


def _checked(res: QuadResult, what: str) -> QuadResult:
    if not res.converged:
        raise AccuracyError(f"{what}: tanh-sinh did not converge in {res.levels_used} levels", res.value.error_bound)
    return res


def quad_I(k: int, m: int, prec: int) -> QuadResult:
    """I(k,m) = int_0^1 ln^k(x) ln^m(1+x) / x dx, m >= 1."""
    if k < 0 or m < 1:
        raise ValueError("quad_I needs k >= 0 and m >= 1")

    def f(x, xa, xb):
        return mpmath.log(xa) ** k * mpmath.log1p(x) ** m / xa

    return _checked(tanh_sinh(f, 0, 1, prec), f"I({k},{m})")


def quad_J(k: int, m: int, prec: int) -> QuadResult:
    """J(k,m) = int_0^1 ln^k(1-t) ln^m(1+t) / (1+t) dt."""
    if k < 0 or m < 0:
        raise ValueError("quad_J needs k, m >= 0")

    def f(t, ta, tb):
        return mpmath.log(tb) ** k * mpmath.log1p(t) ** m / (1 + t)

    return _checked(tanh_sinh(f, 0, 1, prec), f"J({k},{m})")


def quad_logpow(n: int, m: int, segment: str, prec: int) -> QuadResult:
    """int t^(n-1) ln^m(t) dt over [0,1], [0,1/2] or [1/2,1]."""
    if n < 1 or m < 0:
        raise ValueError("quad_logpow needs n >= 1 and m >= 0")
    try:
        a, b = SEGMENTS[segment]
    except KeyError:
        raise ValueError(f"unknown segment {segment!r}") from None

    def f(t, ta, tb):
        # near t = 1 the logarithm is taken from the distance to 1
        lt = mpmath.log1p(-tb) if b == 1 and tb < ta else mpmath.log(t)
        return t ** (n - 1) * lt**m

    return _checked(tanh_sinh(f, a, b, prec), f"logpow({n},{m},{segment})")


def quad_T(m: int, k: int, prec: int) -> QuadResult:
    """int_0^1 ln^m(t) ln^k(1-t) / (1+t) dt, m, k >= 1."""
    if m < 1 or k < 1:
        raise ValueError("quad_T needs m, k >= 1")

    def f(t, ta, tb):
        lt = mpmath.log1p(-tb) if tb < ta else mpmath.log(ta)
        return lt**m * mpmath.log(tb) ** k / (1 + t)

    return _checked(tanh_sinh(f, 0, 1, prec), f"T({m},{k})")
