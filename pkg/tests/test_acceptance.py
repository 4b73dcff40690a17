"""Acceptance criteria, one printed PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v``; the criterion lines are
printed even when output capture is on.  Tolerances are pinned below.
"""

import time
from fractions import Fraction
from math import factorial

import mpmath
import pytest

from altmzv import reduction as R
from altmzv.exact import check_binom_star, check_stirling_mhn, check_stirling_specializations
from altmzv.model import SymExpr, parse_index
from altmzv.numeric import ConstantCache, digits_to_bits, eval_alt_outer, eval_expr
from altmzv.quadrature import SEGMENTS, quad_I, quad_logpow, quad_T
from altmzv.verify import run_suite

DIGITS = 40
BITS = digits_to_bits(DIGITS)
TOL_CLOSED = mpmath.mpf("1e-25")
TOL_VARIANTS = mpmath.mpf("1e-30")
TOL_ACCEL = mpmath.mpf("1e-8")
TOL_RELATION = mpmath.mpf("1e-20")
FIXTURE_SECONDS = 60
EXACT_SECONDS = 30

CACHE = ConstantCache()
Z, L = SymExpr.zeta, SymExpr.ln2


def value(expr, bits=BITS):
    return eval_expr(expr, bits, cache=CACHE).value


def gap(a, b, bits=BITS):
    with mpmath.workprec(bits + 64):
        return abs(a - b)


def mzv(text, tol=mpmath.mpf("1e-45")):
    return eval_alt_outer(parse_index(text), tol=tol).value


def verdict(capsys, number, title, ok, detail):
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {title} ({detail})"
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def test_criterion_01_fixture_suite(capsys):
    start = time.perf_counter()
    report = run_suite("fixtures", DIGITS)
    elapsed = time.perf_counter() - start
    bad = [c for c in report.cases if c.status != "pass" or mpmath.mpf(c.residual) >= TOL_CLOSED]
    kinds = R.fixture_kinds()
    counts = {k: sum(1 for v in kinds.values() if v == k) for k in ("integral", "mzv", "mplhalf")}
    detail = f"{len(report.cases) - len(bad)}/{len(report.cases)} below 1e-25 {counts}, {elapsed:.1f}s"
    if bad:
        detail += "; failing: " + "; ".join(f"{c.params['target']} residual {c.residual} [{c.note}]" for c in bad)
    verdict(capsys, 1, "fixture closed forms vs independent values", not bad and elapsed < FIXTURE_SECONDS, detail)


def test_criterion_02_integral_I(capsys):
    worst, where = mpmath.mpf(0), None
    for k in range(0, 4):
        for m in range(1, 4):
            head = R.reduce_head_family(k, m, route="general").expr
            closed = value(head * ((-1) ** (m + k) * factorial(m) * factorial(k)))
            g = gap(quad_I(k, m, BITS).value.value, closed)
            if g > worst:
                worst, where = g, (k, m)
    verdict(capsys, 2, "I(k,m) quadrature vs scaled closed form, k<=3, m<=3", worst < TOL_CLOSED, f"max residual {mpmath.nstr(worst, 3)} at {where}")


def test_criterion_03_integral_J_and_two_bars(capsys):
    bits50 = digits_to_bits(50)
    worst_j = max(
        gap(value(R.closed_J(k, m, "A"), bits50), value(R.closed_J(k, m, "B"), bits50), bits50)
        for k in range(1, 5)
        for m in range(0, 5)
    )
    worst_b, where = mpmath.mpf(0), None
    for m in range(1, 5):
        for k in range(1, 6 - m):
            target = ",".join(["b1"] + ["1"] * (m - 1) + ["b1"] + ["1"] * (k - 1))
            g = gap(value(R.reduce_two_bars(m, k).expr), mzv(target, mpmath.mpf("1e-12")))
            if g > worst_b:
                worst_b, where = g, target
    ok = worst_j < TOL_VARIANTS and worst_b < TOL_ACCEL
    detail = f"variants max {mpmath.nstr(worst_j, 3)}; two bars max {mpmath.nstr(worst_b, 3)} at {where}"
    verdict(capsys, 3, "J variants agree and two-bar reductions certify", ok, detail)


def test_criterion_04_interior_two(capsys):
    worst = mpmath.mpf(0)
    for m in range(1, 4):
        for k in range(1, 5 - m):
            target = ",".join(["b1"] + ["1"] * (m - 1) + ["2"] + ["1"] * (k - 1))
            worst = max(worst, gap(value(R.reduce_interior_two(m, k).expr), mzv(target, mpmath.mpf("1e-12"))))
    exact = (
        R.reduce_interior_two(1, 1).expr == R.lookup_fixture("b1,2")
        and R.reduce_interior_two(2, 1).expr == R.lookup_fixture("b1,1,2")
    )
    verdict(capsys, 4, "interior-two reductions, m+k<=4", worst < TOL_ACCEL and exact, f"max residual {mpmath.nstr(worst, 3)}, exact fixture match {exact}")


def test_criterion_05_interior_three(capsys):
    worst = mpmath.mpf(0)
    for m in range(1, 4):
        for k in range(1, 4):
            lhs, rhs = R.relation_interior_three(m, k)
            worst = max(worst, gap(value(lhs), value(rhs)))
    diag = R.reduce_interior_three_diagonal(1).expr
    exact = diag == Z(3) * L() * Fraction(3, 4) - Z(4) * Fraction(5, 16)
    verdict(capsys, 5, "interior-three relation, m,k<=3", worst < TOL_RELATION and exact, f"max residual {mpmath.nstr(worst, 3)}, diagonal k=1 exact {exact}")


def test_criterion_06_polylog_relation(capsys):
    worst = mpmath.mpf(0)
    for m in range(1, 4):
        for k in range(0, 4):
            lhs, rhs = R.relation_61(m, k, reading="statement")
            worst = max(worst, gap(value(lhs), value(rhs)))
    solved = R.solve_relation_61(2, 1).expr
    exact = solved == Z(4) / 8 - Z(3) * L() / 8 + L(4) / 24
    verdict(capsys, 6, "polylog-at-1/2 relation, m<=3, k<=3", worst < TOL_RELATION and exact, f"max residual {mpmath.nstr(worst, 3)}, zeta(3,1;1/2) exact {exact}")


def test_criterion_07_exact_suite(capsys):
    start = time.perf_counter()
    stirling = all(check_stirling_mhn(n, k) for n in range(1, 31) for k in range(1, n + 1))
    spec = all(check_stirling_specializations(n) for n in range(1, 21))
    binom = all(check_binom_star(n, a) for n in range(1, 41) for a in range(1, 4))
    elapsed = time.perf_counter() - start
    ok = stirling and spec and binom and elapsed < EXACT_SECONDS
    verdict(capsys, 7, "Stirling, specialization and binomial sweeps", ok, f"{stirling}/{spec}/{binom}, {elapsed:.2f}s")


def test_criterion_08_adz(capsys):
    twos = all(R.adz_reduce(2, m) == Z(m + 2) for m in range(0, 7))
    three = R.adz_reduce(3, 1) == Z(4) / 4
    dual = all(
        R.adz_reduce(n + 1, m - 1) == R.adz_reduce(m + 1, n - 1)
        for n in range(1, 8)
        for m in range(1, 8)
        if n + m <= 8
    )
    verdict(capsys, 8, "ADZ reductions and duality, weight<=8", twos and three and dual, f"{twos}/{three}/{dual}")


def test_criterion_09_logpow(capsys):
    worst, where = mpmath.mpf(0), None
    for segment in SEGMENTS:
        for n in range(1, 7):
            for m in range(0, 5):
                g = gap(quad_logpow(n, m, segment, BITS).value.value, value(R.closed_logpow_expr(n, m, segment)))
                if g > worst:
                    worst, where = g, (n, m, segment)
    verdict(capsys, 9, "log-power integrals vs closed forms, n<=6, m<=4", worst < TOL_CLOSED, f"max residual {mpmath.nstr(worst, 3)} at {where}")


def test_criterion_10_T_and_quad_bar(capsys):
    # T(1,1) = -zeta(b2,b1)
    t = quad_T(1, 1, BITS).value.value
    g1 = gap(t, -mzv("b2,b1", mpmath.mpf("1e-12")))
    g2 = gap(value(R.map_quad_bar(1, 1).expr), value(R.lookup_fixture("b1,b1,b1,b1")))
    ok = g1 < TOL_ACCEL and g2 < TOL_CLOSED
    verdict(capsys, 10, "T(1,1) integral and four-bar mapping", ok, f"T residual {mpmath.nstr(g1, 3)}, four-bar residual {mpmath.nstr(g2, 3)}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
