"""Certification suites: each case compares two independently obtained values.

A case is plain data (label, parameters, check name, tolerance), so suites
can be fanned out to worker processes.  Reports list cases sorted by label
and parameters, which makes them reproducible byte for byte apart from the
wall-time field.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import factorial

import mpmath

from . import exact, reduction as R
from .model import SignedIndex, SymExpr, parse_index
from .numeric import ConstantCache, digits_to_bits, eval_alt_outer, eval_expr, eval_mpl_at
from .quadrature import SEGMENTS, quad_I, quad_J, quad_logpow, quad_T

__all__ = ["CaseSpec", "CaseRecord", "VerificationReport", "SUITES", "build_suite", "run_suite", "oracle_value"]

SUITES = ("fixtures", "exact", "quadrature", "theorems", "all")
ACCEL_TOL = "1e-8"


def default_tol(digits: int) -> str:
    """Closed-form tolerance: 10^-25 at 40 digits, scaled with precision."""
    return f"1e-{max(1, (digits * 5) // 8)}"


def tight_tol(digits: int) -> str:
    """Tolerance for two closed forms of one quantity: 10^-30 at 40 digits."""
    return f"1e-{max(1, (digits * 3) // 4)}"


def relation_tol(digits: int) -> str:
    return f"1e-{max(1, digits // 2)}"


@dataclass(frozen=True)
class CaseSpec:
    label: str
    params: tuple  # sorted (name, value) pairs
    check: str
    tolerance: str
    finding: bool = False

    @property
    def params_dict(self) -> dict:
        return dict(self.params)


@dataclass
class CaseRecord:
    label: str
    params: dict
    lhs: str
    rhs: str
    residual: str
    tolerance: str
    status: str
    note: str = ""


@dataclass
class VerificationReport:
    suite: str
    precision_digits: int
    cases: list[CaseRecord]
    findings: list[CaseRecord] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def totals(self) -> dict:
        t = {"total": len(self.cases), "pass": 0, "fail": 0, "skipped": 0}
        for c in self.cases:
            t[c.status] += 1
        return t

    @property
    def ok(self) -> bool:
        return self.totals["fail"] == 0

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "precision_digits": self.precision_digits,
            "totals": self.totals,
            "cases": [asdict(c) for c in self.cases],
            "findings": [asdict(c) for c in self.findings],
            "wall_time": round(self.wall_time, 3),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _spec(label: str, check: str, tol: str, finding: bool = False, **params) -> CaseSpec:
    return CaseSpec(label, tuple(sorted(params.items())), check, tol, finding)


def _sort_key(rec: CaseRecord):
    return (rec.label, json.dumps(rec.params, sort_keys=True))


# --------------------------------------------------------------------------
# independent values
# --------------------------------------------------------------------------


def oracle_value(target: str, prec: int):
    """Numeric value of a target from quadrature, series or convolution."""
    kind, *rest = R.parse_target(target)
    if kind == "I":
        return quad_I(rest[0], rest[1], prec).value.value
    if kind == "J":
        return quad_J(rest[0], rest[1], prec).value.value
    if kind == "mplhalf":
        return eval_mpl_at(Fraction(1, 2), rest[0], prec).value
    return eval_alt_outer(rest[0], tol=mpmath.ldexp(1, -prec)).value


# --------------------------------------------------------------------------
# checks: each returns (lhs, rhs, symbolic_equal_or_None, note)
# --------------------------------------------------------------------------

_CACHE: ConstantCache | None = None


def _val(expr: SymExpr, prec: int):
    return eval_expr(expr, prec, cache=_CACHE).value


def _both(a: SymExpr, b: SymExpr, prec: int):
    return _val(a, prec), _val(b, prec), a == b


def _ck_fixture(p, prec):
    label = p["target"]
    fixture = R.lookup_fixture(label)
    kind = R.parse_target(label)[0]
    if kind in ("I", "J"):
        return _val(fixture, prec), oracle_value(label, prec), None, "published closed form vs quadrature"
    red = R.reduce_target(label).expr
    lhs, rhs, same = _both(fixture, red, prec)
    note = "published value vs reduction"
    if not same and not red.residue_atoms():
        diff = (R.reduce_basis(fixture) - red).pretty()
        note += f"; published minus reduced = {diff}"
    return lhs, rhs, None, note


def _ck_oracle(p, prec):
    res = R.reduce_target(p["target"])
    return _val(res.expr, prec), oracle_value(p["target"], prec), None, res.route


def _ck_stirling(p, prec):
    n = p["n"]
    ok = all(exact.check_stirling_mhn(n, k) for k in range(1, n + 1))
    lhs = sum(exact.stirling1(n, k) for k in range(1, n + 1))
    rhs = sum(factorial(n - 1) * exact.mhn(SignedIndex.plain([1] * (k - 1)), n - 1) for k in range(1, n + 1))
    return Fraction(lhs), Fraction(rhs), ok, "row sums of s(n,k) and (n-1)! zeta_(n-1)({1}_(k-1)); each k checked"


def _ck_stirling_spec(p, prec):
    n = p["n"]
    spec = exact.stirling_specializations(n)
    lhs = sum(Fraction(exact.stirling1(n, k)) for k in spec)
    return lhs, sum(spec.values()), exact.check_stirling_specializations(n), "sums over k = 1..5; each k checked"


def _ck_binom(p, prec):
    n, a = p["n"], p["a"]
    lhs = exact.mhsn(SignedIndex.plain([2] * a + [1]), n)
    rhs = exact.binom_star_rhs(n, a)
    return lhs, rhs, lhs == rhs, "star sum vs binomial sum"


def _ck_logpow(p, prec):
    n, m, seg = p["n"], p["m"], p["segment"]
    closed = R.closed_logpow_expr(n, m, seg)
    return _val(closed, prec), quad_logpow(n, m, seg, prec).value.value, None, ""


def _ck_closed_I(p, prec):
    k, m = p["k"], p["m"]
    return _val(R.closed_I(k, m, reading=p.get("reading", "derived")), prec), quad_I(k, m, prec).value.value, None, ""


def _ck_closed_J(p, prec):
    k, m = p["k"], p["m"]
    return _val(R.closed_J(k, m, variant=p["variant"]), prec), quad_J(k, m, prec).value.value, None, ""


def _ck_head_vs_I(p, prec):
    k, m = p["k"], p["m"]
    head = R.reduce_head_family(k, m, route="general").expr
    scaled = head * ((-1) ** (m + k) * factorial(m) * factorial(k))
    return quad_I(k, m, prec).value.value, _val(scaled, prec), None, "quadrature vs scaled head closed form"


def _ck_T(p, prec):
    m, k = p["m"], p["k"]
    index = SignedIndex.of(-(m + 1), -1, *([1] * (k - 1)))
    z = eval_alt_outer(index, tol=mpmath.ldexp(1, -prec)).value
    scale = Fraction((-1) ** (m + k - 1), factorial(k) * factorial(m))
    with mpmath.workprec(prec + 20):
        rhs = z / (scale.numerator / mpmath.mpf(scale.denominator))
    return quad_T(m, k, prec).value.value, rhs, None, "T(m,k) vs scaled zeta(b(m+1),b1,{1}_(k-1))"


def _ck_J_variants(p, prec):
    k, m = p["k"], p["m"]
    a = R.closed_J(k, m, "A")
    b = R.closed_J(k, m, p.get("other", "B"))
    return _val(a, prec), _val(b, prec), None, "variant A vs variant B"


def _ck_exact_expr(p, prec):
    lhs, rhs = _EXACT_PAIRS[p["pair"]](p)
    return (*_both(lhs, rhs, prec), "")


def _ck_relation(p, prec):
    kind = p["relation"]
    if kind == "interior-three":
        lhs, rhs = R.relation_interior_three(p["m"], p["k"])
    else:
        lhs, rhs = R.relation_61(p["m"], p["k"], reading=p.get("reading", "statement"))
    return _val(lhs, prec), _val(rhs, prec), None, "relation sides"


def _ck_crvz(p, prec):
    index = parse_index(p["target"])
    tol = mpmath.mpf(ACCEL_TOL) / 10
    a = eval_alt_outer(index, tol=tol, method="crvz").value
    b = eval_alt_outer(index, tol=mpmath.ldexp(1, -prec)).value
    return a, b, None, "accelerated series vs convolution"


def _ck_two_bars_k1_m1(p, prec):
    literal = R._two_bars_k1_literal(1)
    return _val(literal, prec), oracle_value("b1,b1", prec), None, "k = 1 recurrence taken at m = 1"


_EXACT_PAIRS = {
    "adz(2,m)": lambda p: (R.adz_reduce(2, p["m"]), SymExpr.zeta(p["m"] + 2)),
    "adz(3,1)": lambda p: (R.adz_reduce(3, 1), SymExpr.zeta(4) / 4),
    "adz duality": lambda p: (R.adz_reduce(p["n"] + 1, p["m"] - 1), R.adz_reduce(p["m"] + 1, p["n"] - 1)),
    "head fast path": lambda p: (
        R.reduce_head_family(p["k"], p["m"]).expr,
        R.reduce_head_family(p["k"], p["m"], route="general").expr,
    ),
    "two-bars fast path": lambda p: (
        R.reduce_two_bars(p["m"], p["k"]).expr,
        R.reduce_two_bars(p["m"], p["k"], route="general").expr,
    ),
    "fixture closure": lambda p: (R.reduce_target(p["target"]).expr, R.reduce_basis(R.lookup_fixture(p["target"]))),
    "interior-three diagonal k=1": lambda p: (
        R.reduce_interior_three_diagonal(1).expr,
        SymExpr.zeta(3) * SymExpr.ln2() * Fraction(3, 4) - SymExpr.zeta(4) * Fraction(5, 16),
    ),
    "zeta(3,1;1/2) from relation": lambda p: (
        R.solve_relation_61(2, 1).expr,
        R.reduce_basis(R.lookup_fixture("mplhalf:3,1")),
    ),
    "mpl_half_2ones fixture": lambda p: (
        R.mpl_half_2ones(p["m"]),
        R.reduce_basis(R.lookup_fixture("mplhalf:" + ",".join(["2"] + ["1"] * p["m"]))),
    ),
}

_CHECKS = {
    "fixture": _ck_fixture,
    "oracle": _ck_oracle,
    "stirling": _ck_stirling,
    "stirling-spec": _ck_stirling_spec,
    "binom": _ck_binom,
    "logpow": _ck_logpow,
    "closed-I": _ck_closed_I,
    "closed-J": _ck_closed_J,
    "head-vs-I": _ck_head_vs_I,
    "T": _ck_T,
    "J-variants": _ck_J_variants,
    "exact-expr": _ck_exact_expr,
    "relation": _ck_relation,
    "crvz": _ck_crvz,
    "two-bars-k1-m1": _ck_two_bars_k1_m1,
}


# --------------------------------------------------------------------------
# suites
# --------------------------------------------------------------------------


def _fixture_cases(digits):
    tol = default_tol(digits)
    return [_spec(f"fixture {label}", "fixture", tol, target=label) for label, _ in R.fixtures()]


def _exact_cases(digits):
    cases = [_spec("stirling vs harmonic", "stirling", "0", n=n) for n in range(1, 31)]
    cases += [_spec("stirling specializations", "stirling-spec", "0", n=n) for n in range(1, 21)]
    cases += [_spec("star binomial identity", "binom", "0", n=n, a=a) for n in range(1, 41) for a in range(1, 4)]
    return cases


def _quadrature_cases(digits):
    tol = default_tol(digits)
    cases = [
        _spec("log-power integral", "logpow", tol, n=n, m=m, segment=seg)
        for n in range(1, 7)
        for m in range(0, 5)
        for seg in SEGMENTS
    ]
    cases += [_spec("closed I vs quadrature", "closed-I", tol, k=k, m=m) for k in range(4) for m in range(1, 4)]
    cases += [
        _spec("closed J vs quadrature", "closed-J", tol, k=k, m=m, variant="B") for k in range(4) for m in range(4)
    ]
    cases += [
        _spec("closed J vs quadrature", "closed-J", tol, k=k, m=m, variant="A") for k in range(1, 4) for m in range(4)
    ]
    cases += [_spec("T integral vs alternating zeta", "T", ACCEL_TOL, m=m, k=k) for m in (1, 2) for k in (1, 2)]
    return cases


def _theorem_cases(digits):
    tol, tight, rel = default_tol(digits), tight_tol(digits), relation_tol(digits)
    c = []
    # ADZ
    c += [_spec("adz zeta(2,{1}_m)", "exact-expr", "0", pair="adz(2,m)", m=m) for m in range(7)]
    c += [_spec("adz zeta(3,1)", "exact-expr", "0", pair="adz(3,1)")]
    c += [
        _spec("adz duality", "exact-expr", "0", pair="adz duality", n=n, m=m)
        for n in range(1, 8)
        for m in range(1, 8)
        if n + m <= 8 and n < m
    ]
    c += [
        _spec("adz vs series", "oracle", tol, target=",".join([str(s)] + ["1"] * o))
        for s in range(2, 6)
        for o in range(0, 4)
        if s + o <= 6
    ]
    # polylogarithms at 1/2
    c += [_spec("zeta(2,{1}_m;1/2) vs series", "oracle", tol, target="mplhalf:" + ",".join(["2"] + ["1"] * m)) for m in range(5)]
    c += [_spec("zeta(2,{1}_m;1/2) fixture", "exact-expr", "0", pair="mpl_half_2ones fixture", m=m) for m in range(3)]
    # head family
    c += [_spec("head vs I(k,m)", "head-vs-I", tol, k=k, m=m) for k in range(4) for m in range(1, 4)]
    c += [_spec("head fast path", "exact-expr", "0", pair="head fast path", k=k, m=m) for k in (0, 1) for m in range(1, 5)]
    c += [
        _spec("head vs convolution", "oracle", tol, target=",".join([f"b{k + 2}"] + ["1"] * (m - 1)))
        for k in range(4)
        for m in range(1, 5)
        if k + m + 1 <= 6
    ]
    # J variants
    c += [_spec("J variant A vs B", "J-variants", tight, k=k, m=m) for k in range(1, 5) for m in range(5)]
    # two bars
    c += [
        _spec("two-bars vs convolution", "oracle", tol, target=",".join(["b1"] + ["1"] * (m - 1) + ["b1"] + ["1"] * (k - 1)))
        for m in range(1, 5)
        for k in range(1, 5)
        if m + k <= 5
    ]
    c += [
        _spec("two-bars fast path", "exact-expr", "0", pair="two-bars fast path", m=m, k=k)
        for m in range(1, 5)
        for k in range(1, 5)
        if m + k <= 6
    ]
    # interior two
    c += [
        _spec("interior-two vs convolution", "oracle", tol, target=",".join(["b1"] + ["1"] * (m - 1) + ["2"] + ["1"] * (k - 1)))
        for m in range(1, 5)
        for k in range(1, 5)
        if m + k <= 4
    ]
    c += [_spec("fixture closure", "exact-expr", "0", pair="fixture closure", target=t) for t in _CLOSURE_TARGETS]
    # interior three
    c += [_spec("interior-three relation", "relation", rel, relation="interior-three", m=m, k=k) for m in range(1, 4) for k in range(1, 4)]
    c += [_spec("interior-three diagonal k=1", "exact-expr", "0", pair="interior-three diagonal k=1")]
    c += [
        _spec("interior-three diagonal vs convolution", "oracle", tol, target=",".join(["b1"] + ["1"] * (k - 1) + ["3"] + ["1"] * (k - 1)))
        for k in (1, 2, 3)
    ]
    # triple and quadruple bars
    c += [
        _spec("triple-bar vs convolution", "oracle", tol, target=",".join(["b1"] + ["1"] * (m - 1) + ["b1", "b1"] + ["1"] * (k - 1)))
        for m in range(1, 4)
        for k in range(1, 4)
        if m + k <= 5
    ]
    c += [
        _spec("quad-bar vs convolution", "oracle", tol, target=",".join(["b1"] + ["1"] * (m - 1) + ["b1"] * 3 + ["1"] * (k - 1)))
        for m in range(1, 4)
        for k in range(1, 4)
        if m + k <= 4
    ]
    # polylog relation
    c += [_spec("polylog relation", "relation", rel, relation="61", m=m, k=k) for m in range(1, 4) for k in range(0, 4)]
    c += [_spec("zeta(3,1;1/2) from relation", "exact-expr", "0", pair="zeta(3,1;1/2) from relation")]
    # acceleration cross-check
    c += [_spec("accelerated series", "crvz", ACCEL_TOL, target=t) for t in ("b1,2", "b1,3", "b2,1", "b1,1,2", "b3")]
    return c


# indices whose reductions should reproduce the tabulated value exactly
_CLOSURE_TARGETS = ("b1,1,b1", "b1,2", "b1,3", "b2,1,1", "b1,1,2", "b1,1,1,b1")


def _finding_cases(digits):
    tol = default_tol(digits)
    f = [_spec("closed I, uniform sign reading", "closed-I", tol, True, k=k, m=m, reading="literal") for k in (2, 3) for m in range(1, 4)]
    f += [_spec("closed J, inner bound l <= j", "closed-J", tol, True, k=k, m=m, variant="B-literal") for k in range(1, 3) for m in range(0, 3)]
    f += [_spec("two-bars k=1 recurrence at m=1", "two-bars-k1-m1", tol, True)]
    f += [
        _spec("polylog relation, proof reading", "relation", relation_tol(digits), True, relation="61", m=m, k=k, reading="proof")
        for m in range(1, 4)
        for k in range(1, 4)
    ]
    return f


def build_suite(name: str, digits: int) -> tuple[list[CaseSpec], list[CaseSpec]]:
    """Return (cases, findings) for a suite."""
    builders = {
        "fixtures": _fixture_cases,
        "exact": _exact_cases,
        "quadrature": _quadrature_cases,
        "theorems": _theorem_cases,
    }
    if name == "all":
        cases = [c for b in builders.values() for c in b(digits)]
    elif name in builders:
        cases = builders[name](digits)
    else:
        raise ValueError(f"unknown suite {name!r}")
    findings = _finding_cases(digits) if name in ("theorems", "all") else []
    return cases, findings


# --------------------------------------------------------------------------
# running
# --------------------------------------------------------------------------


def _fmt(value, digits: int) -> str:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, int):
        return str(value)
    return mpmath.nstr(value, digits + 10, min_fixed=-math.inf, max_fixed=math.inf)


def _residual(lhs: str, rhs: str, prec: int) -> str:
    if "/" in lhs or "/" in rhs:
        return str(abs(Fraction(lhs) - Fraction(rhs)))
    with mpmath.workprec(prec + 64):
        d = abs(mpmath.mpf(lhs) - mpmath.mpf(rhs))
        return "0" if d == 0 else mpmath.nstr(d, 3, min_fixed=1, max_fixed=0)


def _passes(residual: str, tol: str) -> bool:
    if "/" in residual:
        return Fraction(residual) <= Fraction(tol)
    with mpmath.workdps(30):
        return mpmath.mpf(residual) <= mpmath.mpf(tol)


def run_case(spec: CaseSpec, digits: int) -> CaseRecord:
    prec = digits_to_bits(digits)
    params = spec.params_dict
    try:
        lhs, rhs, same, note = _CHECKS[spec.check](params, prec)
    except R.CapabilityError as exc:
        return CaseRecord(spec.label, params, "", "", "", spec.tolerance, "skipped", str(exc))
    ls, rs = _fmt(lhs, digits), _fmt(rhs, digits)
    if same is None:
        res = _residual(ls, rs, prec)
    elif same:
        res = "0"
    else:
        # exact check failed; report the numeric gap, floored so it cannot read as zero
        res = _residual(ls, rs, prec)
        if res == "0":
            res = f"1e-{digits + 10}"
        note = (note + "; " if note else "") + "expressions differ"
    status = "pass" if _passes(res, spec.tolerance) else "fail"
    return CaseRecord(spec.label, params, ls, rs, res, spec.tolerance, status, note)


def _worker_init(entries):
    global _CACHE
    _CACHE = ConstantCache()
    _CACHE.merge(entries)


def _worker_run(spec: CaseSpec, digits: int):
    rec = run_case(spec, digits)
    return rec, _CACHE.entries(), _CACHE.derivations


def run_suite(name: str, digits: int = 40, jobs: int = 1, cache: ConstantCache | None = None) -> VerificationReport:
    """Run a suite and return its report; ``cache`` receives any new constants."""
    global _CACHE
    start = time.perf_counter()
    cases, findings = build_suite(name, digits)
    specs = cases + findings
    cache = cache if cache is not None else ConstantCache()
    if jobs <= 1:
        _CACHE = cache
        records = [run_case(s, digits) for s in specs]
    else:
        records = []
        with ProcessPoolExecutor(max_workers=jobs, initializer=_worker_init, initargs=(cache.entries(),)) as pool:
            futures = [pool.submit(_worker_run, s, digits) for s in specs]
            for fut in futures:
                rec, entries, _ = fut.result()
                records.append(rec)
                before = len(cache.entries())
                cache.merge(entries)
                cache.derivations += max(0, len(cache.entries()) - before)
    n = len(cases)
    report = VerificationReport(
        suite=name,
        precision_digits=digits,
        cases=sorted(records[:n], key=_sort_key),
        findings=sorted(records[n:], key=_sort_key),
    )
    report.wall_time = time.perf_counter() - start
    return report
