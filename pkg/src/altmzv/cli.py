"""Command-line front end: ``altmzv eval|reduce|verify|table``.

Exit codes: 0 success, 1 certification failure, 2 bad input or divergent
index, 3 accuracy or infrastructure failure, 4 unsupported target or weight
above the limit.
"""

from __future__ import annotations

import json
import os
from fractions import Fraction
import sys
from pathlib import Path

import click
import mpmath

from . import reduction as R
from .model import ConstAtom, IndexParseError, parse_index, print_index
from .numeric import (
    AccuracyError,
    ConstantCache,
    DivergenceError,
    DomainError,
    digits_to_bits,
    eval_alt_outer,
    eval_atom,
    eval_expr,
    eval_mpl_at,
)
from .verify import SUITES, default_tol, oracle_value, run_suite

CACHE_ENV = "ALTMZV_CACHE"

EXIT_FAIL, EXIT_INPUT, EXIT_ACCURACY, EXIT_CAPABILITY = 1, 2, 3, 4


def default_cache_path() -> Path:
    """$ALTMZV_CACHE, else $XDG_DATA_HOME/altmzv/constants.tsv (~/.local/share by default)."""
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    base = os.environ.get("XDG_DATA_HOME") or os.path.join(os.path.expanduser("~"), ".local", "share")
    return Path(base) / "altmzv" / "constants.tsv"


def _open_cache(no_cache: bool) -> ConstantCache:
    return ConstantCache() if no_cache else ConstantCache(default_cache_path())


def _close_cache(cache: ConstantCache, stats: bool) -> None:
    try:
        cache.save()
    except OSError as exc:
        click.echo(f"warning: could not write cache: {exc}", err=True)
    if stats:
        s = cache.stats()
        click.echo(f"cache: hits={s['hits']} derivations={s['derivations']} entries={s['entries']}", err=True)


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _dec(value, digits: int) -> str:
    return mpmath.nstr(value, digits, min_fixed=-mpmath.inf, max_fixed=mpmath.inf)


def _sci(value) -> str:
    return "0" if value == 0 else mpmath.nstr(value, 3, min_fixed=1, max_fixed=0)


prec_option = click.option(
    "--prec", type=click.IntRange(16, 1000), default=40, show_default=True, help="Working precision in decimal digits."
)
cache_options = [
    click.option("--no-cache", is_flag=True, help="Do not read or write the constant cache."),
    click.option("--stats", is_flag=True, help="Print cache hit and derivation counts to stderr."),
]


def with_cache_options(f):
    for opt in reversed(cache_options):
        f = opt(f)
    return f


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(package_name="artifact", prog_name="altmzv")
def cli():
    """Alternating multiple zeta values: evaluation, reduction and certification."""


# --------------------------------------------------------------------------
# eval
# --------------------------------------------------------------------------


@cli.command("eval")
@click.argument("index_text", metavar="INDEX")
@prec_option
@click.option("--method", type=click.Choice(["holder", "crvz", "direct"]), default="holder", show_default=True)
@click.option("--tol", type=str, default=None, help="Absolute tolerance (default 10^-(prec+2)).")
@with_cache_options
def eval_cmd(index_text, prec, method, tol, no_cache, stats):
    """Evaluate zeta(INDEX), e.g. ``b1,2``; ``mplhalf:2,1`` evaluates at x = 1/2."""
    cache = _open_cache(no_cache)
    digits = prec
    bits = digits_to_bits(digits) + 8
    try:
        if index_text.startswith("mplhalf:"):
            index = parse_index(index_text[len("mplhalf:"):])
            value = eval_mpl_at(Fraction(1, 2), index, bits)
            label, used = f"mplhalf:{print_index(index)}", "series"
        else:
            index = parse_index(index_text)
            label = print_index(index)
            if index.depth == 0 or not index.is_admissible():
                value = eval_alt_outer(index)
                used = "exact"
            elif method == "holder" and tol is None:
                value = eval_atom(ConstAtom.mzv(index), bits, cache=cache)
                used = method
            else:
                t = mpmath.mpf(tol) if tol else mpmath.ldexp(1, -bits)
                value = eval_alt_outer(index, tol=t, method=method)
                used = method
    except IndexParseError as exc:
        _fail(EXIT_INPUT, f"cannot parse index: {exc}")
    except (DivergenceError, DomainError) as exc:
        _fail(EXIT_INPUT, str(exc))
    except ValueError as exc:
        _fail(EXIT_INPUT, str(exc))
    except AccuracyError as exc:
        _fail(EXIT_ACCURACY, str(exc))
    finally:
        _close_cache(cache, stats)
    text = _dec(value.value, digits)
    click.echo(text)
    record = {"index": label, "value": text, "error_bound": _sci(value.error_bound), "method": used}
    click.echo(json.dumps(record, sort_keys=True))


# --------------------------------------------------------------------------
# reduce
# --------------------------------------------------------------------------


def _certify(res: R.ReductionResult, target: str, digits: int, tol: str, cache: ConstantCache) -> dict:
    bits = digits_to_bits(digits)
    value = eval_expr(res.expr, bits, cache=cache).value
    oracle = oracle_value(target, bits)
    with mpmath.workprec(bits + 20):
        residual = abs(value - oracle)
    res_text = _sci(residual)
    with mpmath.workdps(30):
        ok = mpmath.mpf(res_text) <= mpmath.mpf(tol)
    return {
        "value": _dec(value, digits),
        "oracle": _dec(oracle, digits),
        "residual": res_text,
        "tolerance": tol,
        "status": "pass" if ok else "fail",
    }


def _reduce_or_exit(target: str, max_weight: int) -> R.ReductionResult:
    try:
        return R.reduce_target(target, limit=max_weight)
    except IndexParseError as exc:
        _fail(EXIT_INPUT, f"cannot parse target: {exc}")
    except DivergenceError as exc:
        _fail(EXIT_INPUT, str(exc))
    except R.CapabilityError as exc:
        _fail(EXIT_CAPABILITY, str(exc))
    except ValueError as exc:
        _fail(EXIT_INPUT, str(exc))


@cli.command("reduce")
@click.argument("target")
@click.option("--certify", is_flag=True, help="Also compare the closed form with an independent numeric value.")
@prec_option
@click.option("--tol", type=str, default=None, help="Certification tolerance (default 1e-25 at 40 digits).")
@click.option("--max-weight", type=int, default=R.WEIGHT_LIMIT, show_default=True)
@click.option("--json-only", is_flag=True, help="Print only the JSON record.")
@with_cache_options
def reduce_cmd(target, certify, prec, tol, max_weight, json_only, no_cache, stats):
    """Closed form of TARGET: an index such as ``b2,1,1``, ``I(k,m)``, ``J(k,m)`` or ``mplhalf:3,1``."""
    res = _reduce_or_exit(target, max_weight)
    record = res.to_json()
    code = 0
    if certify:
        cache = _open_cache(no_cache)
        try:
            record["certify"] = _certify(res, target, prec, tol or default_tol(prec), cache)
        except AccuracyError as exc:
            _fail(EXIT_ACCURACY, str(exc))
        finally:
            _close_cache(cache, stats)
        code = 0 if record["certify"]["status"] == "pass" else EXIT_FAIL
    if not json_only:
        click.echo(f"{res.target} = {res.expr.pretty()}")
        residues = ", ".join(a.pretty() for a in res.residue_atoms) or "none"
        click.echo(f"residue atoms: {residues}")
        click.echo(f"route: {res.route}")
        if certify:
            c = record["certify"]
            click.echo(f"residual: {c['residual']} (tolerance {c['tolerance']}, {c['status']})")
    click.echo(json.dumps(record, sort_keys=True))
    sys.exit(code)


# --------------------------------------------------------------------------
# verify
# --------------------------------------------------------------------------


@cli.command("verify")
@click.argument("suite", type=click.Choice(SUITES), default="all")
@prec_option
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None, help="Write the JSON report here.")
@click.option("--jobs", type=click.IntRange(1, 256), default=1, show_default=True)
@with_cache_options
def verify_cmd(suite, prec, out, jobs, no_cache, stats):
    """Run a certification suite and emit a JSON report; exit 1 if any case fails."""
    cache = _open_cache(no_cache)
    try:
        report = run_suite(suite, prec, jobs=jobs, cache=cache)
    except Exception as exc:  # noqa: BLE001 - any crash here is an infrastructure failure
        _fail(EXIT_ACCURACY, f"{type(exc).__name__}: {exc}")
    finally:
        _close_cache(cache, stats)
    text = report.dumps()
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
        t = report.totals
        click.echo(f"{suite}: {t['pass']} pass, {t['fail']} fail, {t['skipped']} skipped of {t['total']}", err=True)
    else:
        click.echo(text)
    sys.exit(0 if report.ok else EXIT_FAIL)


# --------------------------------------------------------------------------
# table
# --------------------------------------------------------------------------


def parse_range(text: str) -> list[int]:
    """``"1..3"``, ``"2"`` or ``"1,3,5"``."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise click.BadParameter(f"not a range: {text!r}") from None


def _ones(n: int) -> list[str]:
    return ["1"] * n


# family -> (default m, default k, row builder (m, k) -> (target text, weight))
TABLE_FAMILIES = {
    "head": ("1..3", "0..2", lambda m, k: (",".join([f"b{k + 2}"] + _ones(m - 1)), k + m + 1)),
    "two-bars": ("1..3", "1..3", lambda m, k: (",".join(["b1"] + _ones(m - 1) + ["b1"] + _ones(k - 1)), m + k)),
    "interior-two": ("1..3", "1..3", lambda m, k: (",".join(["b1"] + _ones(m - 1) + ["2"] + _ones(k - 1)), m + k + 1)),
    "interior-three": ("1..3", "1..3", lambda m, k: (f"relation({m},{k})", m + k + 2)),
    "triple-bar": ("1..3", "1..3", lambda m, k: (",".join(["b1"] + _ones(m - 1) + ["b1", "b1"] + _ones(k - 1)), m + k + 1)),
    "quad-bar": ("1..3", "1..3", lambda m, k: (",".join(["b1"] + _ones(m - 1) + ["b1"] * 3 + _ones(k - 1)), m + k + 2)),
    "adz": ("2..4", "0..2", lambda m, k: (",".join([str(m)] + _ones(k)), m + k)),
    "polylog-relation": ("1..3", "0..3", lambda m, k: (f"relation61({m},{k})", m + k + 1)),
}


def _table_row(family: str, m: int, k: int, target: str, digits: int, tol: str, certify: bool, cache) -> dict:
    bits = digits_to_bits(digits)
    row = {"family": family, "m": m, "k": k, "target": target}
    if family in ("interior-three", "polylog-relation"):
        lhs, rhs = R.relation_interior_three(m, k) if family == "interior-three" else R.relation_61(m, k)
        row["expr"] = f"{lhs.pretty()} = {rhs.pretty()}"
        row["residue_atoms"] = sorted({a.key for a in (lhs.residue_atoms() + rhs.residue_atoms())})
        if certify:
            a = eval_expr(lhs, bits, cache=cache).value
            b = eval_expr(rhs, bits, cache=cache).value
            rel_tol = f"1e-{max(1, digits // 2)}"
            row.update(_compare(a, b, digits, rel_tol))
        return row
    res = R.reduce_target(target)
    row["expr"] = res.expr.pretty()
    row["residue_atoms"] = [a.key for a in res.residue_atoms]
    if certify:
        row.update(_certify(res, target, digits, tol, cache))
    return row


def _compare(a, b, digits, tol) -> dict:
    with mpmath.workprec(digits_to_bits(digits) + 20):
        r = abs(a - b)
    res = _sci(r)
    with mpmath.workdps(30):
        ok = mpmath.mpf(res) <= mpmath.mpf(tol)
    return {"value": _dec(a, digits), "oracle": _dec(b, digits), "residual": res, "tolerance": tol, "status": "pass" if ok else "fail"}


@cli.command("table")
@click.argument("family", type=click.Choice(sorted(TABLE_FAMILIES)))
@click.option("--m", "m_range", default=None, help="Range for m, e.g. 1..3 (for adz: the leading exponent).")
@click.option("--k", "k_range", default=None, help="Range for k, e.g. 0..2 (for adz: the number of trailing ones).")
@prec_option
@click.option("--tol", type=str, default=None)
@click.option("--certify/--no-certify", default=True, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Emit rows as JSON.")
@click.option("--max-weight", type=int, default=R.WEIGHT_LIMIT, show_default=True)
@with_cache_options
def table_cmd(family, m_range, k_range, prec, tol, certify, as_json, max_weight, no_cache, stats):
    """Tabulate a reduction family over an (m, k) grid with certification columns."""
    dm, dk, build = TABLE_FAMILIES[family]
    ms, ks = parse_range(m_range or dm), parse_range(k_range or dk)
    grid = []
    for m in ms:
        for k in ks:
            target, weight = build(m, k)
            if weight > max_weight:
                _fail(EXIT_CAPABILITY, f"{target}: weight {weight} exceeds the configured limit {max_weight}")
            grid.append((m, k, target))
    cache = _open_cache(no_cache)
    rows = []
    try:
        for m, k, target in grid:
            rows.append(_table_row(family, m, k, target, prec, tol or default_tol(prec), certify, cache))
    except R.CapabilityError as exc:
        _fail(EXIT_CAPABILITY, str(exc))
    except ValueError as exc:
        _fail(EXIT_INPUT, str(exc))
    except AccuracyError as exc:
        _fail(EXIT_ACCURACY, str(exc))
    finally:
        _close_cache(cache, stats)
    if as_json:
        click.echo(json.dumps(rows, indent=2, sort_keys=True))
    else:
        for row in rows:
            line = f"m={row['m']} k={row['k']}  {row['target']}: {row['expr']}"
            if certify:
                line += f"  [residual {row['residual']}, {row['status']}]"
            click.echo(line)
    failed = certify and any(r["status"] != "pass" for r in rows)
    sys.exit(EXIT_FAIL if failed else 0)


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
