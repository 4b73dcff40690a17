"""Alternating multiple zeta values: exact reduction, certified numerics, log integrals."""

from .model import ApproxReal, ConstAtom, IndexParseError, SignedIndex, SymExpr, parse_index, print_index
from .numeric import ConstantCache, eval_alt_outer, eval_expr, eval_mpl_at
from .reduction import reduce_target
from .verify import run_suite

__version__ = "0.1.0"

__all__ = [
    "ApproxReal",
    "ConstAtom",
    "ConstantCache",
    "IndexParseError",
    "SignedIndex",
    "SymExpr",
    "eval_alt_outer",
    "eval_expr",
    "eval_mpl_at",
    "parse_index",
    "print_index",
    "reduce_target",
    "run_suite",
]
