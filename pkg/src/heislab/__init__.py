"""Exact discrete fractional integration on the Heisenberg lattice Z^{2k} x Z."""

__version__ = "0.1.0"

from .christ import ChristConfig, ChristTrace, Schedule, alpha_sweep, iterate, verify_trace
from .counting import (
    count_N1,
    count_N2,
    count_S,
    count_S_tilde,
    divisor_count,
    gauss_circle_check,
    growth_report,
    quadric_count,
    r2k_count,
    r2k_table,
    random_set,
)
from .errors import BudgetExceededError, EmptyInputError, FalsifiedInvariantError
from .formats import read_function, read_set, write_function, write_set
from .lattice import LatticePoint, LatticeSet, SparseFunction, iterate_map, shell_points, symplectic_form
from .norms import ExponentQuery, classify_exponents, lorentz_norm, lp_norm, weak_norm
from .operator import Box, OperatorConfig, apply, pairing
from .sharpness import BoxFunctionSpec, build_box_function, delta_example_scan, necessity_scan

__all__ = [
    "Box",
    "BoxFunctionSpec",
    "BudgetExceededError",
    "ChristConfig",
    "ChristTrace",
    "EmptyInputError",
    "ExponentQuery",
    "FalsifiedInvariantError",
    "LatticePoint",
    "LatticeSet",
    "OperatorConfig",
    "Schedule",
    "SparseFunction",
    "alpha_sweep",
    "apply",
    "build_box_function",
    "classify_exponents",
    "count_N1",
    "count_N2",
    "count_S",
    "count_S_tilde",
    "delta_example_scan",
    "divisor_count",
    "gauss_circle_check",
    "growth_report",
    "iterate",
    "iterate_map",
    "lorentz_norm",
    "lp_norm",
    "necessity_scan",
    "pairing",
    "quadric_count",
    "r2k_count",
    "r2k_table",
    "random_set",
    "read_function",
    "read_set",
    "shell_points",
    "symplectic_form",
    "verify_trace",
    "weak_norm",
    "write_function",
    "write_set",
]
