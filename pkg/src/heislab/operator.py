"""Exact application of T^lambda, its dyadic pieces T_j and their adjoints.

Evaluation is support driven: every support point of the input is pushed
to the output points it can reach, so nothing is truncated.

    T f(n, t)   = sum_{m != 0} f(n - m, t - w(n, m)) |m|^{-2k lam}
    T_j f(n, t) = 2^{-2k lam j} sum_{m in shell j} f(n - m, t - w(n, m))
    T_j* g(n, t) = 2^{-2k lam j} sum_{m in shell j} g(n + m, t + w(n, m))
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import check_budget
from .lattice import (
    LatticeSet,
    SparseFunction,
    match_rows,
    norm_power,
    omega_rows,
    shell_points,
)

FULL = "full"
DYADIC = "dyadic"
DYADIC_ADJOINT = "adjoint"
MODES = (FULL, DYADIC, DYADIC_ADJOINT)

REACHABLE = "reachable"


@dataclass(frozen=True)
class OperatorConfig:
    k: int
    lam: float
    mode: str = FULL
    j: int | None = None
    # "dyadic": constant 2^{-2k lam j} on shell j; "kernel": |m|^{-2k lam} restricted to shell j
    weighting: str = "dyadic"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode != FULL:
            if self.j is None or self.j < 0:
                raise ValueError("dyadic modes need a shell index j >= 0")
        if self.weighting not in ("dyadic", "kernel"):
            raise ValueError(f"weighting must be 'dyadic' or 'kernel', got {self.weighting!r}")

    @property
    def is_dyadic(self) -> bool:
        return self.mode != FULL

    @property
    def shell_weight(self) -> float:
        return dyadic_weight(self.k, self.lam, self.j)

    def adjoint(self) -> "OperatorConfig":
        if self.mode == FULL:
            raise ValueError("adjoint is only provided for the dyadic pieces")
        mode = DYADIC_ADJOINT if self.mode == DYADIC else DYADIC
        return OperatorConfig(self.k, self.lam, mode, self.j, self.weighting)


@dataclass(frozen=True)
class Box:
    """Output box {max_i |n_i| <= R, |t| <= T}."""

    R: int
    T: int

    def __post_init__(self):
        if self.R < 0 or self.T < 0:
            raise ValueError("box radii must be non-negative")

    def contains_rows(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows)
        return (np.abs(rows[:, :-1]).max(axis=1, initial=0) <= self.R) & (np.abs(rows[:, -1]) <= self.T)

    def n_grid(self, k: int) -> np.ndarray:
        axis = np.arange(-self.R, self.R + 1, dtype=np.int64)
        grids = np.meshgrid(*([axis] * (2 * k)), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def n_count(self, k: int) -> int:
        return (2 * self.R + 1) ** (2 * k)

    @classmethod
    def parse(cls, text: str) -> "Box":
        r, t = (int(x) for x in text.split(","))
        return cls(r, t)


def dyadic_weight(k: int, lam: float, j: int) -> float:
    return 2.0 ** (-2.0 * k * lam * j)


def kernel_weight(norm_sq, k: int, lam: float):
    return norm_power(norm_sq, 2.0 * k * lam)


def _check_input(config: OperatorConfig, f: SparseFunction):
    if f.k != config.k:
        raise ValueError(f"function has k={f.k}, operator has k={config.k}")


def _scatter_dyadic(config: OperatorConfig, rows: np.ndarray, values: np.ndarray, budget=None):
    k = config.k
    shell = shell_points(k, config.j).points
    check_budget("dyadic scatter", len(rows) * len(shell), budget)
    n = rows[:, None, :-1]
    s = rows[:, None, -1]
    w = omega_rows(n, shell[None, :, :], k)
    sign = 1 if config.mode == DYADIC else -1
    out = np.empty((len(rows), len(shell), 2 * k + 1), dtype=np.int64)
    out[..., :-1] = n + sign * shell[None, :, :]
    out[..., -1] = s + sign * w
    if config.weighting == "kernel":
        per_m = kernel_weight(np.einsum("ij,ij->i", shell, shell), k, config.lam)
    else:
        per_m = np.full(len(shell), config.shell_weight)
    vals = (values[:, None] * per_m[None, :]).ravel()
    return out.reshape(-1, 2 * k + 1), vals


def _scatter_full(config: OperatorConfig, rows: np.ndarray, values: np.ndarray, box: Box, budget=None):
    k, lam = config.k, config.lam
    check_budget("full-mode scatter", len(rows) * box.n_count(k), budget)
    grid = box.n_grid(k)
    out_rows, out_vals = [], []
    for (u_and_s, v) in zip(rows, values):
        u, s = u_and_s[:-1], u_and_s[-1]
        # s = t + w(n, u)  <=>  t = s - w(n, u), with m = n - u != 0
        t = s - omega_rows(grid, u[None, :], k)
        m = grid - u[None, :]
        sq = np.einsum("ij,ij->i", m, m)
        keep = (sq > 0) & (np.abs(t) <= box.T)
        if not keep.any():
            continue
        r = np.empty((int(keep.sum()), 2 * k + 1), dtype=np.int64)
        r[:, :-1] = grid[keep]
        r[:, -1] = t[keep]
        out_rows.append(r)
        out_vals.append(v * kernel_weight(sq[keep], k, lam))
    if not out_rows:
        return np.zeros((0, 2 * k + 1), dtype=np.int64), np.zeros(0)
    return np.concatenate(out_rows), np.concatenate(out_vals)


def apply(config: OperatorConfig, f: SparseFunction, domain=REACHABLE, budget=None) -> SparseFunction:
    """Apply the configured operator to ``f`` on ``domain`` (a Box or REACHABLE)."""
    _check_input(config, f)
    if config.mode == FULL:
        if not isinstance(domain, Box):
            raise ValueError("full mode has unbounded reach: an explicit output Box is required")
        rows, vals = _scatter_full(config, f.rows, f.values, domain, budget)
    else:
        if not (isinstance(domain, Box) or domain == REACHABLE):
            raise ValueError(f"domain must be a Box or {REACHABLE!r}")
        if len(f) == 0:
            return SparseFunction.zero(config.k)
        rows, vals = _scatter_dyadic(config, f.rows, f.values, budget)
        if isinstance(domain, Box):
            keep = domain.contains_rows(rows)
            rows, vals = rows[keep], vals[keep]
    return SparseFunction.from_rows(config.k, rows, vals)


def reachable_domain(config: OperatorConfig, f: SparseFunction) -> LatticeSet:
    """Every point where the dyadic output can be nonzero (exact, finite)."""
    if not config.is_dyadic:
        raise ValueError("the reachable domain is finite only in dyadic modes")
    _check_input(config, f)
    if len(f) == 0:
        return LatticeSet(config.k)
    rows, _ = _scatter_dyadic(config, f.rows, np.ones(len(f)))
    return LatticeSet.from_rows(config.k, rows)


def pairing(f: SparseFunction, g: SparseFunction) -> float:
    """<f, g> = sum over the common support of f * g."""
    if f.k != g.k:
        raise ValueError(f"dimension mismatch: k={f.k} vs k={g.k}")
    if len(f) > len(g):
        f, g = g, f
    idx = match_rows(f.rows, g.rows)
    hit = idx >= 0
    return float(np.sum(f.values[hit] * g.values[idx[hit]]))


def box_points(box: Box, k: int) -> np.ndarray:
    """All rows (n, t) of a box; used by oracles and small experiments."""
    grid = box.n_grid(k)
    ts = np.arange(-box.T, box.T + 1, dtype=np.int64)
    out = np.empty((len(grid) * len(ts), 2 * k + 1), dtype=np.int64)
    out[:, :-1] = np.repeat(grid, len(ts), axis=0)
    out[:, -1] = np.tile(ts, len(grid))
    return out


def dyadic_partial_sum(
    k: int, lam: float, f: SparseFunction, J: int, box: Box, weighting: str = "dyadic"
) -> SparseFunction:
    """sum_{j=0}^{J} T_j f restricted to ``box``."""
    pieces = [apply(OperatorConfig(k, lam, DYADIC, j, weighting), f, box) for j in range(J + 1)]
    rows = np.concatenate([p.rows for p in pieces]) if pieces else np.zeros((0, 2 * k + 1), np.int64)
    vals = np.concatenate([p.values for p in pieces]) if pieces else np.zeros(0)
    return SparseFunction.from_rows(k, rows, vals)


__all__ = [
    "OperatorConfig",
    "Box",
    "REACHABLE",
    "FULL",
    "DYADIC",
    "DYADIC_ADJOINT",
    "apply",
    "pairing",
    "reachable_domain",
    "dyadic_weight",
    "kernel_weight",
    "box_points",
    "dyadic_partial_sum",
]

