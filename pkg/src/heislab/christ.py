"""Christ's refinement lemma run on concrete finite sets.

Given E and alpha, F = {x : alpha < T chi_E(x) < 2 alpha} and
beta = <chi_F, T chi_E> / |E|.  Then

    E_{r+1} = {x in E_r : T* chi_{F_r}(x) >= delta_r beta}
    F_{r+1} = {x in F_r : T chi_{E_{r+1}}(x) >= eps_r alpha}

The default schedule c_r = 4^{-r}, delta_r = c_r / 4, eps_r = c_r / 8 makes
<chi_{F_r}, T chi_{E_r}> >= c_r alpha |F| hold exactly at every level, using
only the sandwich alpha |F| < beta |E| < 2 alpha |F|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyInputError, FalsifiedInvariantError
from .formats import set_to_json
from .lattice import ADJOINT, FORWARD, LatticeSet, iterate_rows, shell_points
from .operator import DYADIC, OperatorConfig, apply

SCHEMA = "christ-trace-1"
REL_TOL = 1e-12
ALPHA_NUDGE = 1 + 2.0**-20  # moves alpha off ties with values of T chi_E


@dataclass(frozen=True)
class Schedule:
    """c_r = ratio^{-r}; delta_r = delta_frac * c_r; eps_r = eps_frac * c_r."""

    ratio: float = 4.0
    delta_frac: float = 0.25
    eps_frac: float = 0.125

    def c(self, r: int) -> float:
        return self.ratio ** (-r)

    def delta(self, r: int) -> float:
        return self.delta_frac * self.c(r)

    def eps(self, r: int) -> float:
        return self.eps_frac * self.c(r)

    @property
    def is_default(self) -> bool:
        return self == Schedule()

    def as_dict(self) -> dict:
        return {"ratio": self.ratio, "delta_frac": self.delta_frac, "eps_frac": self.eps_frac}


@dataclass(frozen=True)
class ChristConfig:
    operator: OperatorConfig
    alpha: float
    r_max: int = 4
    schedule: Schedule = field(default_factory=Schedule)

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.operator.mode != DYADIC:
            raise ValueError("Christ iteration is run on a forward dyadic piece T_j")
        if self.r_max < 0:
            raise ValueError("r_max must be >= 0")


@dataclass
class ChristLevel:
    r: int
    E: LatticeSet
    F: LatticeSet
    pairing: float  # <chi_{F_r}, T chi_{E_r}>
    bound: float  # c_r alpha |F|
    certified: bool
    delta_threshold: float | None = None  # delta_r beta, used to build E_{r+1}
    eps_threshold: float | None = None  # eps_r alpha, used to build F_{r+1}
    christ1: float | None = None  # <T* chi_{F_r}, chi_{E_{r+1}}>


@dataclass
class ChristTrace:
    config: ChristConfig
    alpha: float
    beta: float
    levels: list

    @property
    def E(self) -> LatticeSet:
        return self.levels[0].E

    @property
    def F(self) -> LatticeSet:
        return self.levels[0].F

    def sandwich(self) -> tuple[float, float, float]:
        """(alpha |F|, beta |E|, 2 alpha |F|)."""
        af = self.alpha * len(self.F)
        return af, self.beta * len(self.E), 2 * af

    def all_certified(self) -> bool:
        return all(level.certified for level in self.levels)

    def to_json(self) -> dict:
        op = self.config.operator
        return {
            "schema": SCHEMA,
            "k": op.k,
            "lambda": op.lam,
            "j": op.j,
            "alpha": self.alpha,
            "beta": self.beta,
            "r_max": self.config.r_max,
            "schedule": self.config.schedule.as_dict(),
            "levels": [
                {
                    "r": lv.r,
                    "E": set_to_json(lv.E)["points"],
                    "F": set_to_json(lv.F)["points"],
                    "pairing": lv.pairing,
                    "bound": lv.bound,
                    "certified": lv.certified,
                    "delta_threshold": lv.delta_threshold,
                    "eps_threshold": lv.eps_threshold,
                    "christ1": lv.christ1,
                }
                for lv in self.levels
            ],
        }


def _values_on(config: OperatorConfig, s: LatticeSet, where: LatticeSet) -> np.ndarray:
    """(T chi_s) evaluated at the rows of ``where``."""
    return apply(config, s.indicator()).values_at(where.rows)


def initialize(E: LatticeSet, config: ChristConfig) -> tuple[LatticeSet, float]:
    """Return (F, beta).  An empty F is returned with beta = 0."""
    if len(E) == 0:
        raise EmptyInputError("Christ iteration needs a nonempty set E")
    if E.k != config.operator.k:
        raise ValueError(f"set has k={E.k}, operator has k={config.operator.k}")
    t_e = apply(config.operator, E.indicator())
    a = config.alpha
    mask = (t_e.values > a) & (t_e.values < 2 * a)
    F = LatticeSet.from_rows(E.k, t_e.rows[mask])
    if len(F) == 0:
        return F, 0.0
    beta = math.fsum(t_e.values[mask]) / len(E)
    return F, beta


def iterate(E: LatticeSet, config: ChristConfig) -> ChristTrace:
    F, beta = initialize(E, config)
    if len(F) == 0:
        raise EmptyInputError(f"F is empty for alpha={config.alpha}; the lemma needs |F| > 0")
    op, adj = config.operator, config.operator.adjoint()
    sched, alpha = config.schedule, config.alpha
    size_f = len(F)

    def level(r, e_r, f_r, pair):
        bound = sched.c(r) * alpha * size_f
        return ChristLevel(r, e_r, f_r, pair, bound, pair >= bound * (1 - REL_TOL))

    levels = [level(0, E, F, beta * len(E))]
    for r in range(config.r_max):
        cur = levels[-1]
        cur.delta_threshold = sched.delta(r) * beta
        cur.eps_threshold = sched.eps(r) * alpha

        t_star = _values_on(adj, cur.F, cur.E)
        keep_e = t_star >= cur.delta_threshold
        e_next = cur.E.filter(keep_e)
        cur.christ1 = math.fsum(t_star[keep_e])

        t_e = _values_on(op, e_next, cur.F) if len(e_next) else np.zeros(len(cur.F))
        keep_f = t_e >= cur.eps_threshold
        f_next = cur.F.filter(keep_f)

        if (len(e_next) == 0 or len(f_next) == 0) and sched.is_default:
            raise FalsifiedInvariantError(
                f"level {r + 1}: |E|={len(e_next)}, |F|={len(f_next)} although the default "
                "schedule certifies both nonempty"
            )
        levels.append(level(r + 1, e_next, f_next, math.fsum(t_e[keep_f])))
        if len(e_next) == 0 or len(f_next) == 0:
            break
    return ChristTrace(config, alpha, beta, levels)


def alpha_sweep(E: LatticeSet, operator: OperatorConfig) -> list[float]:
    """Dyadic alphas 2^i (1 + 2^-20) spanning the range of T chi_E, keeping those with |F| > 0.

    The shift keeps values that are exact powers of two off the open endpoints,
    so every value of T chi_E lies in some (alpha, 2 alpha).
    """
    vals = apply(operator, E.indicator()).values
    if vals.size == 0:
        return []
    lo = math.floor(math.log2(vals.min())) - 1
    hi = math.ceil(math.log2(vals.max()))
    out = []
    for i in range(lo, hi + 1):
        a = 2.0**i * ALPHA_NUDGE
        if np.any((vals > a) & (vals < 2 * a)):
            out.append(a)
    return out


def median_alpha(E: LatticeSet, operator: OperatorConfig) -> float:
    """Half the median nonzero value of T chi_E, nudged up when F would be empty.

    T chi_E takes values in w * {1, 2, ...}, so the median often sits exactly on
    the open endpoint 2 alpha; raising alpha by a relative 2^-20 puts it inside F.
    """
    vals = apply(operator, E.indicator()).values
    vals = vals[vals > 0]
    if vals.size == 0:
        raise EmptyInputError("T chi_E vanishes identically")
    a = float(np.median(vals)) / 2
    if not np.any((vals > a) & (vals < 2 * a)):
        a *= ALPHA_NUDGE
    return a


def _shell_hits(rows: np.ndarray, target: LatticeSet, j: int, direction: str) -> np.ndarray:
    """#{m in shell j : Omega(x; m) (or Omega*) lies in target}, by direct enumeration."""
    k = target.k
    shell = shell_points(k, j).points
    if len(rows) == 0:
        return np.zeros(0, dtype=np.int64)
    imgs = iterate_rows(rows[:, None, :], shell[None, :, :], k, direction)
    hit = target.contains_rows(imgs.reshape(-1, 2 * k + 1)).reshape(len(rows), len(shell))
    return hit.sum(axis=1)


def verify_trace(trace: ChristTrace) -> dict:
    """Re-check every certified relation of a trace.

    Pointwise relations are re-derived from shell counts with Omega and
    Omega* directly, independent of the operator code.
    """
    op = trace.config.operator
    sched = trace.config.schedule
    scale = 2.0 ** (2 * op.k * op.lam * op.j)
    af, be, two_af = trace.sandwich()
    checks = {
        "sandwich": af < be < two_af,
        "nonempty": all(len(lv.E) > 0 and len(lv.F) > 0 for lv in trace.levels),
        "certified": trace.all_certified(),
        "nested": all(
            b.E.issubset(a.E) and b.F.issubset(a.F) for a, b in zip(trace.levels, trace.levels[1:])
        ),
        "pointwise_E": True,
        "pointwise_F": True,
    }
    for r, (cur, nxt) in enumerate(zip(trace.levels, trace.levels[1:])):
        need_e = scale * sched.delta(r) * trace.beta
        hits_e = _shell_hits(nxt.E.rows, cur.F, op.j, ADJOINT)
        if np.any(hits_e < need_e * (1 - REL_TOL)):
            checks["pointwise_E"] = False
        need_f = scale * sched.eps(r) * trace.alpha
        hits_f = _shell_hits(nxt.F.rows, nxt.E, op.j, FORWARD)
        if np.any(hits_f < need_f * (1 - REL_TOL)):
            checks["pointwise_F"] = False
    return checks
