"""Necessity examples for the boundedness conditions.

Delta example: T^lam delta_0 (n, t) = |n|^{-2k lam} on t = 0, so
||T delta_0||_q^q = sum_n |n|^{-2k q lam}, finite iff 1/q < lam.

Box example: f(n, t) = |t|^{-alpha} chi(n / |t|^{1/2}) with chi the indicator
of {1/2 < |x_i| < 2}, and alpha = (k + 1)/p + eps.  The ratio
||T f||_q / ||f||_p over growing t_max separates the two sides of the
homogeneity line.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .counting import fit_slope, r2k_table
from .errors import EmptyInputError, check_budget
from .lattice import SparseFunction
from .norms import ExponentQuery, classify_exponents
from .operator import Box, OperatorConfig, apply

BOX_BUDGET = 10**8
GROWTH_THRESHOLD = 0.05


# ---------------------------------------------------------------------------
# the box function


@dataclass(frozen=True)
class BoxFunctionSpec:
    k: int
    alpha: float
    t_max: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")


def axis_range(t: int) -> tuple[int, int]:
    """Positive integers x with |t|^{1/2}/2 < x < 2|t|^{1/2}, as an inclusive range.

    Tested exactly as 4x^2 > |t| and x^2 < 4|t|.
    """
    t = abs(int(t))
    lo = math.isqrt(t) // 2
    while 4 * lo * lo <= t:
        lo += 1
    hi = math.isqrt(4 * t - 1) if t > 0 else 0
    return lo, hi


def axis_count(t: int) -> int:
    lo, hi = axis_range(t)
    return max(0, hi - lo + 1)


def level_sizes(k: int, t_max: int) -> np.ndarray:
    """Support size of f at a single level t (one sign of t), for t = 0..t_max."""
    out = np.zeros(t_max + 1, dtype=np.int64)
    for t in range(1, t_max + 1):
        out[t] = (2 * axis_count(t)) ** (2 * k)
    return out


def box_support_size(k: int, t_max: int) -> int:
    return int(2 * level_sizes(k, t_max).sum()) if t_max >= 1 else 0


def build_box_function(spec: BoxFunctionSpec, budget: int | None = None) -> SparseFunction:
    k = spec.k
    if spec.t_max < 1:
        return SparseFunction.zero(k)
    check_budget("box function support", box_support_size(k, spec.t_max), BOX_BUDGET if budget is None else budget)
    blocks, vals = [], []
    for t in range(1, spec.t_max + 1):
        lo, hi = axis_range(t)
        if hi < lo:
            continue
        pos = np.arange(lo, hi + 1, dtype=np.int64)
        axis = np.concatenate([-pos[::-1], pos])
        grid = np.stack([g.ravel() for g in np.meshgrid(*([axis] * (2 * k)), indexing="ij")], axis=1)
        for sign in (1, -1):
            rows = np.empty((len(grid), 2 * k + 1), dtype=np.int64)
            rows[:, :-1] = grid
            rows[:, -1] = sign * t
            blocks.append(rows)
            vals.append(np.full(len(grid), float(t) ** (-spec.alpha)))
    if not blocks:
        return SparseFunction.zero(k)
    return SparseFunction.from_rows(k, np.concatenate(blocks), np.concatenate(vals))


def box_function_lp_norm(spec: BoxFunctionSpec, p: float) -> float:
    """||f||_p from the per-level counts, without building f."""
    if spec.t_max < 1:
        return 0.0
    sizes = level_sizes(spec.k, spec.t_max)
    ts = np.nonzero(sizes)[0]
    if ts.size == 0:
        return 0.0
    if p == math.inf:
        return float(ts.min()) ** (-spec.alpha)
    terms = 2.0 * sizes[ts] * ts.astype(np.float64) ** (-spec.alpha * p)
    return math.fsum(terms) ** (1.0 / p)


# ---------------------------------------------------------------------------
# delta example


@dataclass
class DeltaScan:
    k: int
    lam: float
    q: float
    rows: list  # (R, partial sum)
    convergent: bool

    @property
    def verdict(self) -> str:
        return "convergent" if self.convergent else "divergent"


def delta_example_scan(k: int, lam: float, q: float, R_list) -> DeltaScan:
    """Partial sums of sum_{0 < |n| <= R} |n|^{-2k q lam}, grouped by |n|^2 = l."""
    R_list = [int(r) for r in R_list]
    if not R_list:
        return DeltaScan(k, lam, q, [], 1.0 / q < lam)
    L = max(R_list) ** 2
    r = r2k_table(L, k)
    ls = np.arange(1, L + 1, dtype=np.float64)
    terms = r[1:] * ls ** (-k * q * lam)
    partial = np.cumsum(terms)
    rows = [(R, float(partial[R * R - 1]) if R >= 1 else 0.0) for R in R_list]
    return DeltaScan(k, lam, q, rows, 1.0 / q < lam)


def delta_tail_bound(k: int, lam: float, q: float, R: float) -> float:
    """Integral comparison bound for k = 1: int_R^inf 2 pi r * r^{-2 k q lam} dr."""
    if k != 1:
        raise ValueError("the tail integral is provided for k = 1")
    e = 2 * k * q * lam
    if e <= 2:
        return math.inf
    return 2 * math.pi * R ** (2 - e) / (e - 2)


# ---------------------------------------------------------------------------
# box example: evaluating T f on the support of f


def _phi(alpha: float, t_max: int) -> np.ndarray:
    phi = np.zeros(t_max + 1)
    phi[1:] = np.arange(1, t_max + 1, dtype=np.float64) ** (-alpha)
    return phi


def box_operator_values(spec: BoxFunctionSpec, lam: float, points: np.ndarray, budget=None) -> np.ndarray:
    """Exact T^lam f at the given rows, f the box function of ``spec``."""
    points = np.ascontiguousarray(np.asarray(points, dtype=np.int64))
    if spec.k == 1:
        return _kernels.box_operator_many(points, spec.t_max, spec.alpha, 2.0 * lam, _phi(spec.alpha, spec.t_max))
    f = build_box_function(spec, budget)
    umax = math.isqrt(4 * spec.t_max - 1)
    reach = max(umax, int(np.abs(points[:, :-1]).max(initial=0)))
    tf = apply(OperatorConfig(spec.k, lam), f, Box(reach, int(np.abs(points[:, -1]).max(initial=0))), budget)
    return tf.values_at(points)


def representative_points(t_max: int, t_from: int = 1) -> np.ndarray:
    """For k = 1: t > 0 and n in the open positive quadrant, one per symmetry orbit.

    Signed permutations sigma of n satisfy T f(sigma n, det(sigma) t) = T f(n, t)
    for the box function, so each representative stands for 8 support points.
    """
    blocks = []
    for t in range(t_from, t_max + 1):
        lo, hi = axis_range(t)
        if hi < lo:
            continue
        pos = np.arange(lo, hi + 1, dtype=np.int64)
        g1, g2 = np.meshgrid(pos, pos, indexing="ij")
        rows = np.empty((g1.size, 3), dtype=np.int64)
        rows[:, 0] = g1.ravel()
        rows[:, 1] = g2.ravel()
        rows[:, 2] = t
        blocks.append(rows)
    if not blocks:
        return np.zeros((0, 3), dtype=np.int64)
    return np.concatenate(blocks)


@dataclass
class NormEstimate:
    value: float  # sum of (T f)^q over the box support
    stderr: float
    exact: bool
    evaluated: int


def _tf_q_sum_k1(spec: BoxFunctionSpec, lam: float, q: float, max_exact_points: int, exact_prefix_points: int,
                 samples_per_block: int, n_blocks: int, rng) -> NormEstimate:
    t_max = spec.t_max
    sizes = np.array([axis_count(t) ** 2 for t in range(t_max + 1)], dtype=np.int64)
    sizes[0] = 0
    total_reps = int(sizes.sum())
    phi = _phi(spec.alpha, t_max)
    lam2 = 2.0 * lam
    if total_reps <= max_exact_points:
        pts = representative_points(t_max)
        vals = _kernels.box_operator_many(pts, t_max, spec.alpha, lam2, phi)
        return NormEstimate(8.0 * math.fsum(vals**q), 0.0, True, len(pts))

    # small |t| carries most of the q-sum and is cheap: evaluate a prefix of levels exactly
    cum = np.cumsum(sizes)
    t_cut = max(1, int(np.searchsorted(cum, exact_prefix_points, side="right")) - 1)
    pts = representative_points(t_cut)
    est = math.fsum(_kernels.box_operator_many(pts, t_max, spec.alpha, lam2, phi) ** q)
    var, evaluated = 0.0, len(pts)
    # stratified estimate over the remaining levels: blocks with equal point mass
    rest = int(cum[-1] - cum[t_cut])
    targets = cum[t_cut] + np.linspace(0, rest, n_blocks + 1)[1:-1]
    edges = np.searchsorted(cum, targets, side="left")
    bounds = [t_cut + 1] + sorted(set(int(e) + 1 for e in edges if e > t_cut)) + [t_max + 1]
    for a, b in zip(bounds[:-1], bounds[1:]):
        if b <= a:
            continue
        mass = int(sizes[a:b].sum())
        if mass == 0:
            continue
        if mass <= samples_per_block:
            pts = representative_points(b - 1, a)
            vals = _kernels.box_operator_many(pts, t_max, spec.alpha, lam2, phi)
            est += math.fsum(vals**q)
            evaluated += len(pts)
            continue
        probs = sizes[a:b] / mass
        levels = a + rng.choice(b - a, size=samples_per_block, p=probs)
        pts = np.empty((samples_per_block, 3), dtype=np.int64)
        for i, t in enumerate(levels.tolist()):
            lo, hi = axis_range(t)
            pts[i] = (rng.integers(lo, hi + 1), rng.integers(lo, hi + 1), t)
        vals = _kernels.box_operator_many(pts, t_max, spec.alpha, lam2, phi) ** q
        est += mass * float(vals.mean())
        var += mass**2 * float(vals.var(ddof=1)) / samples_per_block
        evaluated += samples_per_block
    return NormEstimate(8.0 * est, 8.0 * math.sqrt(var), False, evaluated)


def box_operator_q_sum(
    spec: BoxFunctionSpec,
    lam: float,
    q: float,
    *,
    max_exact_points: int = 2_000_000,
    exact_prefix_points: int = 50_000,
    samples_per_block: int = 1000,
    n_blocks: int = 40,
    seed: int = 0,
    budget=None,
) -> NormEstimate:
    """sum of (T^lam f)^q over supp f.

    For k = 1 the sum is exact while the orbit representatives number at most
    ``max_exact_points``.  Beyond that, levels holding the first
    ``exact_prefix_points`` representatives are summed exactly and the rest is
    estimated by stratified sampling of exactly evaluated points (seeded).
    """
    if spec.t_max < 1:
        raise EmptyInputError("t_max < 1 gives the zero function")
    if spec.k == 1:
        return _tf_q_sum_k1(spec, lam, q, max_exact_points, exact_prefix_points, samples_per_block, n_blocks,
                            np.random.default_rng(seed))
    f = build_box_function(spec, budget)
    vals = box_operator_values(spec, lam, f.rows, budget)
    return NormEstimate(math.fsum(vals**q), 0.0, True, len(vals))


@dataclass
class NecessityRow:
    t_max: int
    f_norm: float
    Tf_norm: float
    ratio: float
    exact: bool
    Tf_stderr: float


@dataclass
class NecessityScan:
    k: int
    lam: float
    p: float
    q: float
    epsilon: float
    alpha: float
    rows: list
    slope: float
    classification: str
    seed: int
    meta: dict = field(default_factory=dict)

    @property
    def growing(self) -> bool:
        return self.slope >= GROWTH_THRESHOLD

    @property
    def consistent(self) -> bool:
        if self.classification == "unbounded":
            return self.growing
        if self.classification in ("bounded_k1", "conjectured_bounded"):
            return not self.growing
        return True

    @property
    def monotone_increasing(self) -> bool:
        r = [row.ratio for row in self.rows]
        return all(b > a for a, b in zip(r, r[1:]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(
            f"# k={self.k} lambda={self.lam!r} p={self.p!r} q={self.q!r} epsilon={self.epsilon!r} "
            f"alpha={self.alpha:.15g} seed={self.seed} classification={self.classification} "
            f"slope={self.slope:.15g}\n"
        )
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t_max", "f_norm", "Tf_norm", "ratio"])
        for r in self.rows:
            w.writerow([r.t_max, f"{r.f_norm:.15g}", f"{r.Tf_norm:.15g}", f"{r.ratio:.15g}"])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "spec": {"k": self.k, "lambda": self.lam, "p": self.p, "q": self.q,
                     "epsilon": self.epsilon, "alpha": self.alpha, "seed": self.seed},
            "rows": [asdict(r) for r in self.rows],
            "slope": self.slope,
            "growing": self.growing,
            "classification": self.classification,
            "consistent": self.consistent,
            **self.meta,
        }


def necessity_scan(k: int, lam: float, p: float, q: float, t_max_list, epsilon: float, *,
                   seed: int = 0, max_exact_points: int = 2_000_000, exact_prefix_points: int = 50_000,
                   samples_per_block: int = 1000,
                   n_blocks: int = 40, budget=None) -> NecessityScan:
    """Ratio ||T f||_q / ||f||_p on the box support for each t_max, alpha = (k+1)/p + epsilon."""
    if not (1 <= p < math.inf and 1 <= q < math.inf):
        raise ValueError(f"p and q must be finite and >= 1, got p={p}, q={q}")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    t_max_list = [int(t) for t in t_max_list]
    if not t_max_list or min(t_max_list) < 1:
        raise EmptyInputError("every t_max must be >= 1 (t_max < 1 gives the zero function)")
    alpha = (k + 1) / p + epsilon
    rows = []
    for t_max in t_max_list:
        spec = BoxFunctionSpec(k, alpha, t_max)
        fn = box_function_lp_norm(spec, p)
        est = box_operator_q_sum(
            spec,
            lam,
            q,
            max_exact_points=max_exact_points,
            exact_prefix_points=exact_prefix_points,
            samples_per_block=samples_per_block,
            n_blocks=n_blocks,
            seed=seed,
            budget=budget,
        )
        tn = est.value ** (1.0 / q)
        # delta method: d(S^{1/q}) = S^{1/q - 1} dS / q
        se = tn * est.stderr / (q * est.value) if est.value > 0 else 0.0
        rows.append(NecessityRow(t_max, fn, tn, tn / fn, est.exact, se))
    slope = fit_slope(np.log([r.t_max for r in rows]), np.log([r.ratio for r in rows]))
    label = classify_exponents(ExponentQuery(k, lam, p, q)).label
    return NecessityScan(k, lam, p, q, epsilon, alpha, rows, slope, label, seed)


@dataclass
class LowerBoundCheck:
    exponent: float
    constant: float
    levels: list  # (t, min ratio T f / t^{exponent} over sampled n)
    holds: bool


def pointwise_lower_bound(k: int, lam: float, alpha: float, t_max: int, levels, per_level: int = 16,
                          seed: int = 0) -> LowerBoundCheck:
    """Fit C at the smallest sampled level so that T f(n, t) >= C t^{k(1 - lam) - alpha}, then test
    the bound at every larger sampled level (k = 1)."""
    if k != 1:
        raise ValueError("the pointwise diagnostic is provided for k = 1")
    spec = BoxFunctionSpec(k, alpha, t_max)
    rng = np.random.default_rng(seed)
    e = k * (1 - lam) - alpha
    out = []
    for t in sorted(int(t) for t in levels):
        lo, hi = axis_range(t)
        if hi < lo:
            continue
        pts = np.stack([rng.integers(lo, hi + 1, per_level), rng.integers(lo, hi + 1, per_level),
                        np.full(per_level, t)], axis=1).astype(np.int64)
        vals = box_operator_values(spec, lam, pts)
        out.append((t, float(np.min(vals / float(t) ** e))))
    if not out:
        raise EmptyInputError("no sampled level has support")
    c = out[0][1]
    return LowerBoundCheck(e, c, out, all(r >= c for _, r in out[1:]))
