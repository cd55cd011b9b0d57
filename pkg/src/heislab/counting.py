"""Exact counting: divisors, sums of squares, the symplectic quadric, the
triple-chain sums S and S~ (k = 1), the k = 2 counts N1 / N2, and
growth-exponent reports.

Every count is an exact Python/NumPy integer.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import check_budget
from .lattice import (
    ADJOINT,
    FORWARD,
    LatticePoint,
    LatticeSet,
    _as_point,
    iterate_rows,
    shell_points,
    symplectic_form,
)

DIVISOR_INPUT_LIMIT = 2**50


# ---------------------------------------------------------------------------
# divisors


def divisors(n: int) -> list[int]:
    """Sorted positive divisors of n by trial division up to sqrt(n)."""
    n = int(n)
    if n <= 0:
        raise ValueError(f"divisors need n >= 1, got {n}")
    if n > DIVISOR_INPUT_LIMIT:
        raise ValueError(f"trial division is limited to n <= 2^50, got {n}")
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def divisor_count(n: int) -> int:
    return len(divisors(n))


# ---------------------------------------------------------------------------
# sums of squares


def r2k_table(L: int, k: int, budget: int | None = None) -> np.ndarray:
    """r_{2k}(l) for l = 0..L: ordered signed representations as sums of 2k squares.

    r_2 is a histogram of a^2 + b^2 over the disc; further coordinates are
    added one at a time via r_d(l) = sum_x r_{d-1}(l - x^2).
    """
    if L < 0:
        raise ValueError("L must be >= 0")
    if k < 1:
        raise ValueError("k must be >= 1")
    root = math.isqrt(L)
    check_budget(f"r_{2 * k} table up to {L}", (2 * root + 1) ** 2 + (2 * k - 2) * (L + 1) * (root + 1), budget)
    xs = np.arange(-root, root + 1, dtype=np.int64)
    sq = xs * xs
    table = np.zeros(L + 1, dtype=np.int64)
    step = max(1, 2**22 // len(xs))
    for i in range(0, len(xs), step):
        s2 = (sq[i : i + step, None] + sq[None, :]).ravel()
        table += np.bincount(s2[s2 <= L], minlength=L + 1)
    for _ in range(2 * k - 2):
        nxt = np.zeros(L + 1, dtype=np.int64)
        for x in range(0, root + 1):
            x2 = x * x
            nxt[x2:] += (1 if x == 0 else 2) * table[: L + 1 - x2]
        table = nxt
    return table


def r2k_count(l: int, k: int, budget: int | None = None) -> int:
    if l < 0:
        raise ValueError("l must be >= 0")
    return int(r2k_table(l, k, budget)[l])


@dataclass(frozen=True)
class GaussCheck:
    L: int
    k: int
    total: int
    main_term: float
    error: float


def gauss_circle_check(L: int, k: int = 1, budget: int | None = None) -> GaussCheck:
    """sum_{l=1}^{L} r_{2k}(l) against pi^k L^k / k!."""
    if L < 1:
        raise ValueError("L must be >= 1")
    table = r2k_table(L, k, budget)
    total = int(table[1:].sum())
    main = math.pi**k * L**k / math.gamma(k + 1)
    return GaussCheck(L, k, total, main, total - main)


# ---------------------------------------------------------------------------
# the quadric 2 t12 t21 - 2 t11 t22 = c


def _band_values(band) -> np.ndarray:
    lo, hi = int(band[0]), int(band[1])
    if lo < 0 or hi < lo:
        raise ValueError(f"band must satisfy 0 <= lo <= hi, got {band}")
    pos = np.arange(max(lo, 1), hi + 1, dtype=np.int64)
    vals = np.concatenate([-pos[::-1], pos])
    if lo == 0:
        vals = np.concatenate([vals[: len(pos)], [0], vals[len(pos):]])
    return vals


def _quadric_brute(c: int, band) -> int:
    vals = _band_values(band)
    prods = np.multiply.outer(vals, vals).ravel()
    # every quadruple (t11, t12, t21, t22): w(t1, t2) = 2 t12 t21 - 2 t11 t22
    w = 2 * (prods[:, None] - prods[None, :])
    return int(np.count_nonzero(w == c))


@dataclass(frozen=True)
class QuadricBreakdown:
    count: int
    free_pairs: int
    zero_residual_pairs: int


def _divisor_pairs_in_band(m: int, lo: int, hi: int) -> int:
    return sum(1 for d in divisors(m) if lo <= d <= hi and lo <= m // d <= hi)


def quadric_breakdown(c: int, band) -> QuadricBreakdown:
    """Divisor-method count with the zero-residual free pairs reported separately."""
    lo, hi = int(band[0]), int(band[1])
    if lo < 1:
        raise ValueError("the divisor method needs a band with B_lo >= 1 (it cannot see zero factors)")
    vals = _band_values(band)
    free = len(vals) ** 2
    if c % 2:
        return QuadricBreakdown(0, free, 0)
    half = c // 2
    cache: dict[int, int] = {}
    count = 0
    zero = 0
    for t11 in vals.tolist():
        for t22 in vals.tolist():
            res = half + t11 * t22  # t12 t21 = res
            if res == 0:
                zero += 1
                continue
            m = abs(res)
            if m not in cache:
                cache[m] = _divisor_pairs_in_band(m, lo, hi)
            # each divisor pair gives t12 = +-d with t21 = res / t12
            count += 2 * cache[m]
    return QuadricBreakdown(count, free, zero)


def quadric_count(c: int, band, method: str = "divisor") -> int:
    if method == "brute":
        return _quadric_brute(int(c), band)
    if method == "divisor":
        return quadric_breakdown(int(c), band).count
    raise ValueError(f"method must be 'brute' or 'divisor', got {method!r}")


def default_band(j: int) -> tuple[int, int]:
    return (max(1, 2 ** (j - 1)) if j >= 1 else 1, 2 ** (j + 2))


@dataclass(frozen=True)
class Substitution:
    n1: tuple
    n2: tuple
    n3: tuple
    t1: tuple
    t2: tuple
    c2: int


def change_of_variables(A, y, m1, m2, m3) -> Substitution:
    """n_l = 3 m_l -+ A and t1 = n1 - 2A, t2 = n3 - 2A; c2 = w(t1, t2).

    When m1 - m2 + m3 = A and c is the chain's t-value, c2 = 9 (c - w(y, A)).
    """
    A = tuple(int(a) for a in A)
    n1 = tuple(3 * a - b for a, b in zip(m1, A))
    n2 = tuple(3 * a + b for a, b in zip(m2, A))
    n3 = tuple(3 * a - b for a, b in zip(m3, A))
    t1 = tuple(a - 2 * b for a, b in zip(n1, A))
    t2 = tuple(a - 2 * b for a, b in zip(n3, A))
    return Substitution(n1, n2, n3, t1, t2, symplectic_form(t1, t2, 1))


def chain_t_value(y, m1, m2, m3) -> int:
    """w(y, m1) - w(y - m1, m2) + w(y - m1 + m2, m3)."""
    y = tuple(int(v) for v in y)
    p = tuple(a - b for a, b in zip(y, m1))
    q = tuple(a + b for a, b in zip(p, m2))
    return symplectic_form(y, m1) - symplectic_form(p, m2) + symplectic_form(q, m3)


def substituted_constant(A, c: int, y) -> int:
    return 9 * (int(c) - symplectic_form(y, A))


# ---------------------------------------------------------------------------
# S and S~ for k = 1


def _k1_inputs(E: LatticeSet, y, j: int, budget):
    if E.k != 1:
        raise ValueError("S and S~ are defined here for k = 1")
    y = LatticePoint.origin(1) if y is None else _as_point(y)
    if y.k != 1:
        raise ValueError("base point must have k = 1")
    shell = shell_points(1, j, budget)
    return y, np.ascontiguousarray(shell.points), 4**j, 4 ** (j + 1)


def count_S(E: LatticeSet, y=None, j: int = 0, budget: int | None = None) -> int:
    """#{(m1, m2, m3) in shell_j^3 : Omega(Omega*(Omega(y; m1); m2); m3) in E}."""
    y, sh, lo, hi = _k1_inputs(E, y, j, budget)
    check_budget("S pair loop", len(E) * len(sh) ** 2, budget)
    total = 0
    for e1, e2, et in E.rows.tolist():
        total += _kernels.s_composed(sh, e1, e2, et, y.n[0], y.n[1], y.t, lo, hi)
    return int(total)


def count_S_tilde(
    E: LatticeSet, y=None, j: int = 0, method: str = "lines", budget: int | None = None
) -> int:
    """#{((a,b,c), m1, m2, m3) : (a,b) = m1 - m2 + m3, c = chain t-value, m_l in shell j}.

    ``pairs`` forces m3 from each (m1, m2) and tests the t condition literally.
    ``lines`` rewrites the condition as w(m1 - A, m2 - m1) = c - w(y, A) and, for
    each v = m2 - m1, enumerates the lattice line of admissible m1.  Both are exact.
    """
    y, sh, lo, hi = _k1_inputs(E, y, j, budget)
    total = 0
    if method == "lines":
        for a, b, c in E.rows.tolist():
            cprime = c - symplectic_form(y.n, (a, b))
            total += _kernels.stilde_lines(sh, a, b, cprime, lo, hi)
    elif method == "pairs":
        check_budget("S~ pair loop", len(E) * len(sh) ** 2, budget)
        for a, b, c in E.rows.tolist():
            total += _kernels.stilde_pairs(sh, a, b, c, y.n[0], y.n[1], lo, hi)
    else:
        raise ValueError(f"method must be 'lines' or 'pairs', got {method!r}")
    return int(total)


# ---------------------------------------------------------------------------
# k = 2 counts


def _k2_inputs(x, j, budget):
    x = _as_point(x)
    if x.k != 2:
        raise ValueError("N1 / N2 are defined for k = 2")
    return x, shell_points(2, j, budget).points


def count_N1(x, F: LatticeSet, j: int = 0, budget: int | None = None) -> int:
    """#{(m1, m2, m3) : Omega*(Omega(Omega*(x; m1); m2); m3) in F}; m3 solved per F point."""
    x, sh = _k2_inputs(x, j, budget)
    if len(F) == 0:
        return 0
    check_budget("N1 pair loop", len(F) * len(sh) ** 2, budget)
    xr = np.array(x.row(), dtype=np.int64)
    p = iterate_rows(xr[None, :], sh, 2, ADJOINT)  # Omega*(x; m1), one per m1
    total = 0
    for i in range(len(sh)):
        q = iterate_rows(np.repeat(p[i : i + 1], len(sh), axis=0), sh, 2, FORWARD)  # over m2
        for f in F.rows:
            m3 = f[None, :4] - q[:, :4]
            ok = np.einsum("ij,ij->i", m3, m3)
            ok = (ok >= 4**j) & (ok < 4 ** (j + 1))
            if not ok.any():
                continue
            img = iterate_rows(q[ok], m3[ok], 2, ADJOINT)
            total += int(np.count_nonzero(img[:, 4] == f[4]))
    return total


def N2_at(x, v, E: LatticeSet, j: int = 0, budget: int | None = None) -> int:
    """#{m4 in shell : (x + v - m4, x' + v' - w(x + v, m4)) in E}, via the forced m4 = x + v - e."""
    x, sh = _k2_inputs(x, j, budget)
    v = _as_point(v)
    base_n = np.array(x.n, dtype=np.int64) + np.array(v.n, dtype=np.int64)
    base_t = x.t + v.t
    total = 0
    for e in E.rows.tolist():
        m4 = base_n - np.array(e[:4], dtype=np.int64)
        sq = int(m4 @ m4)
        if not (4**j <= sq < 4 ** (j + 1)):
            continue
        if base_t - symplectic_form(base_n, m4) == e[4]:
            total += 1
    return total


def count_N2(x, F: LatticeSet, E: LatticeSet, j: int = 0, budget: int | None = None) -> int:
    """N2(E) = max over (v, v') in F of N2(v, v'); 0 for empty F."""
    return max((N2_at(x, v, E, j, budget) for v in F), default=0)


def count_N(x, target: LatticeSet, E: LatticeSet | None, j: int = 0, which: str = "N1", budget=None) -> int:
    if which == "N1":
        return count_N1(x, target, j, budget)
    if which == "N2":
        if E is None:
            raise ValueError("N2 needs the set E")
        return count_N2(x, target, E, j, budget)
    raise ValueError(f"which must be 'N1' or 'N2', got {which!r}")


# ---------------------------------------------------------------------------
# growth reports


def random_set(size: int, half_width: int, seed: int, k: int = 1, t_half_width: int | None = None) -> LatticeSet:
    """``size`` distinct points drawn uniformly from [-w, w]^{2k} x [-w_t, w_t]."""
    tw = half_width if t_half_width is None else t_half_width
    side = 2 * half_width + 1
    n_cells = side ** (2 * k) * (2 * tw + 1)
    if size > n_cells:
        raise ValueError(f"cannot draw {size} distinct points from {n_cells}")
    rng = np.random.default_rng(seed)
    flat = rng.choice(n_cells, size=size, replace=False)
    rows = np.empty((size, 2 * k + 1), dtype=np.int64)
    rows[:, -1] = flat % (2 * tw + 1) - tw
    flat //= 2 * tw + 1
    for i in range(2 * k - 1, -1, -1):
        rows[:, i] = flat % side - half_width
        flat //= side
    return LatticeSet.from_rows(k, rows)


@dataclass
class GrowthRow:
    j: int
    count: int
    E_size: int

    @property
    def log2_ratio(self) -> float:
        if self.count <= 0 or self.E_size == 0:
            return math.nan
        return math.log2(self.count / self.E_size)


@dataclass
class GrowthReport:
    rows: list
    epsilon: float
    slope: float
    slope_defined: bool
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def delta(self) -> float:
        return 3 * self.epsilon

    @property
    def target_exponent(self) -> float:
        return 2 + 2 * self.delta

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# seed={self.seed} epsilon={self.epsilon!r} target={self.target_exponent:.15g} "
                  f"slope={self.slope:.15g}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "count", "E_size", "log2_ratio"])
        for r in self.rows:
            w.writerow([r.j, r.count, r.E_size, f"{r.log2_ratio:.15g}"])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "target_exponent": self.target_exponent,
            "slope": None if not self.slope_defined else self.slope,
            "slope_defined": self.slope_defined,
            "rows": [
                {"j": r.j, "count": r.count, "E_size": r.E_size,
                 "log2_ratio": None if math.isnan(r.log2_ratio) else r.log2_ratio}
                for r in self.rows
            ],
            **self.meta,
        }


def fit_slope(xs, ys) -> float:
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if len(xs) < 2:
        return math.nan
    return float(np.polyfit(xs, ys, 1)[0])


def growth_report(E: LatticeSet, j_range, epsilon: float, y=None, seed=None, method="lines",
                  budget=None) -> GrowthReport:
    """S~ per shell index for a fixed E and the least-squares slope of log2(S~/|E|) vs j."""
    rows = [GrowthRow(j, count_S_tilde(E, y, j, method, budget), len(E)) for j in j_range]
    rows.sort(key=lambda r: r.j)
    use = [r for r in rows if r.count > 0]
    slope = fit_slope([r.j for r in use], [r.log2_ratio for r in use])
    return GrowthReport(rows, epsilon, slope, not math.isnan(slope), seed)
