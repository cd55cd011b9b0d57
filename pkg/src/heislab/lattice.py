"""Geometry of the discrete Heisenberg lattice Z^{2k} x Z.

Points are stored as integer rows ``(n_1, ..., n_{2k}, t)``; the first k
entries of ``n`` form the block n_1, the next k the block n_2.  All
membership and counting tests are done in exact integer arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import check_budget

COORD_LIMIT = 2**30
_INT64_MAX = 2**63 - 1

FORWARD = "forward"
ADJOINT = "adjoint"


def _check_coord(value: int) -> int:
    value = int(value)
    if abs(value) > COORD_LIMIT:
        raise OverflowError(f"coordinate {value} exceeds the guard 2^30")
    return value


@dataclass(frozen=True, order=True)
class LatticePoint:
    """A point (n, t) of Z^{2k} x Z."""

    n: tuple
    t: int

    def __post_init__(self):
        n = tuple(_check_coord(x) for x in self.n)
        if len(n) == 0 or len(n) % 2:
            raise ValueError(f"n must have even positive length 2k, got {len(n)}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "t", _check_coord(self.t))

    @property
    def k(self) -> int:
        return len(self.n) // 2

    def row(self) -> tuple:
        return self.n + (self.t,)

    @classmethod
    def from_row(cls, row: Sequence[int]) -> "LatticePoint":
        row = [int(x) for x in row]
        return cls(tuple(row[:-1]), row[-1])

    @classmethod
    def origin(cls, k: int) -> "LatticePoint":
        return cls((0,) * (2 * k), 0)

    def __repr__(self):
        return f"LatticePoint(n={self.n}, t={self.t})"


def _as_point(p) -> LatticePoint:
    if isinstance(p, LatticePoint):
        return p
    n, t = p
    return LatticePoint(tuple(n), t)


# ---------------------------------------------------------------------------
# symplectic form and the iteration maps


def symplectic_form(n: Sequence[int], m: Sequence[int], k: int | None = None) -> int:
    """Return omega(n, m) = 2 (n_2 . m_1 - n_1 . m_2) as an exact integer."""
    n = [int(x) for x in n]
    m = [int(x) for x in m]
    if k is None:
        k = len(n) // 2
    if len(n) != 2 * k or len(m) != 2 * k:
        raise ValueError(f"expected two vectors of length {2 * k}, got {len(n)} and {len(m)}")
    for x in (*n, *m):
        _check_coord(x)
    n1, n2 = n[:k], n[k:]
    m1, m2 = m[:k], m[k:]
    value = 2 * (sum(a * b for a, b in zip(n2, m1)) - sum(a * b for a, b in zip(n1, m2)))
    if abs(value) > _INT64_MAX:
        raise OverflowError("symplectic form does not fit in a signed 64-bit integer")
    return value


def omega_rows(n: np.ndarray, m: np.ndarray, k: int) -> np.ndarray:
    """Vectorised symplectic form over broadcastable (..., 2k) int64 arrays."""
    n = np.asarray(n, dtype=np.int64)
    m = np.asarray(m, dtype=np.int64)
    if n.shape[-1] != 2 * k or m.shape[-1] != 2 * k:
        raise ValueError(f"last axis must have length {2 * k}")
    bound = (int(np.abs(n).max(initial=0)) * int(np.abs(m).max(initial=0))) * 4 * k
    if bound > _INT64_MAX:
        raise OverflowError("symplectic form would overflow int64 for these inputs")
    return 2 * (
        np.einsum("...i,...i->...", n[..., k:], m[..., :k])
        - np.einsum("...i,...i->...", n[..., :k], m[..., k:])
    )


def iterate_map(x: LatticePoint, m: Sequence[int], direction: str = FORWARD) -> LatticePoint:
    """Omega(x; m) = (x - m, t - w(x, m)) forward, Omega*(x; m) = (x + m, t + w(x, m)) adjoint."""
    x = _as_point(x)
    m = tuple(int(v) for v in m)
    if len(m) != len(x.n):
        raise ValueError(f"shift has length {len(m)}, point has {len(x.n)}")
    w = symplectic_form(x.n, m, x.k)
    if direction == FORWARD:
        return LatticePoint(tuple(a - b for a, b in zip(x.n, m)), x.t - w)
    if direction == ADJOINT:
        return LatticePoint(tuple(a + b for a, b in zip(x.n, m)), x.t + w)
    raise ValueError(f"direction must be 'forward' or 'adjoint', got {direction!r}")


def iterate_rows(rows: np.ndarray, m: np.ndarray, k: int, direction: str) -> np.ndarray:
    """Vectorised Omega / Omega* on point rows (N, 2k+1) and shifts (N, 2k)."""
    rows = np.asarray(rows, dtype=np.int64)
    m = np.asarray(m, dtype=np.int64)
    w = omega_rows(rows[..., :-1], m, k)
    sign = -1 if direction == FORWARD else 1
    out = np.empty(np.broadcast_shapes(rows.shape[:-1], m.shape[:-1]) + (2 * k + 1,), dtype=np.int64)
    out[..., :-1] = rows[..., :-1] + sign * m
    out[..., -1] = rows[..., -1] + sign * w
    return out


# ---------------------------------------------------------------------------
# dyadic shells


@dataclass(frozen=True)
class Shell:
    """All m in Z^{2k} with 2^j <= |m| < 2^{j+1}, as an (N, 2k) int64 array."""

    k: int
    j: int
    points: np.ndarray

    def __len__(self):
        return len(self.points)

    @property
    def norm_bounds(self) -> tuple[int, int]:
        return 4**self.j, 4 ** (self.j + 1)

    def contains(self, m: np.ndarray) -> np.ndarray:
        m = np.asarray(m, dtype=np.int64)
        sq = np.einsum("...i,...i->...", m, m)
        lo, hi = self.norm_bounds
        return (sq >= lo) & (sq < hi)


def in_shell(m: np.ndarray, j: int) -> np.ndarray:
    m = np.asarray(m, dtype=np.int64)
    sq = np.einsum("...i,...i->...", m, m)
    return (sq >= 4**j) & (sq < 4 ** (j + 1))


def shell_points(k: int, j: int, budget: int | None = None) -> Shell:
    if k < 1:
        raise ValueError("k must be >= 1")
    if j < 0:
        raise ValueError("shell index j must be >= 0")
    side = 2 ** (j + 2) + 1
    check_budget(f"shell(k={k}, j={j}) bounding box", side ** (2 * k), budget)
    return _shell_cached(k, j)


@lru_cache(maxsize=64)
def _shell_cached(k: int, j: int) -> Shell:
    lo, hi = 4**j, 4 ** (j + 1)
    r = 2 ** (j + 1)
    axis = np.arange(-r, r + 1, dtype=np.int64)
    # grow coordinate by coordinate, pruning partial norms >= hi
    pts = axis[:, None]
    sq = axis**2
    keep = sq < hi
    pts, sq = pts[keep], sq[keep]
    for _ in range(2 * k - 1):
        new_sq = sq[:, None] + (axis**2)[None, :]
        ii, jj = np.nonzero(new_sq < hi)
        pts = np.concatenate([pts[ii], axis[jj][:, None]], axis=1)
        sq = new_sq[ii, jj]
    pts = pts[sq >= lo]
    pts.setflags(write=False)
    return Shell(k, j, pts)


# ---------------------------------------------------------------------------
# row-set helpers


def _row_keys(*blocks: np.ndarray):
    """Order-preserving int64 keys for rows (mixed radix over the observed ranges).

    Returns one key array per block, or None when the ranges do not fit in 63 bits.
    """
    nonempty = [b for b in blocks if len(b)]
    lo = np.min([b.min(axis=0) for b in nonempty], axis=0)
    hi = np.max([b.max(axis=0) for b in nonempty], axis=0)
    spans = [int(h) - int(l) + 1 for l, h in zip(lo.tolist(), hi.tolist())]
    if math.prod(spans) >= 2**63:
        return None
    radix = np.ones(len(spans), dtype=np.int64)
    for i in range(len(spans) - 2, -1, -1):
        radix[i] = radix[i + 1] * spans[i + 1]
    return [(b - lo) @ radix if len(b) else np.zeros(0, dtype=np.int64) for b in blocks]


def _canonical_rows(rows: np.ndarray, values: np.ndarray | None = None):
    """Sort rows lexicographically and merge duplicates (values summed in input order)."""
    if len(rows) == 0:
        return rows.reshape(0, rows.shape[1]), (None if values is None else np.zeros(0))
    keys = _row_keys(rows)
    if keys is None:
        uniq, inv = np.unique(rows, axis=0, return_inverse=True)
    else:
        _, first, inv = np.unique(keys[0], return_index=True, return_inverse=True)
        uniq = rows[first]
    inv = inv.ravel()
    if values is None:
        return uniq, None
    return uniq, np.bincount(inv, weights=values, minlength=len(uniq))


def match_rows(queries: np.ndarray, table: np.ndarray) -> np.ndarray:
    """For each query row, the index of the equal row in ``table`` or -1."""
    queries = np.asarray(queries, dtype=np.int64)
    table = np.asarray(table, dtype=np.int64)
    if len(queries) == 0 or len(table) == 0:
        return np.full(len(queries), -1, dtype=np.int64)
    keys = _row_keys(table, queries)
    if keys is None:
        both = np.concatenate([table, queries])
        _, inv = np.unique(both, axis=0, return_inverse=True)
        inv = inv.ravel()
        slot = np.full(inv.max() + 1, -1, dtype=np.int64)
        slot[inv[: len(table)]] = np.arange(len(table))
        return slot[inv[len(table):]]
    tk, qk = keys
    order = np.argsort(tk, kind="stable")
    sk = tk[order]
    pos = np.minimum(np.searchsorted(sk, qk), len(sk) - 1)
    return np.where(sk[pos] == qk, order[pos], -1)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _rows_from_points(k: int, points) -> np.ndarray:
    rows = [_as_point(p).row() for p in points]
    for r in rows:
        if len(r) != 2 * k + 1:
            raise ValueError(f"point {r} does not belong to dimension k={k}")
    return np.array(rows, dtype=np.int64).reshape(len(rows), 2 * k + 1)


def _check_rows(k: int, rows: np.ndarray) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.int64)
    if rows.ndim != 2 or rows.shape[1] != 2 * k + 1:
        raise ValueError(f"expected rows of width {2 * k + 1}, got shape {rows.shape}")
    if rows.size and np.abs(rows).max() > COORD_LIMIT:
        raise OverflowError("coordinate exceeds the guard 2^30")
    return rows


# ---------------------------------------------------------------------------
# containers


class LatticeSet:
    """A finite subset of Z^{2k} x Z, stored as canonically sorted unique rows."""

    __slots__ = ("k", "rows")

    def __init__(self, k: int, points: Iterable = ()):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k
        rows, _ = _canonical_rows(_rows_from_points(k, points))
        self.rows = _freeze(rows)

    @classmethod
    def from_rows(cls, k: int, rows) -> "LatticeSet":
        obj = cls.__new__(cls)
        obj.k = k
        rows, _ = _canonical_rows(_check_rows(k, rows))
        obj.rows = _freeze(rows)
        return obj

    def __len__(self):
        return len(self.rows)

    def __iter__(self) -> Iterator[LatticePoint]:
        for r in self.rows:
            yield LatticePoint.from_row(r)

    def __contains__(self, p) -> bool:
        row = np.array([_as_point(p).row()], dtype=np.int64)
        if row.shape[1] != self.rows.shape[1]:
            return False
        return bool(match_rows(row, self.rows)[0] >= 0)

    def __eq__(self, other):
        if not isinstance(other, LatticeSet):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.rows, other.rows)

    def __repr__(self):
        return f"LatticeSet(k={self.k}, size={len(self)})"

    def contains_rows(self, rows: np.ndarray) -> np.ndarray:
        return match_rows(rows, self.rows) >= 0

    def indicator(self) -> "SparseFunction":
        return SparseFunction.from_rows(self.k, self.rows, np.ones(len(self.rows)))

    def filter(self, mask: np.ndarray) -> "LatticeSet":
        return LatticeSet.from_rows(self.k, self.rows[np.asarray(mask, dtype=bool)])

    def issubset(self, other: "LatticeSet") -> bool:
        return bool(np.all(other.contains_rows(self.rows)))

    def reflected_about(self, y: LatticePoint) -> "LatticeSet":
        """The set y - E = {(y_n - e_n, y_t - e_t)}."""
        y = np.array(_as_point(y).row(), dtype=np.int64)
        return LatticeSet.from_rows(self.k, y[None, :] - self.rows)


class SparseFunction:
    """A finitely supported real function on Z^{2k} x Z.

    Entries equal to zero are dropped, so ``support()`` is canonical.  The
    object is immutable; rows are sorted lexicographically.
    """

    __slots__ = ("k", "rows", "values", "_lookup")

    def __init__(self, k: int, entries: Mapping | None = None):
        if k < 1:
            raise ValueError("k must be >= 1")
        entries = dict(entries or {})
        rows = _rows_from_points(k, entries.keys())
        values = np.array([float(v) for v in entries.values()], dtype=np.float64)
        self._set(k, rows, values)

    @classmethod
    def from_rows(cls, k: int, rows, values) -> "SparseFunction":
        """Build from arrays; duplicate rows are summed in input order."""
        obj = cls.__new__(cls)
        rows = _check_rows(k, rows)
        values = np.asarray(values, dtype=np.float64).ravel()
        if len(values) != len(rows):
            raise ValueError("rows and values differ in length")
        obj._set(k, rows, values)
        return obj

    @classmethod
    def delta(cls, k: int, point=None) -> "SparseFunction":
        p = LatticePoint.origin(k) if point is None else _as_point(point)
        return cls(k, {p: 1.0})

    @classmethod
    def zero(cls, k: int) -> "SparseFunction":
        return cls(k)

    def _set(self, k, rows, values):
        rows, values = _canonical_rows(rows, values)
        keep = values != 0.0
        self.k = k
        self.rows = _freeze(rows[keep])
        self.values = _freeze(values[keep])
        self._lookup = None

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, p) -> float:
        if self._lookup is None:
            self._lookup = {tuple(r): v for r, v in zip(self.rows.tolist(), self.values.tolist())}
        return self._lookup.get(_as_point(p).row(), 0.0)

    def items(self) -> Iterator[tuple[LatticePoint, float]]:
        for r, v in zip(self.rows, self.values.tolist()):
            yield LatticePoint.from_row(r), v

    def support(self) -> LatticeSet:
        return LatticeSet.from_rows(self.k, self.rows)

    def values_at(self, rows: np.ndarray) -> np.ndarray:
        idx = match_rows(rows, self.rows)
        out = np.zeros(len(idx))
        hit = idx >= 0
        out[hit] = self.values[idx[hit]]
        return out

    def scaled(self, c: float) -> "SparseFunction":
        return SparseFunction.from_rows(self.k, self.rows, self.values * float(c))

    def restricted(self, s: LatticeSet) -> "SparseFunction":
        mask = s.contains_rows(self.rows)
        return SparseFunction.from_rows(self.k, self.rows[mask], self.values[mask])

    def __eq__(self, other):
        if not isinstance(other, SparseFunction):
            return NotImplemented
        return (
            self.k == other.k
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return f"SparseFunction(k={self.k}, nnz={len(self)})"


def euclidean_norm_sq(m: Sequence[int]) -> int:
    return sum(int(x) * int(x) for x in m)


def norm_power(norm_sq, exponent: float):
    """|m|^{-exponent} from the exact integer |m|^2, via exp(-exponent/2 * ln|m|^2)."""
    return np.exp(-0.5 * exponent * np.log(np.asarray(norm_sq, dtype=np.float64)))

