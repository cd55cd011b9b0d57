"""Norms on counting measure and the (1/p, 1/q) boundedness classifier.

All norms are computed from the non-increasing rearrangement a_0 >= a_1 >= ...
of |f|, which on counting measure is the step function g*(t) = a_i on
[i, i+1).  The Lorentz integral is then evaluated exactly step by step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import SparseFunction

INF = math.inf
EQ_TOL = 1e-12

BOUNDED_K1 = "bounded_k1"
BOUNDARY_OPEN = "boundary_open"
UNBOUNDED = "unbounded"
CONJECTURED_BOUNDED = "conjectured_bounded"
OUTSIDE = "outside"


def _values(f) -> np.ndarray:
    if isinstance(f, SparseFunction):
        return np.abs(f.values)
    return np.abs(np.asarray(f, dtype=np.float64).ravel())


def rearrangement(f) -> np.ndarray:
    """Non-increasing rearrangement of |f| over its support."""
    a = _values(f)
    a = a[a > 0]
    return np.sort(a)[::-1]


def _check_exponent(name, x):
    if not x >= 1:
        raise ValueError(f"{name} must lie in [1, inf], got {x}")


def lp_norm(f, p: float) -> float:
    _check_exponent("p", p)
    a = _values(f)
    if a.size == 0:
        return 0.0
    top = a.max()
    if p == INF:
        return float(top)
    if top == 0:
        return 0.0
    return float(top * math.fsum((a / top) ** p) ** (1.0 / p))


def weak_norm(f, q: float) -> float:
    """||f||*_{q,inf} = max over values v of v * #{|f| >= v}^{1/q}."""
    _check_exponent("q", q)
    a = rearrangement(f)
    if a.size == 0:
        return 0.0
    if q == INF:
        return float(a[0])
    counts = np.arange(1, a.size + 1, dtype=np.float64)
    return float(np.max(a * counts ** (1.0 / q)))


def lorentz_norm(f, p: float, q: float) -> float:
    """||f||*_{p,q} with the footnote normalisation, evaluated exactly per step.

    (sum_i a_i^q ((i+1)^{q/p} - i^{q/p}))^{1/q}; q = inf gives the weak norm.
    """
    _check_exponent("p", p)
    _check_exponent("q", q)
    if q == INF:
        return weak_norm(f, p)
    if p == INF:
        raise ValueError("the (inf, q) Lorentz quasi-norm is infinite for every nonzero f when q < inf")
    a = rearrangement(f)
    if a.size == 0:
        return 0.0
    top = a[0]
    e = q / p
    i = np.arange(1, a.size, dtype=np.float64)
    # (i+1)^e - i^e without cancellation
    steps = np.empty(a.size)
    steps[0] = 1.0
    steps[1:] = i**e * np.expm1(e * np.log1p(1.0 / i))
    return float(top * math.fsum((a / top) ** q * steps) ** (1.0 / q))


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentQuery:
    k: int
    lam: float
    p: float
    q: float

    @property
    def inv_p(self) -> float:
        return 0.0 if self.p == INF else 1.0 / self.p

    @property
    def inv_q(self) -> float:
        return 0.0 if self.q == INF else 1.0 / self.q

    @classmethod
    def from_reciprocals(cls, k, lam, inv_p, inv_q) -> "ExponentQuery":
        p = INF if inv_p == 0 else 1.0 / inv_p
        q = INF if inv_q == 0 else 1.0 / inv_q
        return cls(k, lam, p, q)


@dataclass(frozen=True)
class Classification:
    label: str
    deficit: float
    conditions: dict = field(default_factory=dict)

    def __str__(self):
        return self.label


def homogeneity_deficit(k: int, lam: float, inv_p: float, inv_q: float) -> float:
    """1/p - 1/q - 2k(1 - lam)/(2k + 2); zero on the homogeneity line."""
    return inv_p - inv_q - 2 * k * (1 - lam) / (2 * k + 2)


def classify_exponents(query: ExponentQuery, tol: float = EQ_TOL) -> Classification:
    k, lam = query.k, query.lam
    ip, iq = query.inv_p, query.inv_q
    deficit = homogeneity_deficit(k, lam, ip, iq)
    cond = {
        "i_strict": deficit > tol,
        "i_equality": abs(deficit) <= tol,
        "ii_q": iq < lam - tol,
        "ii_p": ip > 1 - lam + tol,
    }
    if k < 1 or not (0 < lam < 1) or not (query.p >= 1 and query.q >= 1):
        return Classification(OUTSIDE, deficit, cond)
    # necessity: (i) with equality allowed, (ii) strict in both parts
    if deficit < -tol or not cond["ii_q"] or not cond["ii_p"]:
        return Classification(UNBOUNDED, deficit, cond)
    if k >= 2:
        return Classification(CONJECTURED_BOUNDED, deficit, cond)
    if cond["i_equality"]:
        return Classification(BOUNDARY_OPEN, deficit, cond)
    return Classification(BOUNDED_K1, deficit, cond)
