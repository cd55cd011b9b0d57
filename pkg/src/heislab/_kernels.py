"""Compiled inner loops (numba).  All arithmetic here is exact int64 except
the floating accumulation of operator values in ``box_operator_at``."""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _egcd(a, b):
    # returns (g, x, y) with a*x + b*y = g >= 0
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b != 0:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


@njit(cache=True)
def _omega2(a1, a2, b1, b2):
    return 2 * (a2 * b1 - a1 * b2)


@njit(cache=True)
def stilde_lines(shell, a1, a2, cprime, lo, hi):
    """#{(u, v) : u, u+v, A+v in shell, w(u - A, v) = cprime} for k = 1.

    For v != 0 the condition is a lattice line in u; its points inside the
    disc |u|^2 < hi are enumerated and tested exactly.
    """
    if cprime % 2 != 0:
        return 0
    h = cprime // 2
    n = shell.shape[0]
    total = 0
    for idx in range(n):
        v1 = shell[idx, 0] - a1
        v2 = shell[idx, 1] - a2
        if v1 == 0 and v2 == 0:
            if h == 0:
                total += n
            continue
        g, x, y = _egcd(v1, v2)
        if h % g != 0:
            continue
        q = h // g
        d1 = v1 // g
        d2 = v2 // g
        # u = P + tau d solves w2 v1 - w1 v2 = h with w = u - A
        p1 = a1 - y * q
        p2 = a2 + x * q
        dd = d1 * d1 + d2 * d2
        # shift P to the foot of the perpendicular from 0 (exact integer step)
        pd = p1 * d1 + p2 * d2
        tau0 = -((pd + dd // 2) // dd)
        p1 += tau0 * d1
        p2 += tau0 * d2
        pd = p1 * d1 + p2 * d2
        pp = p1 * p1 + p2 * p2
        disc = float(pd) * float(pd) - float(dd) * float(pp - hi)
        if disc < 0:
            continue
        half = math.sqrt(disc) / dd
        center = -float(pd) / dd
        tlo = int(math.floor(center - half)) - 1
        thi = int(math.ceil(center + half)) + 1
        for tau in range(tlo, thi + 1):
            u1 = p1 + tau * d1
            u2 = p2 + tau * d2
            s = u1 * u1 + u2 * u2
            if s < lo or s >= hi:
                continue
            w1 = u1 + v1
            w2 = u2 + v2
            s2 = w1 * w1 + w2 * w2
            if s2 >= lo and s2 < hi:
                total += 1
    return total


@njit(cache=True)
def stilde_pairs(shell, a1, a2, c, y1, y2, lo, hi):
    """Loop over (m1, m2) in shell^2, force m3 = A - m1 + m2, test the t condition literally."""
    n = shell.shape[0]
    total = 0
    for i in range(n):
        m11 = shell[i, 0]
        m12 = shell[i, 1]
        for k in range(n):
            m21 = shell[k, 0]
            m22 = shell[k, 1]
            m31 = a1 - m11 + m21
            m32 = a2 - m12 + m22
            s = m31 * m31 + m32 * m32
            if s < lo or s >= hi:
                continue
            val = (
                _omega2(y1, y2, m11, m12)
                - _omega2(y1 - m11, y2 - m12, m21, m22)
                + _omega2(y1 - m11 + m21, y2 - m12 + m22, m31, m32)
            )
            if val == c:
                total += 1
    return total


@njit(cache=True)
def s_composed(shell, e1, e2, et, y1, y2, yt, lo, hi):
    """#{(m1, m2, m3)} with Omega(Omega*(Omega(y; m1); m2); m3) = e, m3 solved from the vector part."""
    n = shell.shape[0]
    total = 0
    for i in range(n):
        m11 = shell[i, 0]
        m12 = shell[i, 1]
        # Omega(y; m1)
        p1 = y1 - m11
        p2 = y2 - m12
        pt = yt - _omega2(y1, y2, m11, m12)
        for k in range(n):
            m21 = shell[k, 0]
            m22 = shell[k, 1]
            # Omega*(p; m2)
            q1 = p1 + m21
            q2 = p2 + m22
            qt = pt + _omega2(p1, p2, m21, m22)
            m31 = q1 - e1
            m32 = q2 - e2
            s = m31 * m31 + m32 * m32
            if s < lo or s >= hi:
                continue
            if qt - _omega2(q1, q2, m31, m32) == et:
                total += 1
    return total


@njit(cache=True)
def box_operator_at(n1, n2, t, tmax, alpha, lam2, phi):
    """T^lam f(n, t) for k = 1 and the box function f(u, s) = |s|^{-alpha} chi(u / |s|^{1/2}),
    1 <= |s| <= tmax.  ``phi[s] = s^{-alpha}``; ``lam2`` = 2k lam.

    Sums f(u, t + w(n, u)) |n - u|^{-lam2} over all u != n.  u_i^2 < 4 |s| <= 4 tmax
    bounds the u box; for each u1 the admissible u2 form an interval.
    """
    total = 0.0
    umax = 0
    while (umax + 1) * (umax + 1) < 4 * tmax:
        umax += 1
    for u1 in range(-umax, umax + 1):
        if u1 == 0:
            continue
        a = u1 * u1
        smin = a // 4 + 1  # |s| > u1^2 / 4
        smax = 4 * a - 1  # |s| < 4 u1^2
        if smax > tmax:
            smax = tmax
        if smin > smax:
            continue
        base = t + 2 * n2 * u1  # s = base - 2 n1 u2
        if n1 == 0:
            if abs(base) < smin or abs(base) > smax:
                continue
            lo2 = -umax
            hi2 = umax
        else:
            # |base - 2 n1 u2| <= smax
            c = 2 * n1
            if c > 0:
                lo2 = -((smax - base) // c)
                hi2 = (smax + base) // c
            else:
                cc = -c
                lo2 = -((smax + base) // cc)
                hi2 = (smax - base) // cc
            if lo2 < -umax:
                lo2 = -umax
            if hi2 > umax:
                hi2 = umax
        # u2^2 > |s| / 4 > u1^2 / 16 and u2^2 < 4 |s| < 16 u1^2
        au = u1 if u1 > 0 else -u1
        mlo = au // 4
        if mlo < 1:
            mlo = 1
        mhi = 4 * au
        for sgn in (-1, 1):
            if sgn > 0:
                a2 = mlo if mlo > lo2 else lo2
                b2 = mhi if mhi < hi2 else hi2
            else:
                a2 = -mhi if -mhi > lo2 else lo2
                b2 = -mlo if -mlo < hi2 else hi2
            for u2 in range(a2, b2 + 1):
                s = base - 2 * n1 * u2
                if s < 0:
                    s = -s
                if s < smin or s > smax:
                    continue
                b = u2 * u2
                if 4 * b <= s or b >= 4 * s:
                    continue
                d1 = n1 - u1
                d2 = n2 - u2
                dsq = d1 * d1 + d2 * d2
                if dsq == 0:
                    continue
                total += phi[s] * math.exp(-0.5 * lam2 * math.log(dsq))
    return total


@njit(cache=True)
def box_operator_many(points, tmax, alpha, lam2, phi):
    out = np.empty(points.shape[0])
    for i in range(points.shape[0]):
        out[i] = box_operator_at(points[i, 0], points[i, 1], points[i, 2], tmax, alpha, lam2, phi)
    return out
