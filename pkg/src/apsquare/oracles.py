"""Slow, independent reference implementations used to cross-check the fast paths.

Everything here works on plain lists of (value, mass) pairs or small arrays
with explicit loops, and uses exact rationals where the answer is a sum.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np


def _pairs(values, masses=None):
    values = [float(v) for v in np.ravel(values)]
    if masses is None:
        masses = [1] * len(values)
    return list(zip(values, [Fraction(m) for m in np.ravel(masses)]))


def measure_above(pairs, a, strict=True) -> Fraction:
    return sum((m for v, m in pairs if (abs(v) > a if strict else abs(v) >= a)), Fraction(0))


def rearrangement(values, t, masses=None) -> float:
    """inf{a >= 0 : |{|f| > a}| < t}, scanning every candidate level."""
    pairs = _pairs(values, masses)
    t = Fraction(t)
    for a in sorted({0.0} | {abs(v) for v, _ in pairs}):
        if measure_above(pairs, a) < t:
            return a
    raise AssertionError("unreachable: the largest value always qualifies")


def median(values, masses=None) -> float:
    """Largest m with |{f > m}| <= M/2 and |{f < m}| <= M/2 (attained at a sample value)."""
    pairs = _pairs(values, masses)
    half = sum(m for _, m in pairs) / 2
    ok = [c for c, _ in pairs
          if sum((m for v, m in pairs if v > c), Fraction(0)) <= half
          and sum((m for v, m in pairs if v < c), Fraction(0)) <= half]
    return max(ok)


def local_osc(values, lam, masses=None) -> float:
    """inf over c in (values + pairwise midpoints) of ((f - c) chi)^*(lam |Q|)."""
    pairs = _pairs(values, masses)
    total = sum(m for _, m in pairs)
    vs = sorted({v for v, _ in pairs})
    cands = [(Fraction(a) + Fraction(b)) / 2 for i, a in enumerate(vs) for b in vs[i:]]
    t = Fraction(lam) * total
    best = None
    for c in cands:
        shifted = [(Fraction(v) - c, m) for v, m in pairs]
        levels = sorted({Fraction(0)} | {abs(v) for v, _ in shifted})
        for a in levels:
            if sum((m for v, m in shifted if abs(v) > a), Fraction(0)) < t:
                best = a if best is None else min(best, a)
                break
    return float(best)


def dyadic_sharp_max(values, lam) -> np.ndarray:
    """1-D sup of local_osc over dyadic sub-blocks containing each cell (length a power of 2)."""
    v = np.ravel(values)
    N = v.size
    out = np.zeros(N)
    b = N
    while b >= 2:
        for s in range(0, N, b):
            w = local_osc(v[s : s + b], lam)
            out[s : s + b] = np.maximum(out[s : s + b], w)
        b //= 2
    return out


def touching_maximal(values) -> np.ndarray:
    """1-D: sup of |f| averages over [a, b) cell ranges whose closure meets the closed cell."""
    v = np.abs(np.ravel(values)).astype(float)
    N = v.size
    out = np.zeros(N)
    for a in range(N):
        for b in range(a + 1, N + 1):
            avg = float(sum(Fraction(x) for x in v[a:b]) / (b - a))
            lo, hi = max(a - 1, 0), min(b, N - 1)
            out[lo : hi + 1] = np.maximum(out[lo : hi + 1], avg)
    return out


def ap_char_all(w, p) -> float:
    """1-D sup over every cell range of avg(w) avg(w^(-1/(p-1)))^(p-1)."""
    w = np.ravel(w).astype(float)
    N = w.size
    best = 0.0
    for a in range(N):
        for b in range(a + 1, N + 1):
            aw = sum(w[a:b]) / (b - a)
            asg = sum(x ** (-1.0 / (p - 1.0)) for x in w[a:b]) / (b - a)
            best = max(best, aw * asg ** (p - 1.0))
    return best


def ap_char_dyadic(w, p) -> float:
    """1-D sup over dyadic cell ranges (block sizes N/2, N/4, ..., 1)."""
    w = np.ravel(w).astype(float)
    N = w.size
    best = 0.0
    b = N // 2
    while b >= 1:
        for s in range(0, N, b):
            blk = w[s : s + b]
            aw = sum(blk) / b
            asg = sum(x ** (-1.0 / (p - 1.0)) for x in blk) / b
            best = max(best, aw * asg ** (p - 1.0))
        b //= 2
    return best


def conv_direct(f, weights) -> np.ndarray:
    """out[i] = sum_j f[j] * weights[D + i - j] by explicit loops."""
    f = np.ravel(f)
    N = f.size
    D = (len(weights) - 1) // 2
    out = np.zeros(N)
    for i in range(N):
        acc = 0.0
        for j in range(N):
            d = i - j
            if -D <= d <= D:
                acc += f[j] * weights[D + d]
        out[i] = acc
    return out
