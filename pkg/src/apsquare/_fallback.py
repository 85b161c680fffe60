"""Pure numpy versions of the hot kernels.

Each routine performs its floating point operations in the same order as
the compiled twin in ``_native.pyx`` so both backends return identical bits.
"""
import numpy as np
from scipy.ndimage import maximum_filter1d


def band_accumulate(G, W, D):
    """out[i] = sum_l sum_{|d| <= D[l]} W[l, Dmax + d] * G[l, i - d], level by level, d ascending."""
    G = np.ascontiguousarray(G, dtype=np.float64)
    W = np.ascontiguousarray(W, dtype=np.float64)
    L, N = G.shape
    dmax = (W.shape[1] - 1) // 2
    out = np.zeros(N)
    for l in range(L):
        g = G[l]
        row = W[l]
        for d in range(-int(D[l]), int(D[l]) + 1):
            w = row[dmax + d]
            if w == 0.0 or abs(d) >= N:
                continue
            if d >= 0:
                out[d:] += w * g[: N - d]
            else:
                out[: N + d] += w * g[-d:]
    return out


def touching_maximal(prefix):
    """Touching maximal function of a nonnegative 1-D array given its prefix sums.

    ``prefix`` has length N + 1. Cell ``i`` receives the largest average over
    cell-aligned intervals ``[a, b)`` with ``a <= i + 1`` and ``b >= i``.
    """
    P = np.asarray(prefix, dtype=np.float64)
    N = P.size - 1
    out = np.zeros(N)
    for L in range(1, N + 1):
        avg = (P[L:] - P[:-L]) / float(L)
        s = L + 2
        padded = np.full(N + L + 1, -np.inf)
        padded[L : L + avg.size] = avg
        filt = maximum_filter1d(padded, size=s, mode="constant", cval=-np.inf)
        np.maximum(out, filt[s // 2 : s // 2 + N], out=out)
    return out


def ap_all_intervals(pw, ps, p):
    """max over cell-aligned intervals of avg(w) * avg(sigma)^(p-1), from prefix sums.

    Returns ``(value, a, b)``; ties resolve to the first interval in
    (length ascending, start ascending) order.
    """
    pw = np.asarray(pw, dtype=np.float64)
    ps = np.asarray(ps, dtype=np.float64)
    N = pw.size - 1
    best, ba, bb = -np.inf, 0, 0
    e = p - 1.0
    for L in range(1, N + 1):
        aw = (pw[L:] - pw[:-L]) / float(L)
        asg = (ps[L:] - ps[:-L]) / float(L)
        val = aw * np.power(asg, e)
        k = int(np.argmax(val))
        if val[k] > best:
            best, ba, bb = float(val[k]), k, k + L
    return best, ba, bb
