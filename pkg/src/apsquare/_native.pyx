# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_fallback.py`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport pow, INFINITY

cnp.import_array()


def band_accumulate(G, W, D):
    cdef double[:, ::1] g = np.ascontiguousarray(G, dtype=np.float64)
    cdef double[:, ::1] w = np.ascontiguousarray(W, dtype=np.float64)
    cdef long long[::1] dd = np.ascontiguousarray(D, dtype=np.int64)
    cdef Py_ssize_t L = g.shape[0], N = g.shape[1]
    cdef Py_ssize_t dmax = (w.shape[1] - 1) // 2
    out_arr = np.zeros(N)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t l, i, lo, hi
    cdef long long d
    cdef double wt
    with nogil:
        for l in range(L):
            for d in range(-dd[l], dd[l] + 1):
                wt = w[l, dmax + d]
                if wt == 0.0 or d >= N or -d >= N:
                    continue
                if d >= 0:
                    lo = d
                    hi = N
                else:
                    lo = 0
                    hi = N + d
                for i in range(lo, hi):
                    out[i] += wt * g[l, i - d]
    return out_arr


def touching_maximal(prefix):
    cdef double[::1] P = np.ascontiguousarray(prefix, dtype=np.float64)
    cdef Py_ssize_t N = P.shape[0] - 1
    out_arr = np.zeros(N)
    cdef double[::1] out = out_arr
    suffix_arr = np.empty(N + 1)
    cdef double[::1] suf = suffix_arr
    cdef Py_ssize_t a, b, i, lo
    cdef double avg, run
    with nogil:
        for a in range(N):
            # suf[b] = max over b' >= b of avg(a, b')
            run = -INFINITY
            for b in range(N, a, -1):
                avg = (P[b] - P[a]) / <double>(b - a)
                if avg > run:
                    run = avg
                suf[b] = run
            lo = a - 1 if a >= 1 else 0
            for i in range(lo, N):
                if i > a + 1:
                    run = suf[i]
                else:
                    run = suf[a + 1]
                if run > out[i]:
                    out[i] = run
    return out_arr


def ap_all_intervals(pw, ps, double p):
    cdef double[::1] Pw = np.ascontiguousarray(pw, dtype=np.float64)
    cdef double[::1] Ps = np.ascontiguousarray(ps, dtype=np.float64)
    cdef Py_ssize_t N = Pw.shape[0] - 1
    cdef Py_ssize_t L, a, ba = 0, bb = 0
    cdef double best = -INFINITY, aw, asg, val, e = p - 1.0
    with nogil:
        for L in range(1, N + 1):
            for a in range(N - L + 1):
                aw = (Pw[a + L] - Pw[a]) / <double>L
                asg = (Ps[a + L] - Ps[a]) / <double>L
                val = aw * pow(asg, e)
                if val > best:
                    best = val
                    ba = a
                    bb = a + L
    return best, ba, bb
