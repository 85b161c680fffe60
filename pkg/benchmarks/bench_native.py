"""Time the compiled kernels against the numpy fallback at desk scale.

    python benchmarks/bench_native.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from apsquare import _fallback
from apsquare.cone import cone_weights, default_tgrid
from apsquare.signal import Domain

try:
    from apsquare import _native
except ImportError:  # extension not built
    _native = None


def cases(rng):
    dom = Domain(1, 2, 9)
    tg = default_tgrid(dom)
    N, h = dom.cells, dom.h
    ws = [cone_weights(4 * t / h, int(min(N - 1, np.ceil(4 * t / h + 0.5)))) for t in tg.t]
    Dmax = max((w.size - 1) // 2 for w in ws)
    W = np.zeros((tg.L, 2 * Dmax + 1))
    D = np.empty(tg.L, dtype=np.int64)
    for l, w in enumerate(ws):
        d = (w.size - 1) // 2
        W[l, Dmax - d : Dmax + d + 1] = w
        D[l] = d
    G = rng.random((tg.L, N))
    prefix = np.concatenate(([0.0], np.cumsum(rng.random(N))))
    w = rng.uniform(0.1, 10, 1024)
    pw = np.concatenate(([0.0], np.cumsum(w)))
    ps = np.concatenate(([0.0], np.cumsum(1 / w)))
    return {
        "band_accumulate (aperture 4, %d x %d)" % G.shape: ("band_accumulate", (G, W, D)),
        "touching_maximal (%d cells)" % N: ("touching_maximal", (prefix,)),
        "ap_all_intervals (1024 cells, p=2)": ("ap_all_intervals", (pw, ps, 2.0)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _native is None:
        print("compiled extension not available; build with `pip install -e . --no-build-isolation`")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':44s} {'fallback':>10s} {'native':>10s} {'speedup':>8s}  same")
    for label, (fn, fargs) in cases(rng).items():
        py, nat = getattr(_fallback, fn), getattr(_native, fn)
        t_py = min(timeit.repeat(lambda: py(*fargs), number=1, repeat=args.repeat))
        t_nat = min(timeit.repeat(lambda: nat(*fargs), number=1, repeat=args.repeat))
        a, b = py(*fargs), nat(*fargs)
        same = np.array_equal(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
        print(f"{label:44s} {t_py * 1e3:8.1f}ms {t_nat * 1e3:8.1f}ms {t_py / t_nat:7.1f}x  {same}")


if __name__ == "__main__":
    main()
