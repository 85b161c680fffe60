"""Test families, operator-norm lower estimates and exponent scans."""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterator

import numpy as np

from .cone import TGrid, conv_field, cone_square, default_tgrid, gstar, smooth_square
from .geometry import Cube
from .kernels import BumpSpec, KernelSpec
from .signal import Domain, DomainError, Signal, Weight, ap_char, hl_maximal, lp_norm, weak_quasinorm
from .sparse import SparseFamily, calT, dilation_margin_ok, sparse_square
from .geometry import MarginError


class FitError(ValueError):
    pass


# --- families ------------------------------------------------------------------------


@dataclass
class TestFamily:
    """A named, re-iterable generator of (f, w) pairs; ``w`` may be None."""

    __test__ = False  # not a pytest class

    name: str
    make: Callable[[], Iterator[tuple[Signal, Weight | None]]]
    meta: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(self.make())


def _cell_edges(dom: Domain) -> tuple[np.ndarray, np.ndarray]:
    a = dom.coords()
    return a, a + dom.h


def _power_cell_avg(dom: Domain, gamma: float, lo: float = -math.inf, hi: float = math.inf) -> np.ndarray:
    """Cell averages of |x|^gamma restricted to (lo, hi] (gamma > -1)."""
    a, b = _cell_edges(dom)
    a, b = np.clip(a, lo, hi), np.clip(b, lo, hi)

    def prim(x):  # odd primitive of |x|^gamma
        return np.sign(x) * np.abs(x) ** (gamma + 1) / (gamma + 1)

    return (prim(b) - prim(a)) / dom.h


def extremal_f(dom: Domain, delta: float) -> Signal:
    """Cell averages of |x|^(delta - 1) on (0, 1], zero elsewhere."""
    if not 0 < delta <= 1:
        raise DomainError("delta must lie in (0, 1]")
    return Signal(dom, _power_cell_avg(dom, delta - 1.0, 0.0, 1.0))


def power_weight(dom: Domain, p: float, delta: float, scope: str = "all") -> tuple[Weight, float]:
    """w(x) = |x|^((1 - delta)(p - 1)) as cell averages, with its measured A_p characteristic."""
    if not 0 < delta <= 1:
        raise DomainError("delta must lie in (0, 1]")
    if not p > 1:
        raise DomainError("p must exceed 1")
    gamma = (1.0 - delta) * (p - 1.0)
    vals = np.ones(dom.cells) if gamma == 0 else _power_cell_avg(dom, gamma)
    w = Weight(dom, vals, p=p)
    return w, ap_char(w, p, scope).value


def extremal_family(dom: Domain, p: float, deltas) -> TestFamily:
    def gen():
        for d in deltas:
            yield extremal_f(dom, d), power_weight(dom, p, d)[0]

    return TestFamily("extremal", gen, {"p": p, "deltas": list(deltas)})


def indicator_family(dom: Domain, levels=(2, 3, 4, 5), center: float = 0.0) -> TestFamily:
    """Indicators of dyadic intervals of side 2^-k touching ``center`` from the right."""
    def gen():
        for k in levels:
            q = Cube(0, k, (int(math.floor(center * 2**k)),))
            v = np.zeros(dom.cells)
            v[dom.cube_slices(q)] = 1.0
            yield Signal(dom, v), None

    return TestFamily("indicators", gen, {"levels": list(levels)})


def random_signal(dom: Domain, rng: np.random.Generator, pieces: int = 16,
                  support: tuple[float, float] = (-0.5, 0.5), dist: str = "normal") -> Signal:
    """Piecewise-constant signal with ``pieces`` random pieces on ``support``."""
    v = np.zeros(dom.shape)
    lo, hi = (int((s - float(dom.lo)) / dom.h) for s in support)
    span = hi - lo
    cuts = np.sort(rng.choice(np.arange(1, span), size=min(pieces, span) - 1, replace=False))
    lengths = np.diff(np.concatenate(([0], cuts, [span])))
    if dist == "normal":
        vals = rng.normal(size=lengths.size)
    elif dist == "cauchy":
        vals = rng.standard_cauchy(size=lengths.size)
    elif dist == "uniform":
        vals = rng.random(size=lengths.size)
    else:
        raise ValueError(f"unknown distribution {dist!r}")
    if dom.n == 1:
        v[lo:hi] = np.repeat(vals, lengths)
    else:
        v[lo:hi, lo:hi] = np.repeat(vals, lengths)[:, None]
    return Signal(dom, v)


def random_family(dom: Domain, seed: int, count: int = 8, **kw) -> TestFamily:
    def gen():
        rng = np.random.default_rng(seed)
        for _ in range(count):
            yield random_signal(dom, rng, **kw), None

    return TestFamily("random", gen, {"seed": seed, "count": count})


def chain_family(dom: Domain, levels: int | None = None) -> SparseFamily:
    """Levels {[0, 2^-k)}, k = 0..levels-1: each level fills exactly half the previous one."""
    if levels is None:
        levels = dom.K + 1
    root = Cube(0, 0, (0,) * dom.n)
    return SparseFamily(root, [[Cube(0, k, (0,) * dom.n)] for k in range(levels)], [], "synthetic")


# --- operators ---------------------------------------------------------------------------


OPERATORS = ("S_alpha", "S_tilde", "gstar", "M", "T2m", "calT")


@dataclass
class OpSpec:
    """Parameters that turn an operator id into a map Signal -> Signal."""

    op: str
    kernel: KernelSpec | None = None
    tgrid: TGrid | None = None
    alpha: float = 1.0
    mu: float = 2.0
    family: SparseFamily | None = None
    m: int = 0
    delta: float = 0.5
    m_max: int = 6
    bump: BumpSpec | None = None
    exact: bool = False

    def __post_init__(self):
        if self.op not in OPERATORS:
            raise ValueError(f"unknown operator {self.op!r}; choose from {OPERATORS}")

    def __call__(self, f: Signal) -> Signal:
        op = self.op
        if op == "M":
            return hl_maximal(f)
        if op in ("T2m", "calT"):
            if self.family is None:
                raise ValueError(f"{op} needs a sparse family")
            if op == "T2m":
                return sparse_square(self.family, f, self.m)
            return calT(self.family, f, self.delta, self.m_max).signal
        if self.kernel is None:
            raise ValueError(f"{op} needs a kernel")
        F = conv_field(f, self.kernel, self.tgrid or default_tgrid(f.domain))
        if op == "S_alpha":
            return cone_square(F, self.alpha, exact=self.exact)
        if op == "S_tilde":
            return smooth_square(F, self.bump or BumpSpec(), self.alpha, exact=self.exact)
        return gstar(F, self.mu, exact=self.exact)


def opnorm_lower(op: Callable[[Signal], Signal], p: float, w: Weight | None,
                 family, weak: bool = False) -> float:
    """max over the family of ||op f|| / ||f|| in L^p(w) (or L^{p,inf}(w) for op f when ``weak``).

    A family member's own weight is used when ``w`` is None. Members with
    zero norm are skipped with a warning.
    """
    best = 0.0
    seen = 0
    for f, fw in family:
        ww = w if w is not None else fw
        den = lp_norm(f, p, ww)
        if den == 0:
            warnings.warn("skipping a zero-norm family member", stacklevel=2)
            continue
        g = op(f)
        num = weak_quasinorm(g, p, ww) if weak else lp_norm(g, p, ww)
        best = max(best, num / den)
        seen += 1
    if seen == 0:
        raise ValueError("test family is empty")
    return best


# --- fitting and results ----------------------------------------------------------------


def fit_exponent(points) -> tuple[float, float, float]:
    """Least-squares line through (log x, log y); returns (slope, intercept, rms residual)."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise FitError("need at least 3 points to fit an exponent")
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise FitError("fit points must be positive")
    if np.unique(xs).size != xs.size:
        raise FitError("fit abscissae must be distinct")
    lx, ly = np.log(xs), np.log(ys)
    A = np.vstack([lx, np.ones_like(lx)]).T
    (slope, icept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    res = ly - (slope * lx + icept)
    return float(slope), float(icept), float(np.sqrt(np.mean(res**2)))


@dataclass
class ScanResult:
    kind: str
    param: str
    params: list
    values: list
    apchar: list | None = None
    slope: float | None = None
    intercept: float | None = None
    residual: float | None = None
    meta: dict = field(default_factory=dict)

    def fit(self, x: list | None = None) -> "ScanResult":
        xs = self.params if x is None else x
        pts = [(a, b) for a, b in zip(xs, self.values) if a > 0 and b > 0]
        self.slope, self.intercept, self.residual = fit_exponent(pts)
        return self

    def rows(self) -> list[dict]:
        out = []
        for i, (a, v) in enumerate(zip(self.params, self.values)):
            row = {self.param: a, "value": v}
            if self.apchar is not None:
                row["apchar"] = self.apchar[i]
            out.append(row)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        rows = self.rows()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: repr(float(v)) for k, v in r.items()})
        return buf.getvalue()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fit"] = {"slope": d.pop("slope"), "intercept": d.pop("intercept"), "residual": d.pop("residual")}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# --- scans -------------------------------------------------------------------------------


def scan_aperture(p: float, w: Weight | None, kernel: KernelSpec, alphas, family: TestFamily,
                  tgrid: TGrid | None = None, weak: bool = False) -> ScanResult:
    """Measured ||S_alpha|| lower estimate against alpha; fitted log-log slope."""
    alphas = sorted(alphas)
    if len(alphas) < 3:
        raise FitError("aperture scans need at least 3 apertures")
    members = list(family)
    dom = members[0][0].domain
    tg = tgrid or default_tgrid(dom)
    # the field does not depend on alpha; build each once
    fields = [(conv_field(f, kernel, tg), f, fw) for f, fw in members]
    vals = []
    for a in alphas:
        best = 0.0
        for F, f, fw in fields:
            ww = w if w is not None else fw
            den = lp_norm(f, p, ww)
            if den == 0:
                continue
            g = cone_square(F, a, exact=False)
            num = weak_quasinorm(g, p, ww) if weak else lp_norm(g, p, ww)
            best = max(best, num / den)
        vals.append(best)
    n = dom.n
    res = ScanResult("aperture", "alpha", alphas, vals,
                     meta={"p": p, "kernel": kernel.name, "weighted": w is not None, "weak": weak,
                           "family": family.name, "upper_exponent": n,
                           "unweighted_lower_exponent": n / min(p, 2.0)})
    return res.fit()


def scan_weight(p: float, kernel: KernelSpec | None, deltas, op: str, tgrid: TGrid | None = None,
                dom: Domain | None = None, scope: str = "all", **opkw) -> ScanResult:
    """Measured norm ratio on the extremal pair (f_delta, w_delta) against [w_delta]_{A_p}."""
    deltas = sorted(deltas, reverse=True)
    if len(deltas) < 3:
        raise FitError("weight scans need at least 3 values of delta")
    dom = dom or Domain(1, 2, 9)
    if op == "T2m" and "family" not in opkw:
        opkw["family"] = chain_family(dom)
    spec = OpSpec(op, kernel=kernel, tgrid=tgrid, **opkw)
    vals, chars = [], []
    for d in deltas:
        w, char = power_weight(dom, p, d, scope)
        f = extremal_f(dom, d)
        vals.append(lp_norm(spec(f), p, w) / lp_norm(f, p, w))
        chars.append(char)
    target = 1.0 / (p - 1.0) if op == "M" else max(0.5, 1.0 / (p - 1.0))
    res = ScanResult("weight", "delta", deltas, vals, apchar=chars,
                     meta={"p": p, "op": op, "kernel": kernel.name if kernel else None,
                           "apchar_scope": scope, "upper_exponent": target})
    return res.fit(chars)


def scan_shift_growth(fam: SparseFamily, f: Signal, w: Weight | None, ms, p: float = 3.0) -> ScanResult:
    """||T_{2,m} f||_{L^p(w)} against m (m = 0 is reported but left out of the fit)."""
    ms = sorted(ms)
    dom = f.domain
    for m in ms:
        if not dilation_margin_ok(fam, dom, m):
            raise MarginError(f"2^{m} dilations of the family leave the ambient box")
    vals = [lp_norm(sparse_square(fam, f, m), p, w) for m in ms]
    res = ScanResult("shift_growth", "m", ms, vals, meta={"p": p, "upper_exponent": 0.5, "family_size": len(fam)})
    pts = [(m, v) for m, v in zip(ms, vals) if m > 0 and v > 0]
    if len(pts) >= 3:
        res.slope, res.intercept, res.residual = fit_exponent(pts)
    return res


def scan_weak(p: float, kernel: KernelSpec, params, mode: str, family: TestFamily | None = None,
              tgrid: TGrid | None = None, dom: Domain | None = None) -> ScanResult:
    """Weak-type scans.

    ``mode="aperture"``: p = 1, ratio ||S_alpha f||_{L^{1,inf}} / ||f||_{L^1} against alpha.
    ``mode="weighted"``: 2 < p < 3, ratio ||S f_delta||_{L^{p,inf}(w_delta)} / ||f_delta||_{L^p(w_delta)}
    against [w_delta]_{A_p} (reported only).
    """
    if mode == "aperture":
        if p != 1:
            raise DomainError("the aperture weak-type mode uses p = 1")
        if family is None:
            raise ValueError("aperture mode needs a test family")
        res = scan_aperture(1.0, None, kernel, params, family, tgrid, weak=True)
        res.kind = "weak_aperture"
        return res
    if mode == "weighted":
        if not 2 < p < 3:
            raise DomainError("the weighted weak-type mode needs 2 < p < 3")
        dom = dom or Domain(1, 2, 9)
        deltas = sorted(params, reverse=True)
        spec = OpSpec("S_alpha", kernel=kernel, tgrid=tgrid)
        vals, chars = [], []
        for d in deltas:
            w, char = power_weight(dom, p, d)
            f = extremal_f(dom, d)
            vals.append(weak_quasinorm(spec(f), p, w) / lp_norm(f, p, w))
            chars.append(char)
        res = ScanResult("weak_weighted", "delta", deltas, vals, apchar=chars,
                         meta={"p": p, "kernel": kernel.name, "reference_exponent": max(0.5, 1.0 / p),
                               "log_allowance": "1 + log t"})
        return res.fit(chars) if len(deltas) >= 3 else res
    raise ValueError(f"unknown weak-scan mode {mode!r}")
