"""Fields on the discretized upper half-space and the square functions built on them.

A field stores F(y, t_l) for y at cell centres and t_l = t_min * ratio^l. The
measure dy dt / t^2 (n = 1) becomes the weight ``h * ln(ratio) / t_l`` per
(y, t_l) node. Square functions are evaluated as exact cell averages in x:

    S_a(F)^2 [cell i] = sum_l sum_j |F(y_j, t_l)|^2 h ln(ratio) / t_l * w_l(i - j),

with ``w_l(d)`` the average over the x-cell of the cone indicator
(|x - y| < a t), of the bump Phi((x - y) / (a t)) or of (t / (t + |x - y|))^mu.

Two evaluation paths share these weights. ``exact=True`` accumulates in one
fixed order (compiled kernel or its numpy twin), so weight-wise inequalities
survive rounding and hold bit for bit. ``exact=False`` uses FFT convolution
and is meant for scans.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from . import _backend
from .kernels import BumpSpec, KernelSpec
from .signal import Domain, Signal


class QuadratureError(ValueError):
    """The requested t-grid is finer than the spatial grid can resolve."""


class CoverageError(ValueError):
    """The largest cone of a majorant does not reach the whole field support."""


@dataclass(frozen=True)
class TGrid:
    t_min: float
    ratio: float
    L: int

    def __post_init__(self):
        if not (self.t_min > 0 and self.ratio > 1 and self.L >= 1):
            raise ValueError("t-grid needs t_min > 0, ratio > 1 and L >= 1")

    @property
    def t(self) -> np.ndarray:
        return self.t_min * self.ratio ** np.arange(self.L)

    @property
    def t_max(self) -> float:
        return float(self.t[-1])

    @property
    def log_ratio(self) -> float:
        return math.log(self.ratio)

    @classmethod
    def parse(cls, text: str) -> "TGrid":
        """Parse ``t_min:ratio:L`` (ratio may be written ``2^(1/4)``)."""
        try:
            a, r, L = text.split(":")
            r = r.strip()
            if r.startswith("2^"):
                num, den = r[2:].strip("()").split("/") if "/" in r else (r[2:], "1")
                ratio = 2.0 ** (float(num) / float(den))
            else:
                ratio = float(r)
            return cls(float(a), ratio, int(L))
        except ValueError as exc:
            raise ValueError(f"bad t-grid {text!r}: expected t_min:ratio:L") from exc

    def __str__(self):
        return f"{self.t_min!r}:{self.ratio!r}:{self.L}"


def default_tgrid(dom: Domain, ratio: float = 2.0**0.25) -> TGrid:
    """Levels from 2h up to the box side."""
    t_min = 2 * dom.h
    L = int(math.floor(math.log(float(dom.side) / t_min) / math.log(ratio) + 1e-9)) + 1
    return TGrid(t_min, ratio, L)


@dataclass(frozen=True)
class Field:
    """F(y, t_l) with shape (L, cells); y at cell centres."""

    domain: Domain
    tgrid: TGrid
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.domain.n != 1:
            raise ValueError("fields are implemented for n = 1")
        arr = np.array(self.values, dtype=np.float64)
        if arr.shape != (self.tgrid.L, self.domain.cells):
            raise ValueError(f"field shape {arr.shape} does not match t-grid and domain")
        if not np.all(np.isfinite(arr)):
            raise ValueError("field values must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def node_weights(self) -> np.ndarray:
        """dy dt / t^2 quadrature weight per level."""
        return self.domain.h * self.tgrid.log_ratio / self.tgrid.t

    def energy(self) -> np.ndarray:
        """|F|^2 times the node weight, shape (L, cells)."""
        return self.values**2 * self.node_weights[:, None]

    @classmethod
    def zeros(cls, dom: Domain, tgrid: TGrid) -> "Field":
        return cls(dom, tgrid, np.zeros((tgrid.L, dom.cells)))


# --- convolution fields -------------------------------------------------------


def _kernel_band(k: KernelSpec, t: float, h: float, N: int) -> int:
    return int(min(N - 1, math.ceil(k.reach * t / h) + 1))


def conv_field(f: Signal, k: KernelSpec, tgrid: TGrid, method: str = "fft") -> Field:
    """F(y, t) = (f * psi_t)(y) at cell centres, integrated exactly cell by cell."""
    dom = f.domain
    if dom.n != 1:
        raise ValueError("conv_field is implemented for n = 1")
    if tgrid.t_min < dom.h:
        raise QuadratureError(f"t_min={tgrid.t_min} is below the grid step {dom.h}")
    if method not in ("fft", "direct"):
        raise ValueError(f"unknown method {method!r}")
    N, h = dom.cells, dom.h
    out = np.empty((tgrid.L, N))
    for l, t in enumerate(tgrid.t):
        D = _kernel_band(k, t, h, N)
        w = k.cell_weights(t, h, D)
        full = fftconvolve(f.values, w) if method == "fft" else np.convolve(f.values, w)
        out[l] = full[D : D + N]
    return Field(dom, tgrid, out, meta=_source_meta(f, k))


def _source_meta(f: Signal, k: KernelSpec) -> dict:
    dom = f.domain
    nz = np.nonzero(f.values)[0]
    if nz.size:
        gap = min(nz[0], dom.cells - 1 - nz[-1]) * dom.h
    else:
        gap = float(dom.side)
    x = np.linspace(-k.reach, k.reach, 20001)
    c_decay = k.c_decay
    if not math.isfinite(c_decay):
        from .kernels import validate_kernel

        c_decay = validate_kernel(k).decay_const
    return {
        "kernel": k.name,
        "l1": float(np.abs(f.values).sum() * dom.h),
        "psi_sup": float(np.abs(k.psi(x)).max()),
        "c_decay": c_decay,
        "eps": k.eps,
        "gap": float(gap),
    }


# --- weights ------------------------------------------------------------------


def cone_weights(r: float, D: int) -> np.ndarray:
    """Average over the x-cell of chi(|x - y| < r), offsets -D..D, r in cell units."""
    d = np.arange(-D, D + 1, dtype=np.float64)
    return np.maximum(0.0, np.minimum(d + 0.5, r) - np.maximum(d - 0.5, -r))


def bump_weights(bump: BumpSpec, r: float, D: int) -> np.ndarray:
    """Average over the x-cell of Phi((x - y) / r), clamped between the r and 2r cones.

    The clamp only absorbs rounding in the tabulated antiderivative; the exact
    cell averages already lie in that range.
    """
    lo, hi = cone_weights(r, D), cone_weights(2 * r, D)
    if bump.kind == "indicator":
        return lo
    d = np.arange(-D, D + 1, dtype=np.float64)
    w = r * (bump.antiderivative((d + 0.5) / r) - bump.antiderivative((d - 0.5) / r))
    return np.minimum(np.maximum(w, lo), hi)


def gstar_weights(tau: float, mu: float, D: int) -> np.ndarray:
    """Average over the x-cell of (tau / (tau + |x - y|))^mu, tau in cell units."""
    def B(u):
        s = np.sign(u)
        return s * tau / (mu - 1.0) * (1.0 - (tau / (tau + np.abs(u))) ** (mu - 1.0))

    d = np.arange(-D, D + 1, dtype=np.float64)
    return B(d + 0.5) - B(d - 0.5)


def _band(r: float, N: int) -> int:
    return int(min(N - 1, math.ceil(r + 0.5)))


def _accumulate(G: np.ndarray, weights: list[np.ndarray], exact: bool) -> np.ndarray:
    """sum_l (G[l] conv weights[l]), each weight row centred on offset 0."""
    L, N = G.shape
    if exact:
        Dmax = max((w.size - 1) // 2 for w in weights)
        W = np.zeros((L, 2 * Dmax + 1))
        D = np.empty(L, dtype=np.int64)
        for l, w in enumerate(weights):
            d = (w.size - 1) // 2
            W[l, Dmax - d : Dmax + d + 1] = w
            D[l] = d
        return _backend.band_accumulate(G, W, D)
    out = np.zeros(N)
    for l, w in enumerate(weights):
        if not G[l].any():
            continue
        d = (w.size - 1) // 2
        out += fftconvolve(G[l], w)[d : d + N]
    # FFT round-off can leave tiny negatives where the exact sum is zero
    return np.maximum(out, 0.0)


def _sqrt_signal(F: Field, sq: np.ndarray) -> Signal:
    return Signal(F.domain, np.sqrt(sq))


def cone_square_sq(F: Field, alpha: float, exact: bool = True) -> np.ndarray:
    """Cell values of S_alpha(F)^2."""
    if not alpha > 0:
        raise ValueError("aperture must be positive")
    h, N = F.domain.h, F.domain.cells
    ws = []
    for t in F.tgrid.t:
        r = alpha * t / h
        ws.append(cone_weights(r, _band(r, N)))
    return _accumulate(F.energy(), ws, exact)


def cone_square(F: Field, alpha: float, exact: bool = True) -> Signal:
    """S_alpha(F): square root of the cone integral of |F|^2 dy dt / t^2."""
    return _sqrt_signal(F, cone_square_sq(F, alpha, exact))


def smooth_square(F: Field, bump: BumpSpec, alpha: float, exact: bool = True) -> Signal:
    """Cone integral with the indicator replaced by Phi((x - y) / (alpha t))."""
    if not alpha > 0:
        raise ValueError("aperture must be positive")
    h, N = F.domain.h, F.domain.cells
    ws = []
    for t in F.tgrid.t:
        r = alpha * t / h
        ws.append(bump_weights(bump, r, _band(2 * r, N)))
    return _sqrt_signal(F, _accumulate(F.energy(), ws, exact))


def gstar(F: Field, mu: float, exact: bool = True) -> Signal:
    """g*_mu(F): full-line integral with weight (t / (t + |x - y|))^mu."""
    if not mu > 1:
        raise ValueError("g* needs mu > 1")
    h, N = F.domain.h, F.domain.cells
    ws = [gstar_weights(t / h, mu, N - 1) for t in F.tgrid.t]
    return _sqrt_signal(F, _accumulate(F.energy(), ws, exact))


def _support_reach(F: Field) -> float:
    """Largest |x - y| (cell units) between any x-cell point and a y-node carrying energy."""
    live = np.nonzero(np.any(F.values != 0, axis=0))[0]
    if live.size == 0:
        return 0.0
    N = F.domain.cells
    return float(max(live[-1] + 0.5, N - 0.5 - live[0]))


def coverage_count(F: Field) -> int:
    """Smallest annulus count K for which the 2^(K+1) cone covers the field support."""
    reach = _support_reach(F)
    tau = F.tgrid.t_min / F.domain.h
    K = 0
    while 2 ** (K + 1) * tau <= reach:
        K += 1
    return K


def gstar_cone_majorant(F: Field, mu: float, K: int | None = None, exact: bool = True) -> Signal:
    """S_1(F) + sum_{k=0}^{K} 2^(-k mu / 2) S_{2^(k+1)}(F).

    Raises :class:`CoverageError` if the aperture 2^(K+1) cone at the smallest
    t does not reach every point of the field support from every x.
    """
    if not mu > 1:
        raise ValueError("g* needs mu > 1")
    need = coverage_count(F)
    if K is None:
        K = need
    if K < need:
        raise CoverageError(f"K={K} leaves part of the support uncovered; need K >= {need}")
    out = cone_square(F, 1.0, exact).values.copy()
    for k in range(K + 1):
        out = out + 2.0 ** (-k * mu / 2) * cone_square(F, 2.0 ** (k + 1), exact).values
    return Signal(F.domain, out)


# --- truncation accounting ----------------------------------------------------


def tail_bound(F: Field, alpha: float | None = None, mu: float | None = None) -> float:
    """Upper bound for the part of S_alpha(F) (or g*_mu(F)) the grid leaves out.

    Two pieces are bounded for a convolution field of a signal f:
    scales t > t_max, where |F| <= ||f||_1 sup|psi| / t, and nodes y outside the
    box at t <= t_max, where |F| <= ||f||_1 c_decay t^eps / gap^(1+eps) with
    ``gap`` the distance from supp f to the box boundary. Returns ``inf``
    when the field carries no source metadata.
    """
    m = F.meta
    if not m or not math.isfinite(m.get("c_decay", math.inf)):
        return math.inf
    C1 = m["l1"] * m["psi_sup"]
    T = F.tgrid.t_max
    eps, gap = m["eps"], max(m["gap"], F.domain.h)
    C2 = m["l1"] * m["c_decay"]
    if mu is not None:
        large = C1**2 / ((mu - 1.0) * T**2)
        outside = C2**2 * 2.0 / ((1 + 2 * eps) * gap ** (1 + 2 * eps)) * T ** (2 * eps) / (2 * eps)
    else:
        a = 1.0 if alpha is None else alpha
        large = a * C1**2 / T**2
        outside = a * C2**2 * T ** (2 * eps) / (eps * gap ** (2 + 2 * eps))
    return math.sqrt(large + outside)


# --- the good-set inequality ----------------------------------------------------


def good_set_energies(F: Field, omega: np.ndarray, alpha: float) -> tuple[float, float]:
    """(int over the complement of U of S_alpha^2, 2 alpha * int over the complement of Omega of S_1^2).

    ``omega`` is a boolean cell mask for the open set Omega and
    U = {M chi_Omega > 1 / (2 alpha)} uses :func:`apsquare.signal.hl_maximal`.
    """
    from .signal import hl_maximal

    dom = F.domain
    om = np.asarray(omega, dtype=bool)
    U = hl_maximal(Signal(dom, om.astype(np.float64))).values > 1.0 / (2.0 * alpha)
    lhs = float(np.sum(cone_square_sq(F, alpha)[~U]) * dom.h)
    rhs = 2.0 * alpha * float(np.sum(cone_square_sq(F, 1.0)[~om]) * dom.h)
    return lhs, rhs
