"""Piecewise-constant signals and weights on a uniform grid, and the scalar
functionals built on them: averages, rearrangements, medians, local mean
oscillation, the dyadic local sharp maximal function, the Hardy-Littlewood
maximal function, weighted strong and weak norms and A_p characteristics.

Rearrangements follow the left-continuous convention

    f*(t) = inf{a >= 0 : |{|f| > a}| < t},

for which |m_f(Q)| <= (f chi_Q)*(|Q|/2) holds with the maximal median.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from . import _backend
from .geometry import Box, Cube, ResolutionError, descendants, grid_ids, grid_shift


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class Domain:
    """Ambient box ``[-2^J, 2^J)^n`` cut into cells of side ``h = 2^-K``."""

    n: int = 1
    J: int = 2
    K: int = 9

    def __post_init__(self):
        if self.n not in (1, 2):
            raise DomainError("only n = 1 and n = 2 are supported")
        if self.J + 1 + self.K <= 0:
            raise DomainError("the box must contain at least two cells per side")

    @property
    def lo(self) -> Fraction:
        return -Fraction(2) ** self.J

    @property
    def side(self) -> Fraction:
        return Fraction(2) ** (self.J + 1)

    @property
    def h(self) -> float:
        return 2.0**-self.K

    @property
    def cells(self) -> int:
        """Cells per side."""
        return 2 ** (self.J + 1 + self.K)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cells,) * self.n

    @property
    def cell_volume(self) -> float:
        return self.h**self.n

    @property
    def box(self) -> Box:
        return Box((self.lo,) * self.n, (self.lo + self.side,) * self.n)

    def coords(self) -> np.ndarray:
        """Left corners of the cells along one axis."""
        return float(self.lo) + self.h * np.arange(self.cells)

    def centers(self) -> np.ndarray:
        return self.coords() + 0.5 * self.h

    def cell_of(self, x: Sequence) -> tuple[int, ...]:
        idx = tuple(math.floor((Fraction(v) - self.lo) * 2**self.K) for v in x)
        if any(not 0 <= i < self.cells for i in idx):
            raise DomainError(f"point {tuple(x)} is outside the ambient box")
        return idx

    def cube_slices(self, q: Cube) -> tuple[slice, ...]:
        """Cell slices covered by a cell-aligned cube inside the box."""
        return self.box_slices(q.box)

    def box_slices(self, box: Box) -> tuple[slice, ...]:
        out = []
        for a, b in zip(box.lo, box.hi):
            ia = (a - self.lo) * 2**self.K
            ib = (b - self.lo) * 2**self.K
            if ia.denominator != 1 or ib.denominator != 1:
                raise DomainError(f"{box} is not aligned with the cells")
            if ia < 0 or ib > self.cells:
                raise DomainError(f"{box} leaves the ambient box")
            out.append(slice(int(ia), int(ib)))
        return tuple(out)

    def axis_overlaps(self, a: Fraction, b: Fraction) -> tuple[int, np.ndarray]:
        """First cell index and per-cell overlap (in cell units) of ``[a, b)`` with the box."""
        lo, scale = self.lo, 2**self.K
        ua = max((Fraction(a) - lo) * scale, Fraction(0))
        ub = min((Fraction(b) - lo) * scale, Fraction(self.cells))
        if ua >= ub:
            return 0, np.zeros(0)
        i0, i1 = math.floor(ua), math.ceil(ub)
        w = np.ones(i1 - i0)
        w[0] -= float(ua - i0)
        w[-1] -= float(i1 - ub)
        return i0, w


class Signal:
    """Real samples on the cells of a :class:`Domain` (immutable)."""

    __slots__ = ("domain", "values")

    def __init__(self, domain: Domain, values):
        arr = np.array(values, dtype=np.float64)
        if arr.shape != domain.shape:
            raise DomainError(f"expected {domain.shape} samples, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DomainError("signal values must be finite")
        arr.flags.writeable = False
        self.domain = domain
        self.values = arr

    @classmethod
    def zeros(cls, domain: Domain) -> "Signal":
        return cls(domain, np.zeros(domain.shape))

    @classmethod
    def from_function(cls, domain: Domain, fn) -> "Signal":
        """Sample ``fn`` at cell left corners (``fn`` takes n coordinate arrays)."""
        grids = np.meshgrid(*([domain.coords()] * domain.n), indexing="ij")
        return cls(domain, np.broadcast_to(fn(*grids), domain.shape))

    def integral(self) -> float:
        return float(self.values.sum() * self.domain.cell_volume)

    def __neg__(self):
        return Signal(self.domain, -self.values)

    def __abs__(self):
        return Signal(self.domain, np.abs(self.values))

    def _binary(self, other, op):
        other = other.values if isinstance(other, Signal) else other
        return Signal(self.domain, op(self.values, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __pow__(self, e):
        return Signal(self.domain, self.values**e)

    def __repr__(self):
        return f"Signal(n={self.domain.n}, J={self.domain.J}, K={self.domain.K})"


class Weight(Signal):
    """A strictly positive signal, optionally tagged with the exponent it is paired with."""

    __slots__ = ("p",)

    def __init__(self, domain: Domain, values, p: float | None = None):
        super().__init__(domain, values)
        if not np.all(self.values > 0):
            raise DomainError("weights must be strictly positive")
        self.p = p

    @classmethod
    def ones(cls, domain: Domain) -> "Weight":
        return cls(domain, np.ones(domain.shape))


# --- restriction of a signal to a region --------------------------------------


def _region_box(R) -> Box:
    if isinstance(R, Cube):
        return R.box
    if isinstance(R, Box):
        return R
    raise TypeError(f"expected a Cube or Box, got {type(R).__name__}")


def restrict(f: Signal, R) -> tuple[np.ndarray, np.ndarray, float]:
    """Values of ``f`` meeting ``R``, their overlap masses (cell units) and |R| (cell units).

    Parts of ``R`` outside the ambient box carry the zero extension.
    """
    box = _region_box(R)
    dom = f.domain
    vol = float(box.volume * Fraction(2) ** (dom.K * dom.n))
    if vol <= 0:
        raise DomainError("region has zero volume")
    starts, weights = zip(*(dom.axis_overlaps(a, b) for a, b in zip(box.lo, box.hi)))
    if any(w.size == 0 for w in weights):
        return np.zeros(1), np.array([vol]), vol
    sl = tuple(slice(s, s + w.size) for s, w in zip(starts, weights))
    vals = f.values[sl].ravel()
    mass = weights[0]
    for w in weights[1:]:
        mass = np.multiply.outer(mass, w)
    mass = mass.ravel()
    outside = vol - float(mass.sum())
    if outside > 0:
        vals = np.append(vals, 0.0)
        mass = np.append(mass, outside)
    return vals, mass, vol


def average(f: Signal, R) -> float:
    """(1/|R|) * integral of f over R, with f extended by zero outside the box."""
    box = _region_box(R)
    if box.volume <= 0:
        raise DomainError("region has zero volume")
    dom = f.domain
    starts, weights = zip(*(dom.axis_overlaps(a, b) for a, b in zip(box.lo, box.hi)))
    if any(w.size == 0 for w in weights):
        return 0.0
    sl = tuple(slice(s, s + w.size) for s, w in zip(starts, weights))
    block = f.values[sl]
    if all(np.all(w == 1.0) for w in weights):
        total = float(block.sum())
    else:
        total = float(np.einsum(block, list(range(dom.n)), *sum(([w, [d]] for d, w in enumerate(weights)), [])))
    return total / float(box.volume * Fraction(2) ** (dom.K * dom.n))


# --- distribution-level primitives (values with masses) ------------------------


def _rearr(vals: np.ndarray, mass: np.ndarray, t: float) -> float:
    a = np.abs(vals)
    u, inv = np.unique(a, return_inverse=True)
    m = np.bincount(inv.ravel(), weights=mass)
    u, m = u[::-1], m[::-1]
    above = np.concatenate(([0.0], np.cumsum(m)[:-1]))  # mass strictly greater than u[k]
    ok = above < t
    cand = float(u[ok][-1])
    # past the last sample value the zero level is the candidate
    if u[-1] > 0 and float(m.sum()) < t:
        cand = 0.0
    return cand


def _median(vals: np.ndarray, mass: np.ndarray) -> float:
    u, inv = np.unique(vals, return_inverse=True)
    m = np.bincount(inv.ravel(), weights=mass)
    cum = np.cumsum(m)
    half = float(mass.sum()) / 2
    return float(u[np.searchsorted(cum, half, side="right")])


def _osc(vals: np.ndarray, mass: np.ndarray, lam: float) -> float:
    order = np.argsort(vals, kind="stable")
    v, m = vals[order], mass[order]
    cum = np.concatenate(([0.0], np.cumsum(m)))
    total = cum[-1]
    need = total - lam * total
    j1 = np.searchsorted(cum, cum[:-1] + need, side="right")
    ok = j1 <= v.size
    if not np.any(ok):
        return float((v[-1] - v[0]) / 2)
    i = np.nonzero(ok)[0]
    return float(np.min(v[j1[ok] - 1] - v[i]) / 2)


# --- public functionals --------------------------------------------------------


def rearrangement(f: Signal, R, t: float) -> float:
    """Non-increasing rearrangement of |f| chi_R at ``t`` (domain measure units)."""
    if not t > 0:
        raise DomainError("t must be positive")
    vals, mass, _ = restrict(f, R)
    return _rearr(vals, mass, t / f.domain.cell_volume)


def median(f: Signal, Q) -> float:
    """The maximal median value of f over Q."""
    vals, mass, _ = restrict(f, Q)
    return _median(vals, mass)


def local_osc(f: Signal, Q, lam: float) -> float:
    """Local mean oscillation: inf over c of ((f - c) chi_Q)*(lam |Q|)."""
    if not 0 < lam < 1:
        raise DomainError("lambda must lie in (0, 1)")
    vals, mass, _ = restrict(f, Q)
    return _osc(vals, mass, lam)


def _blocks(arr: np.ndarray, b: int) -> np.ndarray:
    """Split an n-D array into b^n blocks; returns shape (*block grid, b^n)."""
    if arr.ndim == 1:
        return arr.reshape(-1, b)
    nb0, nb1 = arr.shape[0] // b, arr.shape[1] // b
    return arr.reshape(nb0, b, nb1, b).transpose(0, 2, 1, 3).reshape(nb0, nb1, b * b)


def _unblock(vals: np.ndarray, b: int, n: int) -> np.ndarray:
    """Broadcast one value per block back to cells."""
    if n == 1:
        return np.repeat(vals, b)
    return np.repeat(np.repeat(vals, b, axis=0), b, axis=1)


def block_osc(arr: np.ndarray, b: int, lam: float) -> np.ndarray:
    """Local mean oscillation on every b^n block of equal cells (vectorized)."""
    srt = np.sort(_blocks(arr, b), axis=-1)
    size = srt.shape[-1]
    out_max = math.ceil(lam * size) - 1  # largest cell count strictly below lam * size
    k = size - out_max
    span = srt[..., k - 1 :] - srt[..., : size - k + 1]
    return span.min(axis=-1) / 2


def block_median(arr: np.ndarray, b: int) -> np.ndarray:
    srt = np.sort(_blocks(arr, b), axis=-1)
    return srt[..., srt.shape[-1] // 2]


def _check_root(dom: Domain, q0: Cube):
    if q0.grid != 0 or q0.dilation != 1:
        raise DomainError("root cubes must belong to the standard grid")
    if q0.level > dom.K:
        raise ResolutionError(f"root level {q0.level} is finer than the grid (K={dom.K})")
    dom.cube_slices(q0)


def local_sharp_max(f: Signal, q0: Cube, lam: float) -> Signal:
    """Dyadic local sharp maximal function on q0 (zero outside q0)."""
    if not 0 < lam < 1:
        raise DomainError("lambda must lie in (0, 1)")
    dom = f.domain
    _check_root(dom, q0)
    sl = dom.cube_slices(q0)
    sub = f.values[sl]
    side = sub.shape[0]
    acc = np.zeros_like(sub)
    b = side
    while b >= 2:
        np.maximum(acc, _unblock(block_osc(sub, b, lam), b, dom.n), out=acc)
        b //= 2
    out = np.zeros(dom.shape)
    out[sl] = acc
    return Signal(dom, out)


def hl_maximal(f: Signal) -> Signal:
    """Uncentred maximal function over cell-aligned cubes, taken on each closed cell.

    A cube counts for a cell when its closure meets the closed cell, so the
    value is the supremum of the continuous maximal function over that cell.
    """
    dom = f.domain
    a = np.abs(f.values)
    if dom.n == 1:
        prefix = np.concatenate(([0.0], np.cumsum(a)))
        return Signal(dom, _backend.touching_maximal(prefix))
    return Signal(dom, _touching_maximal_2d(a))


def _box_sums_2d(S: np.ndarray, s: int) -> np.ndarray:
    return S[s:, s:] - S[:-s, s:] - S[s:, :-s] + S[:-s, :-s]


def _cumsum2(a: np.ndarray) -> np.ndarray:
    S = np.zeros((a.shape[0] + 1, a.shape[1] + 1))
    S[1:, 1:] = a.cumsum(0).cumsum(1)
    return S


def _touching_maximal_2d(a: np.ndarray) -> np.ndarray:
    from scipy.ndimage import maximum_filter

    N = a.shape[0]
    S = _cumsum2(a)
    out = np.zeros_like(a)
    for s in range(1, N + 1):
        avg = _box_sums_2d(S, s) / float(s * s)
        w = s + 2
        pad = np.full((N + s + 1, N + s + 1), -np.inf)
        pad[s : s + avg.shape[0], s : s + avg.shape[1]] = avg
        filt = maximum_filter(pad, size=w, mode="constant", cval=-np.inf)
        np.maximum(out, filt[w // 2 : w // 2 + N, w // 2 : w // 2 + N], out=out)
    return out


def lp_norm(f: Signal, p: float, w: Weight | None = None) -> float:
    if p < 1:
        raise DomainError("p must be >= 1")
    dens = np.abs(f.values) ** p
    if w is not None:
        dens = dens * w.values
    val = float(dens.sum() * f.domain.cell_volume) ** (1.0 / p)
    if not math.isfinite(val):
        raise OverflowError("L^p norm is not finite")
    return val


def weak_quasinorm(f: Signal, p: float, w: Weight | None = None) -> float:
    """sup over xi > 0 of xi * w({|f| > xi})^(1/p), attained at a sample magnitude."""
    if p < 1:
        raise DomainError("p must be >= 1")
    a = np.abs(f.values).ravel()
    m = (w.values.ravel() if w is not None else np.ones_like(a)) * f.domain.cell_volume
    u, inv = np.unique(a, return_inverse=True)
    mass = np.bincount(inv.ravel(), weights=m)
    at_least = np.cumsum(mass[::-1])[::-1]  # w({|f| >= u_k}), the limit from below
    pos = u > 0
    if not np.any(pos):
        return 0.0
    return float(np.max(u[pos] * at_least[pos] ** (1.0 / p)))


class ApChar(NamedTuple):
    value: float
    region: Box


def _dual(w: np.ndarray, p: float) -> np.ndarray:
    return w ** (-1.0 / (p - 1.0))


def _ap_value(aw: np.ndarray, asg: np.ndarray, p: float) -> np.ndarray:
    return aw * np.power(asg, p - 1.0)


def ap_char(w: Weight, p: float, scope: str = "all") -> ApChar:
    """Supremum of avg_Q(w) * avg_Q(w^(-1/(p-1)))^(p-1) over a family of cubes.

    ``scope`` is ``"all"`` (every cell-aligned cube in the box), ``"dyadic"``
    (standard dyadic cubes in the box) or ``"shifted"`` (dyadic cubes of the
    standard grid and of the 2^n one-third-shifted grids that fit in the box).
    """
    if not p > 1:
        raise DomainError("A_p needs p > 1")
    dom = w.domain
    sig = _dual(w.values, p)
    if scope == "all":
        return _ap_all(dom, w.values, sig, p)
    if scope == "dyadic":
        return _ap_dyadic(dom, w.values, sig, p)
    if scope == "shifted":
        return max(_ap_dyadic(dom, w.values, sig, p), _ap_shifted(dom, w.values, sig, p), key=lambda r: r.value)
    raise ValueError(f"unknown A_p scope {scope!r}")


def _interval_box(dom: Domain, starts: Sequence[int], size: int) -> Box:
    h = Fraction(1, 2**dom.K)
    lo = tuple(dom.lo + s * h for s in starts)
    return Box(lo, tuple(a + size * h for a in lo))


def _ap_all(dom: Domain, w: np.ndarray, sig: np.ndarray, p: float) -> ApChar:
    if dom.n == 1:
        pw = np.concatenate(([0.0], np.cumsum(w)))
        ps = np.concatenate(([0.0], np.cumsum(sig)))
        val, a, b = _backend.ap_all_intervals(pw, ps, float(p))
        return ApChar(float(val), _interval_box(dom, (a,), b - a))
    Sw, Ss = _cumsum2(w), _cumsum2(sig)
    best = ApChar(-np.inf, dom.box)
    for s in range(1, dom.cells + 1):
        area = float(s * s)
        val = _ap_value(_box_sums_2d(Sw, s) / area, _box_sums_2d(Ss, s) / area, p)
        k = np.unravel_index(int(np.argmax(val)), val.shape)
        if val[k] > best.value:
            best = ApChar(float(val[k]), _interval_box(dom, k, s))
    return best


def _ap_dyadic(dom: Domain, w: np.ndarray, sig: np.ndarray, p: float) -> ApChar:
    best = ApChar(-np.inf, dom.box)
    b = dom.cells // 2  # the box itself is not a dyadic cube; halves are
    while b >= 1:
        val = _ap_value(_blocks(w, b).mean(axis=-1), _blocks(sig, b).mean(axis=-1), p)
        k = np.unravel_index(int(np.argmax(val)), val.shape)
        if val[k] > best.value:
            best = ApChar(float(val[k]), _interval_box(dom, tuple(i * b for i in k), b))
        b //= 2
    return best


def _integral_table(a: np.ndarray) -> np.ndarray:
    if a.ndim == 1:
        return np.concatenate(([0.0], np.cumsum(a)))
    return _cumsum2(a)


def _primitive_1d(P: np.ndarray, a: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Integral of a piecewise-constant array from 0 to u (cell units)."""
    i = np.clip(np.floor(u).astype(int), 0, a.size - 1)
    return P[i] + (u - i) * a[i]


def _ap_shifted(dom: Domain, w: np.ndarray, sig: np.ndarray, p: float) -> ApChar:
    best = ApChar(-np.inf, dom.box)
    Pw, Ps = _integral_table(w), _integral_table(sig)
    scale = 2**dom.K
    for g in grid_ids(dom.n):
        shift = grid_shift(g, dom.n)
        b = dom.cells // 2
        while b >= 1:
            side = Fraction(b, scale)
            level = dom.K - (b.bit_length() - 1)
            sgn = 1 if level % 2 == 0 else -1
            # lower corners (cell units) of the grid-g cubes of this side inside the box
            axes = []
            for s in shift:
                off = (sgn * s * side - dom.lo) * scale % b
                axes.append([off + i * b for i in range(math.floor((dom.cells - off) / b))])
            if dom.n == 1:
                u0 = np.array([float(u) for u in axes[0]])
                if u0.size:
                    aw = (_primitive_1d(Pw, w, u0 + b) - _primitive_1d(Pw, w, u0)) / b
                    asg = (_primitive_1d(Ps, sig, u0 + b) - _primitive_1d(Ps, sig, u0)) / b
                    val = _ap_value(aw, asg, p)
                    k = int(np.argmax(val))
                    if val[k] > best.value:
                        lo = dom.lo + axes[0][k] / scale
                        best = ApChar(float(val[k]), Box((lo,), (lo + side,)))
            else:
                val, corner = _ap_shifted_2d(w, sig, axes, b, p)
                if val > best.value:
                    lo = tuple(dom.lo + c / scale for c in corner)
                    best = ApChar(val, Box(lo, tuple(x + side for x in lo)))
            b //= 2
    return best


def _ap_shifted_2d(w, sig, axes, b, p):
    best, corner = -np.inf, (0.0, 0.0)
    for u0 in axes[0]:
        for u1 in axes[1]:
            mw = _frac_block_mean(w, float(u0), float(u1), b)
            ms = _frac_block_mean(sig, float(u0), float(u1), b)
            val = float(_ap_value(np.array(mw), np.array(ms), p))
            if val > best:
                best, corner = val, (u0, u1)
    return best, corner


def _frac_weights(u0: float, b: int, N: int) -> tuple[int, np.ndarray]:
    i0, i1 = int(math.floor(u0)), min(int(math.ceil(u0 + b)), N)
    wts = np.ones(i1 - i0)
    wts[0] -= u0 - i0
    wts[-1] -= i1 - (u0 + b) if i1 - (u0 + b) > 0 else 0.0
    return i0, wts


def _frac_block_mean(a: np.ndarray, u0: float, u1: float, b: int) -> float:
    i0, w0 = _frac_weights(u0, b, a.shape[0])
    j0, w1 = _frac_weights(u1, b, a.shape[1])
    block = a[i0 : i0 + w0.size, j0 : j0 + w1.size]
    return float(w0 @ block @ w1) / (b * b)


def dyadic_cubes(dom: Domain, q0: Cube) -> list[Cube]:
    """All cubes of D(q0) down to single cells."""
    return list(descendants(q0, dom.K - q0.level))


# --- integrals over many boxes ---------------------------------------------------


def box_cells(dom: Domain, box: Box) -> tuple[np.ndarray, np.ndarray]:
    """Box corners in cell units (floats; exact for dyadic corners)."""
    scale = Fraction(2) ** dom.K
    lo = np.array([float((a - dom.lo) * scale) for a in box.lo])
    hi = np.array([float((b - dom.lo) * scale) for b in box.hi])
    return lo, hi


class BoxIntegrator:
    """Integrals of one signal over arbitrary boxes, f extended by zero.

    The primitive of a piecewise-constant function is multilinear inside each
    cell, so interpolating the cumulative table is exact.
    """

    def __init__(self, f: Signal):
        self.domain = f.domain
        self.values = f.values
        self.table = _integral_table(f.values)

    def _prim(self, u: np.ndarray) -> np.ndarray:
        N = self.domain.cells
        u = np.clip(u, 0.0, N)
        if self.domain.n == 1:
            return _primitive_1d(self.table, self.values, u[..., 0])
        i = np.minimum(np.floor(u).astype(int), N - 1)
        fu = u - i
        P = self.table
        a, b = i[..., 0], i[..., 1]
        x, y = fu[..., 0], fu[..., 1]
        return ((1 - x) * (1 - y) * P[a, b] + x * (1 - y) * P[a + 1, b]
                + (1 - x) * y * P[a, b + 1] + x * y * P[a + 1, b + 1])

    def integral_cells(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Integral in cell-volume units over boxes given by (M, n) corner arrays."""
        lo = np.atleast_2d(np.asarray(lo, dtype=np.float64))
        hi = np.atleast_2d(np.asarray(hi, dtype=np.float64))
        if self.domain.n == 1:
            return self._prim(hi) - self._prim(lo)
        p11 = self._prim(hi)
        p00 = self._prim(lo)
        p10 = self._prim(np.stack([hi[:, 0], lo[:, 1]], axis=1))
        p01 = self._prim(np.stack([lo[:, 0], hi[:, 1]], axis=1))
        return p11 - p10 - p01 + p00

    def average(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        lo = np.atleast_2d(np.asarray(lo, dtype=np.float64))
        hi = np.atleast_2d(np.asarray(hi, dtype=np.float64))
        return self.integral_cells(lo, hi) / np.prod(hi - lo, axis=1)


def add_indicator(out: np.ndarray, lo: np.ndarray, hi: np.ndarray, coef: float) -> None:
    """out += coef * (cell average of the indicator of the box [lo, hi) in cell units)."""
    N = out.shape[0]
    sl, ws = [], []
    for a, b in zip(lo, hi):
        a, b = max(a, 0.0), min(b, float(N))
        if a >= b:
            return
        i0, i1 = int(math.floor(a)), int(math.ceil(b))
        w = np.ones(i1 - i0)
        w[0] -= a - i0
        w[-1] -= i1 - b
        sl.append(slice(i0, i1))
        ws.append(w)
    if len(ws) == 1:
        out[sl[0]] += coef * ws[0]
    else:
        out[sl[0], sl[1]] += coef * np.multiply.outer(ws[0], ws[1])
