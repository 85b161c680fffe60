"""Sparse families of dyadic cubes, the local mean oscillation decomposition,
and the dilated sparse square operators built on a family.

The decomposition is constructive and then checked: every returned family
carries a certificate and the pointwise bound

    |f(x) - m_f(Q0)| <= 4 m#(x) + 2 sum_{j,k} w_lam(f; Q_j^k) chi_{Q_j^k}(x)

is verified at every cell before returning.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .geometry import Box, Cube, MarginError, children, dilate, shifted_cover
from .signal import (
    BoxIntegrator,
    Domain,
    DomainError,
    Signal,
    _blocks,
    _check_root,
    _unblock,
    add_indicator,
    box_cells,
    hl_maximal,
    local_sharp_max,
)


class DecompositionError(RuntimeError):
    """A decomposition failed its own postcondition (an algorithm bug)."""


@dataclass
class SparseFamily:
    """Cubes of D(root) arranged in levels; ``Omega_k`` is the union of level k.

    ``osc[k][j]`` holds w_lam(f; Q_j^k) for decomposition output and is
    empty for synthetic families.
    """

    root: Cube
    levels: list[list[Cube]]
    osc: list[list[float]] = field(default_factory=list)
    provenance: str = "synthetic"
    median: float | None = None

    def cubes(self):
        for lvl in self.levels:
            yield from lvl

    def __len__(self):
        return sum(len(lvl) for lvl in self.levels)

    def to_json(self, certificate: dict | None = None) -> str:
        obj = {
            "root": self.root.to_json(),
            "provenance": self.provenance,
            "median": self.median,
            "levels": [[c.to_json() for c in lvl] for lvl in self.levels],
            "osc": self.osc,
        }
        if certificate is not None:
            obj["certificate"] = certificate
        return json.dumps(obj, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SparseFamily":
        obj = json.loads(text)
        return cls(
            Cube.from_json(obj["root"]),
            [[Cube.from_json(c) for c in lvl] for lvl in obj["levels"]],
            obj.get("osc", []),
            obj.get("provenance", "synthetic"),
            obj.get("median"),
        )


# --- exact oscillation on a sorted block ------------------------------------------


def _window(size: int, lam: float) -> int:
    """Cells a window must hold to carry more than (1 - lam) of ``size`` equal cells."""
    return size - (math.ceil(lam * size) - 1)


def _osc_pair(vals: np.ndarray, lam: float) -> tuple[float, float]:
    """Endpoints (lo, hi) of a narrowest window; w_lam = (hi - lo) / 2."""
    k = _window(vals.size, lam)
    span = vals[k - 1 :] - vals[: vals.size - k + 1]
    i = int(np.argmin(span))
    return float(vals[i]), float(vals[i + k - 1])


def _exact_half_span(vals: np.ndarray, lam: float) -> Fraction:
    k = _window(vals.size, lam)
    span = vals[k - 1 :] - vals[: vals.size - k + 1]
    best = span.min()
    near = np.nonzero(span <= best * (1 + 1e-12) + 1e-300)[0]
    return min(Fraction(float(vals[i + k - 1])) - Fraction(float(vals[i])) for i in near) / 2


# --- the decomposition ---------------------------------------------------------------


def _select(E: np.ndarray, n: int) -> list[tuple[int, tuple[int, ...]]]:
    """Maximal proper dyadic sub-blocks B of E's block with |E cap B| >= |B| / 2^(n+1).

    Returns (side, corner) pairs in cells relative to the block.
    """
    b = E.shape[0]
    out = []
    covered = None
    s = b // 2
    while s >= 1:
        counts = _blocks(E, s).sum(axis=-1)
        qual = counts * 2 ** (n + 1) >= s**n
        if covered is None:
            covered = np.zeros_like(qual)
        sel = qual & ~covered
        for pos in zip(*np.nonzero(sel)):
            out.append((s, tuple(int(p) * s for p in pos)))
        covered = covered | qual
        if s > 1:
            covered = _unblock(covered, 2, n)
        s //= 2
    return out


def _block(sub: np.ndarray, side: int, corner: tuple[int, ...]) -> np.ndarray:
    return sub[tuple(slice(c, c + side) for c in corner)]


def lmo_decompose(f: Signal, q0: Cube, lam: float | None = None,
                  verify: bool = True) -> tuple[SparseFamily, float]:
    """Sparse family and maximal median for the local mean oscillation bound on q0.

    For an active cube P let E_P = {|f - m_f(P)| > 2 w_lam(f; P)} (so |E_P| < lam |P|).
    The next level below P consists of the maximal proper dyadic subcubes Q
    with |E_P cap Q| >= |Q| / 2^(n+1). Their union covers less than half of P
    and |m_f(Q) - m_f(P)| <= 2 w_lam(f; P). The root is not itself part of the
    family; its term is absorbed by the sharp maximal function.
    """
    dom = f.domain
    n = dom.n
    if lam is None:
        lam = 2.0 ** -(n + 2)
    if not 0 < lam < 1:
        raise DomainError("lambda must lie in (0, 1)")
    _check_root(dom, q0)
    sub = f.values[dom.cube_slices(q0)]
    S = sub.shape[0]
    m0 = float(np.sort(sub, axis=None)[sub.size // 2])
    levels: list[list[Cube]] = []
    oscs: list[list[float]] = []
    active = [(S, (0,) * n)]
    depth = 0
    while active:
        nxt = []
        level_osc = []
        for side, corner in active:
            block = _block(sub, side, corner)
            vals = np.sort(block, axis=None)
            lo, hi = _osc_pair(vals, lam)
            level_osc.append((hi - lo) / 2)
            if side == 1 or vals[0] == vals[-1]:
                continue
            m = vals[vals.size // 2]
            E = np.abs(block - m) > (hi - lo)
            for s, c in _select(E, n):
                nxt.append((s, tuple(a + b for a, b in zip(corner, c))))
        if depth > 0:
            oscs.append(level_osc)
        active = nxt
        if active:
            levels.append([_local_cube(q0, S, s, c) for s, c in active])
        depth += 1
    fam = SparseFamily(q0, levels, oscs, "decomposition", m0)
    if verify:
        check_decomposition(f, fam, lam)
        cert = verify_sparse(fam)
        if not cert["pass"]:
            raise DecompositionError(f"sparseness certificate failed: {cert}")
    return fam, m0


def _local_cube(q0: Cube, S: int, side: int, corner: tuple[int, ...]) -> Cube:
    depth = (S // side).bit_length() - 1
    per = S // side
    return Cube(0, q0.level + depth, tuple(j * per + c // side for j, c in zip(q0.index, corner)))


def family_sum(dom: Domain, fam: SparseFamily, coef) -> np.ndarray:
    """sum over cubes of coef(k, j) * chi_Q as a cell array over the full domain."""
    out = np.zeros(dom.shape)
    for k, lvl in enumerate(fam.levels):
        for j, q in enumerate(lvl):
            out[dom.cube_slices(q)] += coef(k, j)
    return out


def check_decomposition(f: Signal, fam: SparseFamily, lam: float) -> dict:
    """Verify the pointwise bound at every cell of the root; raise on failure.

    Cells failing the floating-point comparison are rechecked with exact
    rational arithmetic before an error is raised.
    """
    dom = f.domain
    q0 = fam.root
    sl = dom.cube_slices(q0)
    sharp = local_sharp_max(f, q0, lam).values[sl]
    osum = family_sum(dom, fam, lambda k, j: fam.osc[k][j])[sl]
    lhs = np.abs(f.values[sl] - fam.median)
    rhs = 4 * sharp + 2 * osum
    bad = np.argwhere(lhs > rhs)
    rechecked = 0
    for cell in bad:
        rechecked += 1
        if not _exact_cell_ok(f, fam, lam, tuple(int(c) for c in cell)):
            raise DecompositionError(f"bound fails at local cell {tuple(cell)} of {q0}")
    slack = rhs - lhs
    return {"pass": True, "cells": int(lhs.size), "rechecked": rechecked, "min_slack": float(slack.min())}


def _exact_cell_ok(f: Signal, fam: SparseFamily, lam: float, cell: tuple[int, ...]) -> bool:
    dom = f.domain
    q0 = fam.root
    sub = f.values[dom.cube_slices(q0)]
    S = sub.shape[0]
    sharp = Fraction(0)
    side = S
    while side >= 2:
        corner = tuple(c - c % side for c in cell)
        vals = np.sort(_block(sub, side, corner), axis=None)
        sharp = max(sharp, _exact_half_span(vals, lam))
        side //= 2
    h = Fraction(1, 2**dom.K)
    base = dom.cube_slices(q0)
    point = tuple(dom.lo + (s.start + c) * h + h / 2 for s, c in zip(base, cell))
    total = Fraction(0)
    for q in fam.cubes():
        if q.box.contains_point(point):
            vals = np.sort(f.values[dom.cube_slices(q)], axis=None)
            total += _exact_half_span(vals, lam)
    lhs = abs(Fraction(float(sub[cell])) - Fraction(fam.median))
    return lhs <= 4 * sharp + 2 * total


# --- certificate ---------------------------------------------------------------------


def _family_masks(fam: SparseFamily) -> tuple[int, list[np.ndarray]]:
    n = fam.root.n
    finest = max([q.level for q in fam.cubes()] + [fam.root.level])
    r = finest - fam.root.level
    side = 2**r
    root_lo = fam.root.box.lo
    masks = []
    for lvl in fam.levels:
        cnt = np.zeros((side,) * n, dtype=np.int64)
        for q in lvl:
            sl = []
            for a, b, r0 in zip(q.box.lo, q.box.hi, root_lo):
                ia = (a - r0) * 2**finest
                ib = (b - r0) * 2**finest
                sl.append(slice(int(ia), int(ib)))
            cnt[tuple(sl)] += 1
        masks.append(cnt)
    return finest, masks


def verify_sparse(fam: SparseFamily) -> dict:
    """Check disjointness within levels, nesting of the Omega_k and the half-measure bound.

    Each entry reports ``pass`` and the worst measured quantity: the largest
    cover multiplicity, the largest measure of Omega_{k+1} outside Omega_k
    relative to |Q0|, and the largest |Omega_{k+1} cap Q| / |Q|.
    """
    q0 = fam.root
    for q in fam.cubes():
        if q.grid != q0.grid or q.dilation != 1 or not q0.contains(q):
            return {"pass": False, "inside_root": False, "disjoint": None, "nested": None, "sparse": None}
    if len(fam) == 0:
        return {"pass": True, "inside_root": True,
                "disjoint": {"pass": True, "worst": 0}, "nested": {"pass": True, "worst": 0.0},
                "sparse": {"pass": True, "worst": 0.0}}
    finest, masks = _family_masks(fam)
    multiplicity = max(int(m.max()) for m in masks)
    total = masks[0].size
    nest_worst = 0
    sparse_worst = Fraction(0)
    root_lo = q0.box.lo
    for k in range(len(masks)):
        om = masks[k] > 0
        nxt = masks[k + 1] > 0 if k + 1 < len(masks) else np.zeros_like(om)
        nest_worst = max(nest_worst, int(np.count_nonzero(nxt & ~om)))
        for q in fam.levels[k]:
            sl = tuple(slice(int((a - r0) * 2**finest), int((b - r0) * 2**finest))
                       for a, b, r0 in zip(q.box.lo, q.box.hi, root_lo))
            inside = int(np.count_nonzero(nxt[sl]))
            sparse_worst = max(sparse_worst, Fraction(inside, nxt[sl].size))
    rep = {
        "inside_root": True,
        "disjoint": {"pass": multiplicity <= 1, "worst": multiplicity},
        "nested": {"pass": nest_worst == 0, "worst": nest_worst / total},
        "sparse": {"pass": sparse_worst <= Fraction(1, 2), "worst": float(sparse_worst)},
    }
    rep["pass"] = all(rep[key]["pass"] for key in ("disjoint", "nested", "sparse"))
    return rep


# --- dilated averages and the square operators ------------------------------------------


def _dilated_cells(dom: Domain, q: Cube, m: int):
    return box_cells(dom, dilate(q, m).box)


def _family_arrays(dom: Domain, fam: SparseFamily, m: int):
    cubes = list(fam.cubes())
    if not cubes:
        z = np.zeros((0, dom.n))
        return cubes, z, z, z, z
    lo, hi, qlo, qhi = [], [], [], []
    for q in cubes:
        a, b = _dilated_cells(dom, q, m)
        c, d = box_cells(dom, q.box)
        lo.append(a), hi.append(b), qlo.append(c), qhi.append(d)
    return cubes, np.array(lo), np.array(hi), np.array(qlo), np.array(qhi)


def dilation_margin_ok(fam: SparseFamily, dom: Domain, m: int) -> bool:
    """True when every 2^m Q of the family lies inside the ambient box."""
    box = dom.box
    return all(box.contains_box(dilate(q, m).box) for q in fam.cubes())


def sparse_square_sq(fam: SparseFamily, f: Signal, m: int) -> np.ndarray:
    dom = f.domain
    out = np.zeros(dom.shape)
    cubes, lo, hi, _, _ = _family_arrays(dom, fam, m)
    if not cubes:
        return out
    avg = BoxIntegrator(f).average(lo, hi)
    for q, a in zip(cubes, avg):
        out[dom.cube_slices(q)] += a * a
    return out


def sparse_square(fam: SparseFamily, f: Signal, m: int) -> Signal:
    """(sum_{j,k} (f averaged over 2^m Q_j^k)^2 chi_{Q_j^k})^(1/2)."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    return Signal(f.domain, np.sqrt(sparse_square_sq(fam, f, m)))


def bilinear_form(fam: SparseFamily, f: Signal, g: Signal, m: int) -> tuple[Signal, float]:
    """The bilinear sparse form and the pairing sum_{j,k} (f_{2^m Q})^2 int_Q g."""
    dom = f.domain
    out = np.zeros(dom.shape)
    cubes, lo, hi, qlo, qhi = _family_arrays(dom, fam, m)
    if not cubes:
        return Signal(dom, out), 0.0
    cv = dom.cell_volume
    favg = BoxIntegrator(f).average(lo, hi)
    gint = BoxIntegrator(g).integral_cells(qlo, qhi)  # cell-volume units
    vol = np.prod(hi - lo, axis=1)  # cell-volume units
    for a, b, fa, gi, v in zip(lo, hi, favg, gint, vol):
        add_indicator(out, a, b, fa * gi / v)
    pairing = float(np.sum(favg * favg * gint) * cv)
    return Signal(dom, out), pairing


def pairing_direct(fam: SparseFamily, f: Signal, g: Signal, m: int) -> float:
    """int (T_{2,m} f)^2 g by cell quadrature."""
    return float(np.sum(sparse_square_sq(fam, f, m) * g.values) * f.domain.cell_volume)


@dataclass(frozen=True)
class Refit:
    cube: Cube
    grid: int
    cover: Cube


def refit_shifted(fam: SparseFamily, m: int, ambient: Box | None = None) -> list[Refit]:
    """Assign each cube Q a shifted grid i and P in that grid with 2^m Q inside P, side <= 6 side(2^m Q)."""
    out = []
    for q in fam.cubes():
        try:
            g, P = shifted_cover(dilate(q, m), ambient)
        except MarginError as exc:
            raise MarginError(f"cube {q} with m={m}: {exc}") from None
        out.append(Refit(q, g, P))
    return out


def refit_forms(fam: SparseFamily, f: Signal, g: Signal, m: int,
                refits: list[Refit] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(M_m(f, g), sum_i M_{i,m}(f, g)) as cell arrays."""
    dom = f.domain
    if refits is None:
        refits = refit_shifted(fam, m, dom.box)
    lhs, _ = bilinear_form(fam, f, g, m)
    rhs = np.zeros(dom.shape)
    if refits:
        plo, phi, qlo, qhi = [], [], [], []
        for r in refits:
            a, b = box_cells(dom, r.cover.box)
            c, d = box_cells(dom, r.cube.box)
            plo.append(a), phi.append(b), qlo.append(c), qhi.append(d)
        plo, phi = np.array(plo), np.array(phi)
        favg = BoxIntegrator(f).average(plo, phi)
        gint = BoxIntegrator(g).integral_cells(np.array(qlo), np.array(qhi))
        vol = np.prod(phi - plo, axis=1)
        for a, b, fa, gi, v in zip(plo, phi, favg, gint, vol):
            add_indicator(rhs, a, b, fa * gi / v)
    return lhs.values, rhs


def refit_check(fam: SparseFamily, f: Signal, g: Signal, m: int) -> dict:
    """Pointwise check of M_m(f, g) <= 6^(2n) sum_i M_{i,m}(f, g) (f, g >= 0)."""
    n = f.domain.n
    lhs, rhs = refit_forms(fam, f, g, m)
    bound = 6.0 ** (2 * n) * rhs
    viol = lhs > bound
    pos = lhs > 0
    ratio = float(np.max(lhs[pos] / rhs[pos])) if np.any(pos) else 0.0
    return {"pass": not bool(viol.any()), "violations": int(viol.sum()), "worst_ratio": ratio,
            "constant": 6.0 ** (2 * n)}


# --- aggregate operators ----------------------------------------------------------------


@dataclass
class SeriesResult:
    signal: Signal
    tail_bound: float
    terms: int


def _depth(fam: SparseFamily, dom: Domain) -> int:
    if len(fam) == 0:
        return 0
    return int(family_sum(dom, fam, lambda k, j: 1.0).max())


def calT(fam: SparseFamily, f: Signal, delta: float, m_max: int = 6) -> SeriesResult:
    """sum_{m=0}^{m_max} 2^(-m delta / 2) T_{2,m} f, with a bound on the dropped tail.

    Since T_{2,m} f <= ||f||_inf * sqrt(depth) pointwise (depth = largest number
    of family cubes over a point), the tail is at most
    2^(-(m_max+1) delta / 2) / (1 - 2^(-delta / 2)) * ||f||_inf * sqrt(depth).
    """
    return _series(fam, f, delta, m_max)


def calB(fam: SparseFamily, f: Signal, delta: float, m_max: int = 6) -> SeriesResult:
    """sum_{m=0}^{m_max} 2^(-m delta) T_{2,m} f, with the matching tail bound."""
    return _series(fam, f, 2 * delta, m_max)


def _series(fam, f, delta, m_max):
    if not delta > 0:
        raise ValueError("delta must be positive")
    dom = f.domain
    out = np.zeros(dom.shape)
    for m in range(m_max + 1):
        out += 2.0 ** (-m * delta / 2) * np.sqrt(sparse_square_sq(fam, f, m))
    q = 2.0 ** (-delta / 2)
    tail = q ** (m_max + 1) / (1 - q) * float(np.abs(f.values).max()) * math.sqrt(_depth(fam, dom))
    return SeriesResult(Signal(dom, out), tail, m_max + 1)


def domination_gap(f: Signal, kernel, bump, alpha: float, q0: Cube, delta: float | None = None,
                   m_max: int = 6, tgrid=None, exact: bool = False) -> dict:
    """Cell-wise ratio |S~^2 - m_Q0(S~^2)|^(1/2) / (alpha^n (M f + calT f)) on q0.

    The family for calT comes from decomposing S~_alpha(f)^2 over q0. Cells
    where the denominator vanishes get ratio 0 if the numerator does too, and
    are listed as anomalies otherwise.
    """
    from .cone import conv_field, default_tgrid, smooth_square

    dom = f.domain
    if delta is None:
        delta = kernel.delta
    tg = tgrid or default_tgrid(dom)
    F = conv_field(f, kernel, tg)
    st = smooth_square(F, bump, alpha, exact=exact)
    G = Signal(dom, st.values**2)
    fam, med = lmo_decompose(G, q0)
    sl = dom.cube_slices(q0)
    num = np.sqrt(np.abs(G.values - med))
    den = alpha**dom.n * (hl_maximal(f).values + calT(fam, f, delta, m_max).signal.values)
    ratio = np.zeros(dom.shape)
    inq = np.zeros(dom.shape, dtype=bool)
    inq[sl] = True
    ok = inq & (den > 0)
    ratio[ok] = num[ok] / den[ok]
    anomalies = np.argwhere(inq & (den == 0) & (num > 0))
    return {"ratio": Signal(dom, ratio), "max": float(ratio.max()), "anomalies": anomalies.tolist(),
            "family_size": len(fam)}


def random_sparse_family(root: Cube, rng: np.random.Generator, levels: int = 4,
                         max_level: int | None = None) -> SparseFamily:
    """A random sparse family below ``root``.

    Each cube of level k picks a random subdivision depth and keeps between one
    and half of the subcubes at that depth, so |Omega_{k+1} cap Q| <= |Q| / 2.
    """
    n = root.n
    out = []
    layer = [root]
    for _ in range(levels):
        nxt = []
        for q in layer:
            room = (max_level - q.level) if max_level is not None else 3
            if room < 1:
                continue
            depth = int(rng.integers(1, min(3, room) + 1))
            subs = [q]
            for _ in range(depth):
                subs = [c for s in subs for c in children(s)]
            keep = int(rng.integers(1, len(subs) // 2 + 1))
            pick = rng.choice(len(subs), size=keep, replace=False)
            nxt.extend(subs[i] for i in sorted(pick))
        if not nxt:
            break
        out.append(nxt)
        layer = nxt
    return SparseFamily(root, out, [], "synthetic")
