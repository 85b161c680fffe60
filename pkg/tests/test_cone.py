import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from apsquare import oracles
from apsquare.cone import (
    CoverageError, Field, QuadratureError, TGrid, cone_square, cone_square_sq, cone_weights, conv_field,
    default_tgrid, good_set_energies, gstar, gstar_cone_majorant, smooth_square, tail_bound,
)
from apsquare.kernels import BumpSpec, haar, mexican_hat
from apsquare.lab import random_signal
from apsquare.signal import Domain, Signal

DOM = Domain(1, 1, 4)  # 64 cells on [-2, 2)
TG = default_tgrid(DOM)
seeds = st.integers(0, 2**32 - 1)


def _field(seed, dom=DOM, tg=TG):
    return Field(dom, tg, np.random.default_rng(seed).normal(size=(tg.L, dom.cells)))


def test_tgrid_parse_and_print():
    tg = TGrid.parse("0.0078125:2^(1/4):45")
    assert tg.L == 45 and tg.ratio == 2.0**0.25 and tg.t_min == 2.0**-7
    assert TGrid.parse(str(tg)) == tg
    with pytest.raises(ValueError):
        TGrid.parse("1:2")


def test_default_tgrid_at_desk_scale():
    tg = default_tgrid(Domain(1, 2, 9))
    assert tg.t_min == 2 * 2.0**-9 and tg.L == 45
    assert tg.t_max <= 8


def test_field_of_zero_signal_is_zero():
    F = conv_field(Signal.zeros(DOM), haar(), TG)
    assert not F.values.any()
    assert not cone_square(F, 1).values.any()
    assert not gstar(F, 2.5).values.any()


def test_field_of_constant_vanishes_in_the_interior():
    dom = Domain(1, 3, 5)
    tg = TGrid(2 * dom.h, 2.0, 4)
    F = conv_field(Signal(dom, np.ones(dom.shape)), haar(), tg)
    mid = slice(dom.cells // 2 - 16, dom.cells // 2 + 16)
    assert np.max(np.abs(F.values[:, mid])) < 1e-12


def test_quadrature_guard():
    with pytest.raises(QuadratureError):
        conv_field(Signal.zeros(DOM), haar(), TGrid(DOM.h / 2, 2.0, 3))


@pytest.mark.parametrize("kernel", [haar(), mexican_hat()])
@given(seed=seeds)
@settings(max_examples=10, deadline=None)
def test_fft_matches_direct_summation(kernel, seed):
    f = random_signal(DOM, np.random.default_rng(seed), 8, (-1.0, 1.0))
    a = conv_field(f, kernel, TG, method="fft").values
    b = conv_field(f, kernel, TG, method="direct").values
    assert np.max(np.abs(a - b)) <= 1e-10 * max(np.max(np.abs(b)), 1e-300)


def test_direct_field_matches_loop_oracle():
    dom = Domain(1, 0, 3)
    tg = TGrid(2 * dom.h, 2.0, 3)
    rng = np.random.default_rng(1)
    f = Signal(dom, rng.normal(size=dom.cells))
    F = conv_field(f, mexican_hat(), tg, method="direct")
    for l, t in enumerate(tg.t):
        w = mexican_hat().cell_weights(t, dom.h, dom.cells - 1)
        np.testing.assert_allclose(F.values[l], oracles.conv_direct(f.values, w), rtol=1e-12, atol=1e-14)


def test_single_node_field_closed_form():
    vals = np.zeros((TG.L, DOM.cells))
    l, j, v = 2, 30, 3.0
    vals[l, j] = v
    F = Field(DOM, TG, vals)
    sq = cone_square_sq(F, 1.0)
    t = TG.t[l]
    node = DOM.h * math.log(TG.ratio) / t
    r = t / DOM.h
    for i in range(DOM.cells):
        # overlap of the x-cell i with (y_j - t, y_j + t), in cell units
        expect = v * v * node * max(0.0, min(i - j + 0.5, r) - max(i - j - 0.5, -r))
        assert sq[i] == pytest.approx(expect, rel=1e-14, abs=0)


def test_cone_weights_are_overlaps():
    w = cone_weights(1.75, 3)
    np.testing.assert_array_equal(w, [0, 0.25, 1, 1, 1, 0.25, 0])


@given(seed=seeds, alpha=st.sampled_from([0.5, 1.0, 2.0, 4.0]))
@settings(max_examples=25, deadline=None)
def test_sandwich_exact(seed, alpha):
    F = _field(seed)
    bump = BumpSpec()
    s1 = cone_square(F, alpha).values
    s2 = smooth_square(F, bump, alpha).values
    s3 = cone_square(F, 2 * alpha).values
    assert np.all(s1 <= s2) and np.all(s2 <= s3)


def test_indicator_bump_reproduces_cone():
    F = _field(4)
    np.testing.assert_array_equal(smooth_square(F, BumpSpec("indicator"), 2.0).values, cone_square(F, 2.0).values)


@given(seed=seeds)
@settings(max_examples=15, deadline=None)
def test_aperture_monotone(seed):
    F = _field(seed)
    prev = cone_square(F, 1).values
    for a in (2, 4, 8):
        cur = cone_square(F, a).values
        assert np.all(prev <= cur)
        prev = cur


@given(seed=seeds)
@settings(max_examples=15, deadline=None)
def test_fast_path_close_to_exact(seed):
    F = _field(seed)
    a, b = cone_square(F, 2.0, exact=True).values, cone_square(F, 2.0, exact=False).values
    np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-12)


@given(seed=seeds, mu=st.sampled_from([2.5, 3.0]))
@settings(max_examples=15, deadline=None)
def test_gstar_majorant(seed, mu):
    F = _field(seed)
    assert np.all(gstar(F, mu).values <= gstar_cone_majorant(F, mu).values)


def test_gstar_dominates_cone():
    F = _field(7)
    # the g* weight is at least 2^-mu inside the unit cone
    for mu in (2.0, 3.0):
        assert np.all(2.0 ** (-mu / 2) * cone_square(F, 1.0).values <= gstar(F, mu).values * (1 + 1e-12))


def test_majorant_coverage_error():
    F = _field(3)
    with pytest.raises(CoverageError):
        gstar_cone_majorant(F, 2.5, K=0)


def test_gstar_rejects_small_mu():
    with pytest.raises(ValueError):
        gstar(_field(0), 1.0)


@given(seed=seeds, alpha=st.sampled_from([1, 2, 4, 8]))
@settings(max_examples=20, deadline=None)
def test_good_set_inequality(seed, alpha):
    rng = np.random.default_rng(seed)
    dom = Domain(1, 2, 5)
    tg = default_tgrid(dom)
    x = dom.centers()
    mask = (np.abs(x)[None, :] <= 1.0) & (tg.t[:, None] <= (float(dom.side) / 2 - 1.0) / 8)
    F = Field(dom, tg, rng.normal(size=(tg.L, dom.cells)) * mask)
    om = np.zeros(dom.cells, dtype=bool)
    for _ in range(int(rng.integers(1, 5))):
        a = int(rng.integers(0, dom.cells - 8))
        om[a : a + int(rng.integers(1, 8))] = True
    lhs, rhs = good_set_energies(F, om, alpha)
    assert lhs <= rhs


def test_tail_bound_finite_for_convolution_fields():
    dom = Domain(1, 2, 6)
    f = random_signal(dom, np.random.default_rng(0), 8, (-0.5, 0.5))
    F = conv_field(f, haar(), default_tgrid(dom))
    b = tail_bound(F, alpha=1.0)
    assert 0 < b < math.inf
    assert tail_bound(Field.zeros(dom, default_tgrid(dom))) == math.inf
