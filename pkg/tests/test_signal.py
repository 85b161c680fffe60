from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from apsquare import oracles
from apsquare.geometry import Box, Cube
from apsquare.signal import (
    Domain, DomainError, Signal, Weight, ap_char, average, hl_maximal, local_osc,
    local_sharp_max, lp_norm, median, rearrangement, weak_quasinorm,
)

F = Fraction
UNIT = Cube(0, 0, (0,))


def _on_unit(dom, vals):
    """Signal equal to ``vals`` (repeated evenly) on [0, 1) and 0 elsewhere."""
    v = np.zeros(dom.cells)
    start = int(-dom.lo * 2**dom.K)
    per = 2**dom.K // len(vals)
    v[start : start + 2**dom.K] = np.repeat(vals, per)
    return Signal(dom, v)


cell_values = st.lists(st.integers(-4, 4), min_size=8, max_size=8)


# --- averages ---------------------------------------------------------------------


def test_average_of_constant(small):
    assert average(Signal(small, np.full(16, 2.5)), UNIT) == 2.5


def test_average_of_half_indicator(small):
    f = _on_unit(small, [1, 0])
    assert average(f, UNIT) == 0.5


def test_average_uses_zero_extension(small):
    f = Signal(small, np.ones(16))
    assert average(f, Box((F(1, 2),), (F(3, 2),))) == 0.5


def test_average_fractional_overlap(small):
    f = Signal(small, np.arange(16.0))
    # [1/16, 3/16) covers half of cell 8 and half of cell 9
    assert average(f, Box((F(1, 16),), (F(3, 16),))) == pytest.approx(8.5)


def test_zero_volume_region_is_rejected(small):
    with pytest.raises(DomainError):
        average(Signal.zeros(small), Box((F(0),), (F(0),)))


# --- rearrangement, median, oscillation ---------------------------------------------


def test_rearrangement_of_indicator(small):
    f = _on_unit(small, [0, 0, 0, 1])  # |E| = 1/4, strict level sets: 1 up to and including t = |E|
    assert rearrangement(f, UNIT, 0.125) == 1.0
    assert rearrangement(f, UNIT, 0.25) == 1.0
    assert rearrangement(f, UNIT, 0.375) == 0.0
    assert rearrangement(f, UNIT, 0.5) == 0.0


def test_rearrangement_of_zero(small):
    assert rearrangement(Signal.zeros(small), UNIT, 0.3) == 0.0


def test_rearrangement_at_level_set_boundary(small):
    # f = 4 on a quarter of [0, 1): |{|f| > a}| < 1/4 first holds at a = 4
    f = _on_unit(small, [0, 0, 0, 4])
    assert rearrangement(f, UNIT, 0.25) == 4.0
    assert oracles.rearrangement([0, 0, 0, 4], F(1, 4) * 4, [1, 1, 1, 1]) == 4.0


def test_median_of_constant(small):
    assert median(Signal(small, np.full(16, -3.0)), UNIT) == -3.0


def test_median_of_four_values(small):
    f = _on_unit(small, [1, 2, 3, 4])
    assert median(f, UNIT) == 3.0
    assert oracles.median([1, 2, 3, 4]) == 3.0


def test_oscillation_of_constant(small):
    assert local_osc(Signal(small, np.full(16, 7.0)), UNIT, 0.25) == 0.0


def test_oscillation_of_quarter_indicator(small):
    f = _on_unit(small, [0, 0, 0, 4])
    assert local_osc(f, UNIT, 0.25) == 2.0
    assert oracles.local_osc([0, 0, 0, 4], 0.25) == 2.0


@given(vals=cell_values, t=st.integers(1, 8))
@settings(max_examples=150)
def test_rearrangement_matches_oracle(vals, t):
    dom = Domain(1, 0, 3)
    f = _on_unit(dom, vals)
    assert rearrangement(f, UNIT, t / 8) == oracles.rearrangement(vals, t)


@given(vals=cell_values)
@settings(max_examples=150)
def test_median_matches_oracle(vals):
    assert median(_on_unit(Domain(1, 0, 3), vals), UNIT) == oracles.median(vals)


@given(vals=cell_values, lam=st.sampled_from([0.125, 0.2, 0.25, 0.4, 0.5]))
@settings(max_examples=150)
def test_oscillation_matches_oracle(vals, lam):
    assert local_osc(_on_unit(Domain(1, 0, 3), vals), UNIT, lam) == oracles.local_osc(vals, lam)


@given(vals=cell_values)
def test_median_bounded_by_rearrangement(vals):
    f = _on_unit(Domain(1, 0, 3), vals)
    assert abs(median(f, UNIT)) <= rearrangement(f, UNIT, 0.5)


def test_local_osc_rejects_bad_lambda(small):
    with pytest.raises(DomainError):
        local_osc(Signal.zeros(small), UNIT, 1.0)


# --- maximal functions ------------------------------------------------------------------


def test_sharp_max_of_constant_is_zero(small):
    out = local_sharp_max(Signal(small, np.full(16, 3.0)), UNIT, 0.125)
    assert not out.values.any()


@given(vals=st.lists(st.integers(-3, 3), min_size=8, max_size=8))
@settings(max_examples=100)
def test_sharp_max_matches_oracle(vals):
    dom = Domain(1, 0, 3)
    out = local_sharp_max(_on_unit(dom, vals), UNIT, 0.125)
    np.testing.assert_array_equal(out.values[8:], oracles.dyadic_sharp_max(vals, 0.125))
    assert not out.values[:8].any()


def test_maximal_of_unit_indicator_far_away():
    dom = Domain(1, 2, 4)
    f = Signal.from_function(dom, lambda x: ((x >= 0) & (x < 1)).astype(float))
    Mf = hl_maximal(f)
    cell = dom.cell_of((2,))[0]
    # [0, 2] touches the closed cell [2, 2 + h], so the value is exactly 1/2
    assert Mf.values[cell] == 0.5


@given(vals=st.lists(st.integers(-4, 4), min_size=16, max_size=16))
@settings(max_examples=60)
def test_maximal_matches_oracle(vals):
    dom = Domain(1, 0, 3)
    np.testing.assert_allclose(hl_maximal(Signal(dom, vals)).values, oracles.touching_maximal(vals), rtol=1e-14)


@given(vals=st.lists(st.floats(-5, 5), min_size=16, max_size=16))
def test_maximal_dominates_signal(vals):
    f = Signal(Domain(1, 0, 3), vals)
    assert np.all(hl_maximal(f).values >= np.abs(f.values) - 1e-12)


def test_maximal_2d_dominates_and_bounds():
    rng = np.random.default_rng(3)
    dom = Domain(2, 0, 2)
    f = Signal(dom, rng.normal(size=dom.shape))
    Mf = hl_maximal(f).values
    assert np.all(Mf >= np.abs(f.values) - 1e-12)
    assert Mf.max() <= np.abs(f.values).max() + 1e-12


# --- norms ------------------------------------------------------------------------------


def test_lp_norm_of_indicator(small):
    f = _on_unit(small, [1, 1, 0, 0])
    assert lp_norm(f, 3) == pytest.approx(0.5 ** (1 / 3))


def test_weighted_lp_norm_two_cells():
    dom = Domain(1, 0, 0)  # two cells of width 1
    f = Signal(dom, [1.0, 2.0])
    w = Weight(dom, [3.0, 0.5])
    assert lp_norm(f, 2, w) == pytest.approx((1 * 3 + 4 * 0.5) ** 0.5)


def test_weak_norm_of_indicator(small):
    assert weak_quasinorm(_on_unit(small, [1, 1, 1, 0]), 1) == pytest.approx(0.75)


def test_weak_norm_two_levels():
    dom = Domain(1, 0, 3)
    v = np.zeros(16)
    v[8] = 3.0
    v[9:13] = 1.0
    # measures 1/8 and 1/2 instead of 0.1 and 0.5: max(3/8, 5/8)
    assert weak_quasinorm(Signal(dom, v), 1) == pytest.approx(0.625)


@given(vals=st.lists(st.floats(0, 10), min_size=16, max_size=16), p=st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_weak_norm_below_strong(vals, p):
    f = Signal(Domain(1, 0, 3), vals)
    assert weak_quasinorm(f, p) <= lp_norm(f, p) * (1 + 1e-12)


# --- A_p characteristic ---------------------------------------------------------------


def test_ap_of_constant_weight(small):
    for p in (1.5, 2, 3):
        for scope in ("all", "dyadic", "shifted"):
            assert ap_char(Weight.ones(small), p, scope).value == pytest.approx(1.0)


def test_ap_dyadic_two_values():
    dom = Domain(1, 0, 3)
    v = np.ones(16)
    v[8:12] = 4.0
    res = ap_char(Weight(dom, v), 2, "dyadic")
    assert res.value == 1.5625
    assert res.region == Box((F(0),), (F(1),))


def test_ap_rejects_p_one(small):
    with pytest.raises(DomainError):
        ap_char(Weight.ones(small), 1.0)


dyadic_weights = st.lists(st.sampled_from([0.25, 0.5, 1.0, 2.0, 4.0, 8.0]), min_size=16, max_size=16)


@given(w=dyadic_weights)
@settings(max_examples=80)
def test_ap_dyadic_matches_oracle_exactly(w):
    assert ap_char(Weight(Domain(1, 0, 3), w), 2, "dyadic").value == oracles.ap_char_dyadic(w, 2)


@given(w=st.lists(st.floats(0.1, 10), min_size=16, max_size=16), p=st.sampled_from([1.5, 2.0, 3.0]))
@settings(max_examples=60)
def test_ap_all_matches_oracle(w, p):
    got = ap_char(Weight(Domain(1, 0, 3), w), p, "all").value
    assert got == pytest.approx(oracles.ap_char_all(w, p), rel=1e-12)


@given(w=st.lists(st.floats(0.1, 10), min_size=16, max_size=16))
@settings(max_examples=40)
def test_ap_scopes_are_ordered(w):
    W = Weight(Domain(1, 0, 3), w)
    dy, sh, al = (ap_char(W, 2, s).value for s in ("dyadic", "shifted", "all"))
    assert dy <= sh * (1 + 1e-12) and sh <= al * (1 + 1e-12)
    assert dy >= 1 - 1e-12


def test_ap_2d_matches_brute_force():
    rng = np.random.default_rng(5)
    dom = Domain(2, -1, 2)  # 4 x 4 cells
    w = rng.uniform(0.2, 5, size=dom.shape)
    best = 0.0
    for i in range(4):
        for j in range(4):
            for s in range(1, 5 - max(i, j)):
                blk = w[i : i + s, j : j + s]
                best = max(best, blk.mean() * (1 / blk).mean())
    assert ap_char(Weight(dom, w), 2, "all").value == pytest.approx(best, rel=1e-12)


# --- signal container -----------------------------------------------------------------


def test_signal_rejects_wrong_shape(small):
    with pytest.raises(DomainError):
        Signal(small, np.zeros(3))


def test_weight_must_be_positive(small):
    with pytest.raises(DomainError):
        Weight(small, np.zeros(16))


def test_signal_is_immutable(small):
    f = Signal.zeros(small)
    with pytest.raises(ValueError):
        f.values[0] = 1.0
