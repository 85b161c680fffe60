import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from apsquare.cone import Field, default_tgrid
from apsquare.io import FormatError, load_binary, load_csv, load_field, save_binary, save_csv, save_field
from apsquare.signal import Domain, Signal


@given(vals=st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=16, max_size=16))
@settings(max_examples=30)
def test_csv_roundtrip_is_exact(tmp_path_factory, vals):
    path = tmp_path_factory.mktemp("csv") / "f.csv"
    f = Signal(Domain(1, 0, 3), vals)
    save_csv(f, path)
    np.testing.assert_array_equal(load_csv(path).values, f.values)


def test_binary_roundtrip_2d(tmp_path):
    dom = Domain(2, 0, 2)
    f = Signal(dom, np.random.default_rng(0).normal(size=dom.shape))
    save_binary(f, tmp_path / "f.bin")
    g = load_binary(tmp_path / "f.bin")
    assert g.domain == dom and np.array_equal(g.values, f.values)


def test_field_roundtrip(tmp_path):
    dom = Domain(1, 0, 4)
    tg = default_tgrid(dom)
    F = Field(dom, tg, np.random.default_rng(1).normal(size=(tg.L, dom.cells)))
    save_field(F, tmp_path / "F.bin")
    G = load_field(tmp_path / "F.bin")
    assert G.tgrid == tg and np.array_equal(G.values, F.values)


def test_csv_needs_header(tmp_path):
    (tmp_path / "f.csv").write_text("1\n2\n")
    with pytest.raises(FormatError):
        load_csv(tmp_path / "f.csv")


def test_csv_wrong_count(tmp_path):
    (tmp_path / "f.csv").write_text("# n=1 J=0 K=3\n1\n2\n")
    with pytest.raises(FormatError):
        load_csv(tmp_path / "f.csv")


def test_binary_magic(tmp_path):
    save_binary(Signal.zeros(Domain(1, 0, 3)), tmp_path / "f.bin")
    with pytest.raises(FormatError):
        load_field(tmp_path / "f.bin")
