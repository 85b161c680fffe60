from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from apsquare.geometry import (
    Box, Cube, MarginError, ResolutionError, children, cube_at, descendants, dilate,
    grid_ids, grid_shift, shifted_cover,
)

F = Fraction


def test_children_of_unit_interval():
    kids = children(Cube(0, 0, (0,)))
    assert [c.box for c in kids] == [Box((F(0),), (F(1, 2),)), Box((F(1, 2),), (F(1),))]


def test_children_of_unit_square_are_quadrants():
    kids = children(Cube(0, 0, (0, 0)))
    assert len(kids) == 4
    assert {c.box.lo for c in kids} == {(F(a), F(b)) for a in (0, F(1, 2)) for b in (0, F(1, 2))}


def test_children_refuse_beyond_resolution():
    with pytest.raises(ResolutionError):
        children(Cube(0, 5, (0,)), max_level=5)


@pytest.mark.parametrize("grid", [0, 1, 2])
@given(level=st.integers(-3, 6), j=st.integers(-20, 20))
def test_children_partition_parent(grid, level, j):
    q = Cube(grid, level, (j,))
    kids = children(q)
    assert all(c.parent() == q for c in kids)
    lo = min(c.box.lo for c in kids)
    hi = max(c.box.hi for c in kids)
    assert (lo, hi) == (q.box.lo, q.box.hi)
    assert sum(c.volume for c in kids) == q.volume
    a, b = sorted(kids, key=lambda c: c.box.lo)
    assert a.box.hi == b.box.lo


@given(level=st.integers(-2, 5), i=st.integers(-8, 8), j=st.integers(-8, 8), g=st.integers(0, 4))
def test_children_partition_parent_2d(level, i, j, g):
    q = Cube(g, level, (i, j))
    kids = children(q)
    assert sum(c.volume for c in kids) == q.volume
    assert all(q.box.contains_box(c.box) for c in kids)
    for a in kids:
        for b in kids:
            if a != b:
                assert a.box.intersect(b.box) is None


@pytest.mark.parametrize("depth", range(6))
def test_descendant_count(depth):
    assert len(list(descendants(Cube(0, 0, (0,)), depth))) == 2 ** (depth + 1) - 1


def test_descendants_depth_zero():
    assert list(descendants(Cube(0, 0, (0,)), 0)) == [Cube(0, 0, (0,))]


def test_shift_vectors():
    assert grid_shift(0, 2) == (0, 0)
    assert sorted(grid_shift(g, 2) for g in grid_ids(2)) == sorted(
        [(F(0), F(0)), (F(1, 3), F(0)), (F(0), F(1, 3)), (F(1, 3), F(1, 3))]
    )


@given(g=st.integers(0, 2), k=st.integers(-3, 8), data=st.data())
@settings(max_examples=200)
def test_same_grid_cubes_are_nested_or_disjoint(g, k, data):
    k2 = data.draw(st.integers(k, k + 4))
    x = data.draw(st.fractions(-4, 4))
    y = data.draw(st.fractions(-4, 4))
    a, b = cube_at((x,), k, g), cube_at((y,), k2, g)
    inter = a.box.intersect(b.box)
    assert inter is None or inter in (a.box, b.box)


def test_cover_of_sample_interval():
    grid, cover = shifted_cover(Box((F(3, 10),), (F(55, 100),)))
    assert cover.box.contains_box(Box((F(3, 10),), (F(55, 100),)))
    assert cover.side <= F(3, 2)


@given(level=st.integers(-2, 6), j=st.integers(-30, 30), g=st.integers(0, 2))
def test_cover_of_grid_cube(level, j, g):
    q = Cube(g, level, (j,))
    _, p = shifted_cover(q)
    assert p.box.contains_box(q.box) and p.side <= 6 * q.side


@given(lo=st.fractions(-3, 3), e=st.integers(2, 10), num=st.integers(1, 4), y=st.fractions(-3, 3))
@settings(max_examples=300)
def test_cover_of_arbitrary_square(lo, e, num, y):
    side = F(num, 2**e)
    box = Box((lo, y), (lo + side, y + side))
    grid, p = shifted_cover(box)
    assert grid >= 1 and p.box.contains_box(box) and p.side <= 6 * side


def test_cover_respects_ambient():
    with pytest.raises(MarginError):
        shifted_cover(Box((F(-1),), (F(1),)), ambient=Box((F(-1),), (F(1),)))


def test_dilation_is_concentric():
    q = Cube(0, 2, (1,))
    d = dilate(q, 2)
    assert d.side == 4 * q.side
    assert d.box.center == q.box.center


def test_cube_json_roundtrip():
    q = Cube(2, 3, (5, -1), 4)
    assert Cube.from_json(q.to_json()) == q
