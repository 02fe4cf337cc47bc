from __future__ import annotations

import itertools
import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biest.grid import (
    SHIFTS,
    ApproxCutoff,
    ShiftedCube,
    _cube_conflict,
    contains,
    containing_interval,
    cutoff_value,
    dilate,
    dyadic_maximal,
    enclosing_shifted_cube,
    is_sparse,
    maximal_superlevel,
    measure,
    mesh_interval,
    sparse_split,
)

shifts = st.sampled_from(SHIFTS)


def test_mesh_interval_examples():
    assert mesh_interval(0, 3, 0).bounds == (3, 4)
    assert mesh_interval(1, 0, F(1, 3)).bounds == (F(-2, 3), F(4, 3))
    assert mesh_interval(0, 0, F(2, 3)).bounds == (F(2, 3), F(5, 3))


def test_mesh_interval_rejects_bad_shift():
    with pytest.raises(ValueError):
        mesh_interval(0, 0, F(1, 2))


@given(st.integers(-12, 12), st.integers(-50, 50), shifts)
def test_mesh_endpoints_exact(j, k, s):
    iv = mesh_interval(j, k, s)
    sign = -1 if j % 2 else 1
    a = iv.lo / F(2) ** j - sign * s
    b = iv.hi / F(2) ** j - sign * s
    assert a.denominator == 1 and b == a + 1
    assert iv == mesh_interval(j, k, s)


@given(st.integers(-6, 6), shifts, st.integers(-20, 20))
def test_mesh_tiles_the_line(j, s, k0):
    ivs = [mesh_interval(j, k, s) for k in range(k0, k0 + 8)]
    for a, b in zip(ivs, ivs[1:]):
        assert a.hi == b.lo
    x = ivs[3].lo + ivs[3].length / 3
    assert containing_interval(x, j, s) == ivs[3]


def test_enclosing_cube_example():
    q = enclosing_shifted_cube([(F(2, 5), F(9, 10))])
    assert q.j == 1 and q.axes[0].bounds == (0, 2)
    assert contains(q.axes[0].dilate(F(7, 10)), (F(2, 5), F(9, 10)))


def _enclosing_oracle(box):
    """Smallest scale of any shifted cube whose 7/10 dilate contains the box."""
    side = box[0][1] - box[0][0]
    for j in range(-10, 10):
        L = F(2) ** j
        if L > 8 * side:
            break
        ok = True
        for lo, hi in box:
            hit = False
            for s in SHIFTS:
                for k in range(math.floor(lo / L) - 3, math.ceil(hi / L) + 3):
                    if contains(mesh_interval(j, k, s).dilate(F(7, 10)), (lo, hi)):
                        hit = True
            ok &= hit
        if ok:
            return j
    return None


@settings(max_examples=40, deadline=None)
@given(st.integers(-40, 40), st.integers(-40, 40), st.integers(1, 12))
def test_enclosing_cube_matches_search(a, b, width):
    box = [(F(a, 8), F(a + width, 8)), (F(b, 8), F(b + width, 8))]
    q = enclosing_shifted_cube(box)
    assert q.side <= 8 * (box[0][1] - box[0][0])
    for iv, axis in zip(box, q.dilate(F(7, 10))):
        assert contains(axis, iv)
    assert q.j == _enclosing_oracle(box)


def test_enclosing_cube_of_mesh_interval():
    iv = mesh_interval(0, 5, F(1, 3))
    q = enclosing_shifted_cube([iv.bounds])
    assert contains(q.axes[0].dilate(F(7, 10)), iv.bounds)


def test_sparse_split_examples():
    one = ShiftedCube(0, (0,), (F(0),))
    assert sparse_split([one]) == [[one]]
    two = ShiftedCube(0, (1,), (F(0),))
    assert len(sparse_split([one, two], factor=4)) == 2


def _chromatic_number(cubes, factor):
    n = len(cubes)
    conflict = [[_cube_conflict(a, b, factor) for b in cubes] for a in cubes]
    for colors in range(1, n + 1):
        for assign in itertools.product(range(colors), repeat=n):
            if all(assign[p] != assign[q] for p in range(n) for q in range(p) if conflict[p][q]):
                return colors
    return 0


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(-3, 3)), min_size=1, max_size=7, unique=True))
def test_sparse_split_parts_are_sparse_and_minimal(spec):
    cubes = [ShiftedCube(j, (k,), (F(0),)) for j, k in spec]
    parts = sparse_split(cubes, factor=4)
    flat = [c for p in parts for c in p]
    assert len(flat) == len(set(flat)) and set(flat) == set(cubes)
    assert all(is_sparse(p, factor=4) for p in parts)
    assert len(parts) == _chromatic_number(list(dict.fromkeys(cubes)), 4)


def test_sparse_split_nested_scales():
    cubes = [ShiftedCube(j, (0,), (F(0),)) for j in range(64)]
    parts = sparse_split(cubes, factor=4)
    assert all(is_sparse(p, factor=4) for p in parts)
    # three consecutive scales conflict pairwise, so three parts is optimal
    assert len(parts) == 3


def test_dyadic_maximal_examples():
    E = [(F(0), F(1))]
    assert dyadic_maximal(E, F(1, 2)) == 1
    assert dyadic_maximal(E, 3) == F(1, 4)
    assert dyadic_maximal([], 3) == 0


pieces = st.lists(st.integers(0, 63), min_size=1, max_size=10, unique=True)


@settings(max_examples=40, deadline=None)
@given(pieces, pieces, st.integers(-8, 70))
def test_dyadic_maximal_monotone_and_bounded(a, b, x):
    E = [(F(k, 8), F(k + 1, 8)) for k in a]
    E2 = E + [(F(k, 8), F(k + 1, 8)) for k in b]
    x = F(x, 8) + F(1, 16)
    m, m2 = dyadic_maximal(E, x), dyadic_maximal(E2, x)
    assert 0 <= m <= m2 <= 1


@settings(max_examples=30, deadline=None)
@given(pieces, st.integers(1, 7))
def test_superlevel_is_exact(a, num):
    E = [(F(k, 8), F(k + 1, 8)) for k in a]
    level = F(num, 8)
    sup = maximal_superlevel(E, level)
    # pointwise agreement at cell midpoints of the 1/8 grid
    for cell in range(-16, 80):
        x = F(2 * cell + 1, 16)
        inside = any(lo <= x < hi for lo, hi in sup)
        assert inside == (dyadic_maximal(E, x) > level)
    assert measure(sup) * level <= measure(E)


def test_cutoff_examples():
    assert cutoff_value(ApproxCutoff(0.0, 1.0, 3), 0.0) == 1.0
    assert cutoff_value(ApproxCutoff(2.0, 1.5, 2), 3.5) == pytest.approx(0.5, abs=1e-15)
    assert cutoff_value(ApproxCutoff(0.0, 1.0, 1), 3.0) == pytest.approx(10**-0.5, abs=1e-15)
    with pytest.raises(ValueError):
        ApproxCutoff(0.0, 1.0, 0)


@given(st.floats(0, 50), st.floats(0, 50), st.integers(1, 8))
def test_cutoff_even_and_decreasing(d1, d2, M):
    c = ApproxCutoff(1.0, 2.0, M)
    assert cutoff_value(c, 1.0 + d1) == pytest.approx(cutoff_value(c, 1.0 - d1), rel=1e-14)
    lo, hi = sorted((d1, d2))
    assert cutoff_value(c, 1.0 + hi) <= cutoff_value(c, 1.0 + lo) * (1 + 1e-15)


def test_dilate_about_center():
    assert dilate((F(0), F(2)), 3) == (F(-2), F(4))
