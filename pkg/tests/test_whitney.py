from __future__ import annotations

from fractions import Fraction as F

import numpy as np
import pytest

from biest.grid import SHIFTS
from biest.whitney import (
    DESK_WHITNEY,
    SINGULAR,
    SymbolSeries,
    WhitneyConstants,
    WhitneyCover,
    brute_force_cover,
    build_mprime,
    check_cube_rank1,
    cube_meets_plane,
    fourier_split,
    in_small_cone,
    line_dist,
    mirror_mprime,
    plane_point,
    probe,
    probe_csv,
    probe_grid,
    reconstruct_chi,
    refine_rank1,
    sandwich_ok,
    symbol_estimate_probe,
)

BOX = [(F(1), F(3, 2)), (F(-1, 2), F(0)), (F(-2), F(-1))]
SIGMA = (F(1, 3), 0, F(2, 3))


@pytest.fixture(scope="module")
def cover():
    from biest.whitney import whitney_cover

    return whitney_cover(SIGMA, BOX, DESK_WHITNEY)


@pytest.fixture(scope="module")
def series():
    return SymbolSeries(DESK_WHITNEY, "2x1=x2", 5)


def test_constants_validated():
    with pytest.raises(ValueError):
        WhitneyConstants(4, 4)
    with pytest.raises(ValueError):
        WhitneyConstants(4, 9)


def test_cover_matches_brute_force(cover):
    assert cover.cubes
    scales = sorted({c.j for c in cover.cubes})
    brute = brute_force_cover(SIGMA, BOX, range(scales[0] - 1, scales[-1] + 2), DESK_WHITNEY)
    assert set(cover.cubes) == set(brute)


def test_cover_cubes_satisfy_the_sandwich(cover):
    v = SINGULAR["2x1=x2"][0]
    for c in cover.cubes:
        assert cube_meets_plane(c) and sandwich_ok(c, v, DESK_WHITNEY)
        lo = np.array([float(a.lo) for a in c.axes])
        dist = line_dist(lo + float(c.side) / 2, v)
        diam = float(c.side) * np.sqrt(3)
        # the center is within half a diameter of every point of the cube
        assert DESK_WHITNEY.c_lo * diam - diam / 2 <= dist <= DESK_WHITNEY.c_hi * diam + diam / 2


def test_rank1_refinement(cover):
    parts = cover.parts()
    flat = [c for p in parts for c in p]
    assert len(flat) == len(cover.cubes) and set(flat) == set(cover.cubes)
    assert all(check_cube_rank1(p, DESK_WHITNEY)[0] for p in parts)
    assert refine_rank1([]) == []


def test_rank1_rejects_duplicate_scale_neighbours(cover):
    ok, pair = check_cube_rank1(cover.cubes, DESK_WHITNEY)
    # the raw cover contains overlapping shifted cubes of adjacent scales
    assert not ok and pair[0] != pair[1]


def test_cover_json_roundtrip(cover):
    back = WhitneyCover.from_json(cover.to_json())
    assert back.cubes == cover.cubes and back.sigma == cover.sigma and back.constants == cover.constants


def test_coefficients_are_conjugate_symmetric(cover, series):
    for c in cover.cubes[:5]:
        coef = series.coefficients(c)
        flipped = np.roll(coef[::-1, ::-1, ::-1], 1, axis=(0, 1, 2))
        assert np.allclose(flipped, np.conj(coef), atol=1e-15)


def test_envelope_decays(cover, series):
    env = series.envelope(cover.cubes[:20])
    assert env[0] > 0
    # beyond the first period-three block the coefficients are small and keep shrinking
    assert max(env[3:]) < 2e-2 * env[0]
    assert max(env[9:]) <= max(env[3:9])


def test_fourier_split_validates_order(cover):
    with pytest.raises(ValueError):
        fourier_split(cover, 0)
    assert fourier_split(cover, 3).K == 3


def test_reconstruct_rejects_points_near_the_line(series):
    v = np.array(SINGULAR["2x1=x2"][0], dtype=float)
    with pytest.raises(ValueError):
        reconstruct_chi(series, 0.3 * v, delta=0.25)


@pytest.mark.parametrize("a,b,target", [(-1.0, 0.0, 1.0), (0.5, -1.0, 0.0), (-0.6, 0.9, 1.0)])
def test_reconstruct_deep_points(series, a, b, target):
    p = plane_point(a, b)
    assert reconstruct_chi(series, p, exact=True) == pytest.approx(target, abs=1e-12)
    assert reconstruct_chi(series, p) == pytest.approx(target, abs=1e-2)


def test_reconstruction_is_dilation_invariant(series):
    p = plane_point(-0.7, 0.2)
    vals = [reconstruct_chi(series, 2.0**e * p, delta=0.0, exact=True) for e in (-3, 0, 4)]
    assert vals == pytest.approx([1.0] * 3, abs=1e-12)


def test_probe_rows_and_csv(series):
    pts = probe_grid(1.0, 3, 0.25)
    assert pts and all(line_dist(p, SINGULAR["2x1=x2"][0]) >= 0.25 for p in pts)
    rows = probe(series, pts)
    assert max(r[2] for r in rows) < 1e-2
    text = probe_csv(rows)
    assert text.splitlines()[0] == "xi1,xi2,xi3,value,error" and len(text.splitlines()) == len(rows) + 1


def test_error_non_increasing_in_order(series):
    pts = probe_grid(1.0, 3, 0.25)
    errs = [max(r[2] for r in probe(series, pts, K)) for K in (3, 4, 5, 6)]
    assert all(b <= a * 1.05 for a, b in zip(errs, errs[1:]))


def test_shift_set():
    assert set(SHIFTS) == {0, F(1, 3), F(2, 3)}


@pytest.mark.parametrize("p,target", [((-1, 0.0, 0.05), 1.0), ((-1, 0.05, 0.0), 0.0), ((-2, 0.3, 0.32), 1.0), ((1, 0.0, 0.05), 0.0)])
def test_mprime_in_small_cone(p, target):
    assert in_small_cone(*p)
    m = build_mprime()
    assert m(*p) == pytest.approx(target, abs=1e-10)
    assert m.stats["blocked"] == 0


def test_mprime_pair_constraint():
    rng = np.random.default_rng(0)
    seen_blocked = False
    for _ in range(30):
        p = rng.uniform(-1, 1, 3)
        m = build_mprime()
        val, free = m(*p), m.unconstrained(*p)
        assert 0 <= m.stats["blocked"] <= m.stats["pairs"]
        assert -1e-12 <= val <= free + 1e-12
        if m.stats["blocked"] == 0:
            assert val == pytest.approx(free, abs=1e-12)
        if m.stats["pairs"] and m.stats["blocked"] == m.stats["pairs"]:
            assert val == 0
        seen_blocked |= m.stats["blocked"] > 0
        if in_small_cone(*p):
            assert m.stats["blocked"] == 0
    assert seen_blocked


def test_mirror_mprime():
    m = build_mprime()
    mm = mirror_mprime(m)
    assert mm(0.05, 0.0, -1) == pytest.approx(m(-1, 0.0, 0.05), abs=1e-15)


def test_symbol_estimates_bounded():
    m = build_mprime()
    rows = symbol_estimate_probe(m, [(-1, 0.0, 0.05), (-2, 0.3, 0.32), (1, 0.0, 0.05)])
    for r in rows:
        assert r["first"] < 1e-6 and r["second"] < 1e-4
