from __future__ import annotations

from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biest import forms
from biest.grid import ShiftedInterval
from biest.packets import SampledFunction, inner, make_packet, random_function
from biest.tiles import DESK, Tree, check_rank1, make_tritile

S = forms.MeasurableSetSpec
L, N = forms.WINDOW_L, forms.WINDOW_N


@pytest.fixture(scope="module")
def bank():
    return forms.PacketBank()


def collections(seed):
    return forms.biest_collections(np.random.default_rng(seed))


# ---------------------------------------------------------------------------
# sets


def test_set_operations():
    a = S(((F(0), F(2)), (F(1), F(3))))
    assert a.intervals == ((F(0), F(3)),) and a.measure == 3
    b = S(((F(1), F(2)),))
    assert a.minus(b).measure == 2 and a.contains_set(b) and not b.contains_set(a)
    assert a.union(S(((F(5), F(6)),))).measure == 4
    assert S(()).measure == 0
    assert a.mask(L, N).sum() * L / N == 3


@pytest.mark.parametrize("seed", range(5))
def test_random_set_measure_and_functions(seed):
    rng = np.random.default_rng(seed)
    E = forms.random_set(rng, F(5, 4), piece_exp=-4)
    assert E.measure == F(5, 4)
    f = forms.random_x_function(rng, E)
    assert np.allclose(np.abs(f.values), E.mask(L, N))
    with pytest.raises(ValueError):
        forms.random_set(rng, F(1, 32), piece_exp=-4)


def test_exceptional_set_trivial():
    E = [S(((F(0), F(1)),))] * 4
    ex = forms.exceptional_set(E, 4, C=2)
    assert ex.omega.measure == 0 and ex.major == E[3] and ex.ok
    with pytest.raises(ValueError):
        forms.exceptional_set(E, 1, C=0)


def test_exceptional_set_small_pivot():
    big = S(((F(0), F(8)),))
    tiny = S(((F(0), F(1, 4)),))
    # threshold for the big set is 8 * 8 / (1/4) > 1, for the tiny one 8 * (1/4) / (1/4) = 8 > 1
    ex = forms.exceptional_set([big, tiny], 2, C=8)
    assert ex.omega.measure == 0
    # with a large pivot the small set's superlevel is its own neighbourhood
    ex = forms.exceptional_set([tiny, big], 2, C=8)
    assert ex.omega.measure > 0 and ex.omega.contains_set(tiny)
    assert big.contains_set(ex.major) and 2 * ex.major.measure >= big.measure and ex.ok


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 4))
def test_major_subset_property(seed, pivot):
    rng = np.random.default_rng(seed)
    sizes = [F(2) ** int(rng.integers(-4, -1)) for _ in range(4)]
    sizes[pivot - 1] = F(2) ** int(rng.integers(2, 4))
    E = [forms.random_set(rng, s, piece_exp=-4) for s in sizes]
    ex = forms.exceptional_set(E, pivot, 8)
    assert E[pivot - 1].contains_set(ex.major) or ex.major.measure == 0
    assert ex.major.measure == E[pivot - 1].minus(ex.omega).measure
    assert 2 * ex.major.measure >= E[pivot - 1].measure


def test_exceptional_set_strict_mode():
    small = S(((F(0), F(1, 4)),))
    pivot = S(((F(0), F(1, 2)),))
    ex = forms.exceptional_set([small, pivot], 2, C=F(1, 4))
    assert not ex.ok
    with pytest.raises(ValueError):
        forms.exceptional_set([small, pivot], 2, C=F(1, 4), strict=True)


def test_stratify_examples():
    t = make_tritile(0, 3, (0, 0, 0))
    assert forms.stratify_k([t], S(())) == {0: [t]}
    assert forms.stratify_k([t], S(((F(0), F(7)),))) == {2: [t]}
    assert forms.stratify_k([t], S(((F(3), F(4)),))) == {0: [t]}
    assert forms.stratify_k([t], S(((F(2), F(5)),))) == {1: [t]}


@pytest.mark.parametrize("seed", range(4))
def test_stratify_is_a_partition(seed):
    P, _, _ = collections(seed)
    omega = forms.random_set(np.random.default_rng(seed), F(6), piece_exp=-2)
    strata = forms.stratify_k(P, omega)
    flat = [p for v in strata.values() for p in v]
    assert sorted(map(id, flat)) == sorted(map(id, P))


def test_strata_non_increasing():
    assert forms.strata_non_increasing({"0": 1.0, "1": 3.0, "2": 2.0, "3": 2.05})
    assert not forms.strata_non_increasing({"2": 1.0, "3": 1.2})
    assert forms.strata_non_increasing({})


# ---------------------------------------------------------------------------
# exponents


def test_vertex_table():
    assert forms.VERTICES["A2"] == (F(1, 2), F(1), F(1), F(-3, 2))
    assert forms.VERTICES["A9"] == (F(-1, 2), F(1), F(0), F(1, 2))
    assert forms.VERTICES["B2"] == (F(1), F(1), F(1, 2), F(-3, 2))
    assert all(sum(v) == 1 for v in forms.VERTICES.values())


def test_admissible_tuple_validation():
    with pytest.raises(ValueError):
        forms.AdmissibleTuple((0.5, 0.5, 0.5, 0.5))
    with pytest.raises(ValueError):
        forms.AdmissibleTuple((1.0, 0.5, 0.0, -0.5))
    with pytest.raises(ValueError):
        forms.AdmissibleTuple((-0.5, -0.5, 1.0, 1.0))
    with pytest.raises(ValueError):
        forms.AdmissibleTuple(forms.VERTICES["A2"])  # vertices lie on the boundary
    t = forms.AdmissibleTuple((0.5, 0.9, 0.9, -1.3))
    assert t.bad_index == 4 and t.weight([1, 1, 1, 1]) == 1.0
    assert t.weight([4, 1, 1, 1]) == pytest.approx(2.0)


def test_exponents_example():
    ex = forms.exponents_for_vertex((-0.45, 0.93, 0.04, 0.48), "A9")
    assert ex.as_tuple() == pytest.approx((0.1, 0.86, 0.04, 12 / 13))
    with pytest.raises(ValueError):
        forms.exponents_for_vertex((-0.45, 0.93, 0.04, 0.48), "A2")
    with pytest.raises(ValueError):
        forms.exponents_for_vertex((-0.45, 0.93, 0.04, 0.48), "A13")


@pytest.mark.parametrize("name", ["A2", "A9"])
def test_experiment_alphas_are_near_their_vertex(name):
    tup = forms.AdmissibleTuple(forms.EXPERIMENT_ALPHA[name])
    assert tup.distance(name) <= 0.05
    ex = forms.exponents_for_vertex(tup, name)
    assert sum(ex.as_tuple()[:3]) == pytest.approx(1.0)


def test_mirrored_vertex_uses_exchanged_entries():
    a = (0.03, 0.96, -0.47, 0.48)
    assert forms.exponents_for_vertex(a, "B9") == forms.exponents_for_vertex((-0.47, 0.96, 0.03, 0.48), "A9")


def test_bht_exponents():
    ex = forms.exponents_bht(forms.EXPERIMENT_ALPHA["bht"])
    assert ex.as_tuple()[:3] == pytest.approx((0.94, 0.04, 0.02)) and ex.theta is None
    with pytest.raises(ValueError):
        forms.exponents_bht((0.5, 0.5, 0.5))
    with pytest.raises(ValueError):
        forms.exponents_bht((1 / 3, 1 / 3, 1 / 3))


# ---------------------------------------------------------------------------
# forms


def test_packet_pairing_matches_inner(bank):
    P, Q, _ = collections(1)
    for q in Q[:6]:
        for p in P[:6]:
            a, b = bank(q[3]), bank(p[2])
            assert forms.packet_pairing(a, b) == pytest.approx(inner(a.function, b.function), abs=1e-12)


def test_lambda_bht_examples(bank):
    f = [random_function(i, L, N) for i in range(3)]
    assert forms.lambda_bht([], *f) == 0
    t = make_tritile(0, 2, (1, 2, 3))
    expect = np.prod([inner(fj, make_packet(t[j], L, N)) for j, fj in zip((1, 2, 3), f)])
    assert forms.lambda_bht([t], *f, bank=bank) == pytest.approx(expect, abs=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6), st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_lambda_bht_multilinear(seed, lam):
    tiles, _ = forms.tree_ensemble(seed, 3, 0)
    f = [random_function(seed + i, L, N, band=40) for i in range(4)]
    bank = forms.PacketBank()
    mixed = f[1] + f[3].scale(lam)
    lhs = forms.lambda_bht(tiles, f[0], mixed, f[2], bank)
    rhs = forms.lambda_bht(tiles, f[0], f[1], f[2], bank) + lam * forms.lambda_bht(tiles, f[0], f[3], f[2], bank)
    assert lhs == pytest.approx(rhs, abs=1e-10)


@pytest.mark.parametrize("seed", range(3))
def test_tree_ensemble_is_rank1(seed):
    tiles, trees = forms.tree_ensemble(seed, 5, 0)
    assert check_rank1(tiles, DESK)
    tops = [t.top.I for t in trees]
    assert len(set(tops)) == len(tops) and all(t.is_valid(DESK) for t in trees)


def test_b_p2_fourier_support(bank):
    P, Q, _ = collections(2)
    f2, f3 = random_function(1, L, N), random_function(2, L, N)
    assert not forms.b_p2(P[0][2], [], f2, f3, bank).spectrum.any()
    hits = 0
    for p in P:
        b = forms.b_p2(p[2], Q, f2, f3, bank)
        bins = np.fft.fftfreq(N, 1 / N)[np.abs(b.spectrum) > 0]
        lo, hi = p[2].omega.bounds
        assert all(lo <= F(int(x), int(L)) < hi for x in bins)
        hits += len(bins) > 0
    assert hits


def test_lambda_biest_zero_cases(bank):
    P, Q, _ = collections(3)
    f = [random_function(i, L, N) for i in range(4)]
    assert forms.lambda_biest(P, [], *f, bank=bank) == 0
    assert forms.lambda_biest([], Q, *f, bank=bank) == 0
    zero = SampledFunction(L, N, np.zeros(N))
    assert forms.lambda_biest(P, Q, zero, *f[1:], bank=bank) == 0
    assert forms.rightform_a3(Q[0][3], [], f[0], f[3], bank) == 0
    with pytest.raises(ValueError):
        forms.rightform_a3(Q[0][3], P, f[0], f[3], bank, pivot=3)


def test_lambda_biest_rejects_non_rank1():
    a = make_tritile(0, 0, (0, 0, 0))
    b = make_tritile(0, 0, (0, 1, 1))
    f = [random_function(i, L, N) for i in range(4)]
    with pytest.raises(ValueError):
        forms.lambda_biest([a, b], [a], *f)


@pytest.mark.parametrize("seed", range(3))
def test_lambda_biest_four_linear(seed, bank):
    P, Q, _ = collections(seed)
    f = [random_function(10 * seed + i, L, N) for i in range(5)]
    lam = 0.3 - 1.2j
    for slot in range(4):
        g = list(f[:4])
        g[slot] = f[slot] + f[4].scale(lam)
        h = list(f[:4])
        h[slot] = f[4]
        lhs = forms.lambda_biest(P, Q, *g, bank=bank)
        rhs = forms.lambda_biest(P, Q, *f[:4], bank=bank) + lam * forms.lambda_biest(P, Q, *h, bank=bank)
        assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1e-300)


@pytest.mark.parametrize("seed", range(5))
def test_rearrangement_identity(seed, bank):
    P, Q, _ = collections(seed)
    f = [random_function(100 * seed + i, L, N) for i in range(4)]
    lam = forms.lambda_biest(P, Q, *f, bank=bank)
    r = forms.rearranged_sum(Q, *forms.rightform(P, Q, *f, bank=bank))
    assert abs(lam) > 0 and abs(lam - r) <= 1e-10 * abs(lam)


def test_normalization_of_tree_coefficients():
    rng = np.random.default_rng(0)
    _, trees = forms.tree_ensemble(rng, 3, 0)
    c = {q: complex(v) for t in trees for q, v in zip(t.members, rng.normal(size=len(t.members)))}
    total = sum(float(t.I.length) for t in trees)
    normed = forms.normalize_ask(trees, c)
    assert forms.subtree_constant(trees, normed) * total == pytest.approx(1.0)
    assert forms.normalize_ask(trees, {q: 0 for q in c}) == {q: 0 for q in c}


def test_subtrees_cover_each_member():
    _, trees = forms.tree_ensemble(4, 2, 0)
    for t in trees:
        subs = forms.subtrees(t)
        assert subs[0][0] == t.top and set(subs[0][1]) == set(t.members)


def test_local_average_examples():
    I = ShiftedInterval(0, 3)
    full = S(((F(0), F(16)),))
    empty = S(())
    assert forms.local_average(empty, I, 2) == 0
    part = S(((F(3), F(4)),))
    assert 0 < forms.local_average(part, I, 4) < forms.local_average(full, I, 4)
    # higher decay order concentrates the cutoff on the interval
    assert forms.local_average(full, I, 8) < forms.local_average(full, I, 2)


@pytest.mark.parametrize("seed", range(3))
def test_measured_ratios_finite(seed, bank):
    vals = [
        forms.l2_ratio(seed, bank),
        forms.energy_lemma_ratio(seed, bank),
        forms.size_lemma_ratio(seed, bank),
        forms.split_cor_ratio(seed, bank),
        forms.bht_size_ratio(seed, bank),
        forms.bht_energy_ratio(seed, bank),
    ]
    assert all(np.isfinite(v) and v >= 0 for v in vals)


def test_b1_coefficients_vanish_for_zero_weights(bank):
    P, Q, trees = forms.biest_collections(np.random.default_rng(5), n_q=4, n_p=2, kinds_q=(3,), anchor_slot=1)
    assert not forms.b1_coefficients(P, trees, {q: 0 for q in Q}, bank).any()


# ---------------------------------------------------------------------------
# experiments


@pytest.mark.parametrize("seed", range(4))
def test_instance_respects_sup_bound(seed, bank):
    for name in ("A2", "A9"):
        inst = forms.biest_instance(seed, forms.AdmissibleTuple(forms.EXPERIMENT_ALPHA[name]), bank=bank)
        assert abs(inst.lam) <= inst.bound * (1 + 1e-9)
        assert inst.major_ok
        assert sum(inst.strata.values()) >= abs(inst.lam) * (1 - 1e-9)
    inst = forms.bht_instance(seed, forms.EXPERIMENT_ALPHA["bht"], bank=bank)
    assert abs(inst.lam) <= inst.bound * (1 + 1e-9)


def test_experiment_report_fields():
    rep = forms.restricted_type_experiment(forms.EXPERIMENT_ALPHA["A9"], "A9", [0, 1])
    assert rep["max_ratio"] == max(i["ratio"] for i in rep["per_instance"])
    assert rep["exponents"] is not None and len(rep["per_instance"]) == 2
    rep = forms.restricted_type_experiment(forms.EXPERIMENT_ALPHA["bht"], None, [0], kind="bht")
    assert rep["kind"] == "bht" and len(rep["exponents"]) == 4
    with pytest.raises(ValueError):
        forms.restricted_type_experiment((0.5, 0.5, 0.5, -0.5), "A2", [0])
    with pytest.raises(ValueError):
        forms.restricted_type_experiment(forms.EXPERIMENT_ALPHA["A9"], "A9", [0], kind="other")


def test_experiment_is_deterministic():
    a = forms.restricted_type_experiment(forms.EXPERIMENT_ALPHA["A2"], "A2", [3])
    b = forms.restricted_type_experiment(forms.EXPERIMENT_ALPHA["A2"], "A2", [3])
    assert a == b


def test_tree_type_is_reused():
    t = make_tritile(0, 0, (0, 0, 0))
    assert forms.subtrees(Tree(t, (t,), 1)) == [(t, [t])]
