from __future__ import annotations

import math
import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subgraphlab.graph import complete_graph, cycle_graph, make_graph
from subgraphlab.oracles import decide_graph, witness_valid
from subgraphlab.walkcheck import (
    DENSITY_LABEL,
    SPARSE_LABEL,
    WalkCostModel,
    cycle_leq_k,
    cycle_leq_oracle,
    density_stage_inert,
    johnson_gap,
    johnson_gap_formula,
    johnson_walk,
    layered_bound_shape,
    layered_path_search,
    layered_walk_model,
    marked_fraction,
    marked_fraction_closed,
    mbar_value,
    mnrs_cost,
    product_gap,
    random_layered,
    recursion_depth,
    sample_count,
    schedule_from_alpha,
    spectra_table,
    sparse_walk_params,
    walk_gap,
)

# ---------------------------------------------------------------------------
# cost model


def test_mnrs_cost_trivial_walk():
    assert mnrs_cost(WalkCostModel(S=0, U=0, C=7, delta=1, eps=1)) == 7
    assert mnrs_cost(WalkCostModel(S=2, U=3, C=1, delta=F(1, 4), eps=F(1, 9))) == 2 + (6 + 1) * 3


@pytest.mark.parametrize("field", ["delta", "eps"])
@pytest.mark.parametrize("bad", [0, -1, F(3, 2)])
def test_mnrs_cost_rejects_bad_parameters(field, bad):
    kw = dict(S=1, U=1, C=1, delta=F(1, 2), eps=F(1, 2))
    kw[field] = bad
    with pytest.raises(ValueError):
        mnrs_cost(WalkCostModel(**kw))


pos = st.fractions(min_value=0, max_value=100)
unit = st.fractions(min_value=F(1, 1000), max_value=1)


@given(pos, pos, pos, unit, unit, unit)
def test_mnrs_cost_monotone(S, U, C, delta, eps, shrink):
    base = mnrs_cost(WalkCostModel(S, U, C, delta, eps))
    assert mnrs_cost(WalkCostModel(S, U, C, delta * shrink, eps)) >= base
    assert mnrs_cost(WalkCostModel(S, U, C, delta, eps * shrink)) >= base
    assert mnrs_cost(WalkCostModel(S + 1, U + 1, C + 1, delta, eps)) > base


@given(st.integers(4, 400), st.integers(1, 10**4), st.integers(0, 10**4), st.data())
def test_layered_model_matches_bound_shape(n, r, c, data):
    s = data.draw(st.integers(1, n // 2))
    cost = float(mnrs_cost(layered_walk_model(n, r, s, c)))
    shape = layered_bound_shape(n, r, s, c)
    assert shape / math.sqrt(2) * (1 - 1e-12) <= cost <= shape * (1 + 1e-12)


# ---------------------------------------------------------------------------
# Johnson spectra


def test_johnson_gap_examples():
    assert johnson_gap_formula(4, 1) == F(4, 3)
    assert johnson_gap_formula(6, 3) == F(2, 3)
    assert johnson_gap(4, 1) == pytest.approx(4 / 3, abs=1e-12)
    assert johnson_gap(6, 3) == pytest.approx(2 / 3, abs=1e-12)


def test_johnson_walk_is_stochastic_and_symmetric():
    P = johnson_walk(7, 3)
    assert P.shape == (35, 35)
    assert np.allclose(P.sum(axis=1), 1) and np.allclose(P, P.T)


def test_spectra_table_up_to_twelve():
    rows = spectra_table(12)
    assert len(rows) == sum(n // 2 for n in range(2, 13))
    assert max(r.error for r in rows) < 1e-9


@pytest.mark.parametrize("n,s", [(5, 0), (5, 5), (3, 4), (4, -1)])
def test_johnson_subset_size_range(n, s):
    with pytest.raises(ValueError):
        johnson_gap_formula(n, s)


FACTORS = [(n, s) for n in range(2, 9) for s in range(1, n // 2 + 1) if math.comb(n, s) <= 20]


@pytest.mark.parametrize("f1", FACTORS)
def test_product_generator_gap_is_min(f1):
    for f2 in FACTORS[::3]:
        g1, g2 = johnson_gap(*f1), johnson_gap(*f2)
        assert product_gap(f1, f2) == pytest.approx(min(g1, g2), abs=1e-9)
        assert product_gap(f1, f2, "cartesian") == pytest.approx(min(g1, g2) / 2, abs=1e-9)


def test_square_product_keeps_factor_gap():
    assert product_gap((5, 2), (5, 2)) == pytest.approx(float(johnson_gap_formula(5, 2)), abs=1e-9)


def test_tensor_product_differs():
    # the tensor walk can lose the gap entirely (bipartite factor)
    assert product_gap((2, 1), (3, 1), "tensor") < min(johnson_gap(2, 1), johnson_gap(3, 1)) - 0.1


def test_walk_gap_refuses_huge_matrices():
    with pytest.raises(ValueError):
        walk_gap(np.eye(2001))


# ---------------------------------------------------------------------------
# marked fraction


def test_marked_fraction_example():
    assert marked_fraction(4, 2) == F(1, 4)
    assert marked_fraction(4, 2, planted=False) == 0


@given(st.integers(1, 40), st.data())
def test_marked_fraction_closed_form(L, data):
    s = data.draw(st.integers(0, L))
    assert marked_fraction(L, s) == marked_fraction_closed(L, s)


# ---------------------------------------------------------------------------
# sparse-graph walk parameters


def test_sparse_single_block():
    n = 64
    m = sparse_walk_params(n, n**2, 1, [n])
    assert len(m.blocks) == 1 and m.blocks[0].s == 1
    assert m.C == n


@pytest.mark.parametrize("ell", [1, 2, 3, 4])
@pytest.mark.parametrize("n", [16, 81, 256, 1000])
def test_sparse_chains_hold(n, ell):
    floor_m = n ** (1 + 1 / (ell + 1))
    rng = random.Random(n * 10 + ell)
    for mult in (1, 2, 10):
        ts = [rng.randint(1, n) for _ in range(ell)]
        m = sparse_walk_params(n, floor_m * mult, ell, ts)
        c = m.chains
        assert c["setup"] <= ell * c["bound"] * (1 + 1e-9)
        assert c["walk"] <= ell * c["bound"] * (1 + 1e-9)
        assert c["update_over_gap"] >= n * (1 - 1e-9)
        assert 0 < m.eps <= 1 and 0 < m.delta <= 1


def test_sparse_power_of_four_ratios_are_exact():
    m = sparse_walk_params(256, 256**2, 3, [1, 4, 16])
    assert [b.s for b in m.blocks] == [F(1), F(2), F(4)]
    assert all(isinstance(b.s, F) for b in m.blocks)


def test_sparse_rejects_thin_budget():
    with pytest.raises(ValueError):
        sparse_walk_params(100, 100, 2, [10, 10])
    with pytest.raises(ValueError):
        sparse_walk_params(100, 100**2, 1, [101])
    with pytest.raises(ValueError):
        sparse_walk_params(100, 100**2, 2, [10])


# ---------------------------------------------------------------------------
# layered path search


def test_recursion_depth_and_schedule():
    assert [recursion_depth(k) for k in (1, 2, 3, 4, 5, 7)] == [0, 0, 1, 1, 2, 3]
    sched = schedule_from_alpha(20, 7, 1)
    assert len(sched) == 3 and all(1 <= s <= 10 for s in sched)


def test_single_layer_scan():
    inst = random_layered(6, 1, 3, 0.2, seed=1)
    found = layered_path_search(inst, [])
    assert bool(found) == decide_graph(inst.view_graph(), "DirPath^=1")


def test_schedule_errors():
    inst = random_layered(10, 5, 2, 0.4, seed=0)
    with pytest.raises(ValueError):
        layered_path_search(inst, [1])
    with pytest.raises(ValueError):
        layered_path_search(inst, [0, 1])


@pytest.mark.parametrize("k", [3, 5, 7])
def test_layered_search_agrees_with_oracle(k):
    rng = random.Random(k)
    yes = 0
    for trial in range(1000):
        r = rng.randint(1, 4)
        n = rng.randint(2 * r + k - 1, 24)
        inst = random_layered(n, k, r, rng.uniform(0.1, 0.6), seed=trial, plant=rng.random() < 0.3)
        sched = [rng.randint(1, 4) for _ in range(recursion_depth(k))] if trial % 2 else schedule_from_alpha(n, k, 1)
        found = layered_path_search(inst, sched, seed=trial)
        view = inst.view_graph()
        truth = decide_graph(view, f"DirPath^={k}")
        assert bool(found) == bool(truth)
        if found:
            yes += 1
            assert witness_valid(view, f"DirPath^={k}", (), found)
            assert [inst.layers[v] for v in found.vertices] == list(range(k + 1))
    assert 100 < yes < 1000


def test_layered_search_ignores_off_layer_arcs():
    inst = random_layered(12, 5, 2, 0.0, seed=3, noise=0.9)
    assert not layered_path_search(inst, [1, 1])


# ---------------------------------------------------------------------------
# bounded-length cycle algorithm


def test_forest_is_no():
    g = make_graph(8, False, [(0, 1), (1, 2), (1, 3), (4, 5), (5, 6)])
    res = cycle_leq_k(g, 6)
    assert res.verdict == 0 and res.stage == "sparse"
    assert res.labels == (DENSITY_LABEL, SPARSE_LABEL)


def test_five_cycle_plus_isolated():
    g = make_graph(9, False, cycle_graph(5).edges())
    res = cycle_leq_k(g, 5)
    assert (res.verdict, res.stage, res.length) == (1, "sparse", 5)
    assert cycle_leq_k(g, 4).verdict == 0


@pytest.mark.parametrize("k", [4, 5, 6, 7, 8, 9])
def test_density_stage_inert_at_small_n(k):
    for n in range(2, 33):
        assert density_stage_inert(n, k)
        assert math.comb(n, 2) < 1.5 * mbar_value(n, k)
    assert cycle_leq_k(complete_graph(12), k).stage == "sparse"


def test_density_stage_fires_with_override():
    res = cycle_leq_k(complete_graph(8), 4, mbar=5)
    assert (res.verdict, res.stage) == (1, "density")


def test_exact_mode_agrees_with_oracle():
    rng = random.Random(11)
    for _ in range(10_000):
        n = rng.randint(1, 8)
        k = rng.randint(4, 8)
        p = rng.random() * 0.5
        g = make_graph(n, False, [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p])
        assert cycle_leq_k(g, k).verdict == cycle_leq_oracle(g, k)


def test_sampled_mode_within_failure_budget():
    # sampled mode errs only if the density stage misfires, probability <= 1/n each
    rng = random.Random(5)
    trials, wrong = 300, 0
    for i in range(trials):
        n = 8
        g = make_graph(n, False, [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.3])
        res = cycle_leq_k(g, 5, mode="sampled", seed=i)
        wrong += res.verdict != cycle_leq_oracle(g, 5)
        assert res.samples == sample_count(n, mbar_value(n, 5))
    assert wrong <= trials / 8


def test_cycle_leq_rejects_bad_input():
    with pytest.raises(ValueError):
        cycle_leq_k(cycle_graph(4), 3)
    with pytest.raises(ValueError):
        cycle_leq_k(make_graph(3, True, [(0, 1)]), 5)
    with pytest.raises(ValueError):
        cycle_leq_k(cycle_graph(4), 4, mode="guess")
