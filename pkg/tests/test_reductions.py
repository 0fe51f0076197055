from __future__ import annotations

import math
import random
from fractions import Fraction as F
from itertools import permutations, product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import graphs
from subgraphlab.graph import (
    ColoringTape,
    CountedOracle,
    complete_graph,
    cycle_graph,
    empty_graph,
    enumerate_tapes,
    fresh_tape,
    instance,
    make_graph,
    path_graph,
    relabel,
    tag,
)
from subgraphlab.oracles import any_cycle, decide_graph, gc_or, promise_holds_graph
from subgraphlab.reductions import (
    ColorCode,
    CyclicRule,
    ForgetDirections,
    InsertLayers,
    Reduction,
    ReductionError,
    Stage,
    Subsample,
    amplify,
    amplify_schedule,
    apply,
    derive_graph,
    gc_embed,
    get,
    random_tape,
    reduction_names,
    registry,
    stage_spec,
    standard_suite,
)
from subgraphlab.verify import iso_graphs, survival


def _all_tapes(red, g, pins, stage=0):
    return list(enumerate_tapes(stage_spec(red, g.n, pins, stage)))


def test_registry_names_unique_and_labels_neutral():
    names = reduction_names()
    assert len(names) == len(set(names))
    for k in (3, 4, 5):
        labels = [r.label for r in registry(k).values()]
        assert len(labels) == len(set(labels))
    for red in standard_suite():
        assert 0 < red.claimed_at(8) <= 1


def test_path_st_color_code_claim():
    assert get("path-st-eq-to-leq", 5).claimed == F(1, 4**4)


def test_color_code_empty_base_stays_empty():
    red = get("dircycle-eq-to-leq", 4)
    g = empty_graph(5, True)
    for tape in _all_tapes(red, g, ()):
        assert derive_graph(red, g, (), tape)[0].edge_count == 0


def test_directed_three_path_survival_quarter():
    red = get("dirpath-st-eq-to-prom", 3)
    # s=0 -> a=2 -> b=3 -> t=1 among five vertices
    g = make_graph(5, True, [(0, 2), (2, 3), (3, 1)])
    res = survival(red, g, (0, 1), full_spec=True)
    assert res["exact"] and res["value"] == F(1, 4)
    assert res["value"] >= F(1, 2**2)


def test_insert_layers_rejects_zero_copies():
    with pytest.raises(ReductionError):
        InsertLayers(CyclicRule(3), 1, 0)
    with pytest.raises(ReductionError):
        InsertLayers(CyclicRule(3), 0, 1)


def _count_cycles(g, length):
    seen = set()
    for start in range(g.n):
        for rest in permutations([v for v in range(g.n) if v != start], length - 1):
            cyc = (start,) + rest
            if all(g.has_edge(cyc[i], cyc[(i + 1) % length]) for i in range(length)):
                i = cyc.index(min(cyc))
                seen.add(cyc[i:] + cyc[:i])
    return len(seen)


def test_insert_layers_three_cycle_becomes_unique_five_cycle():
    con = InsertLayers(CyclicRule(3), 1, 2)
    g = cycle_graph(3, True)
    out = con.derive(g, (), ColoringTape(None, (0, 1, 2)))
    assert out.n == 9
    assert _count_cycles(out, 5) == 1
    assert all(any_cycle(out.rows, out.n, j) is None for j in (3, 4, 6, 7))


def test_lengthening_claim():
    assert get("dircycle-lengthen", 5).claimed == F(1, 4**4)


def test_randomize_single_edge():
    red = get("cycle-eq-orient", 3)
    g = path_graph(2)
    outs = {derive_graph(red, g, (), ColoringTape(None, (), (), (b,)))[0].edges()[0] for b in (0, 1)}
    assert outs == {(0, 1), (1, 0)}


def test_randomize_triangle_two_of_eight():
    red = get("cycle-eq-orient", 3)
    g = cycle_graph(3)
    tapes = _all_tapes(red, g, ())
    assert len(tapes) == 8
    assert sum(decide_graph(derive_graph(red, g, (), t)[0], "DirCycle^=3") for t in tapes) == 2
    assert red.claimed == F(1, 8)


def test_forget_directions_merges_opposite_arcs():
    g = make_graph(2, True, [(0, 1), (1, 0)])
    out = ForgetDirections().derive(g, (), ColoringTape(None))
    assert out.edges() == [(0, 1)] and not out.directed


def test_forget_after_cyclic_coloring_keeps_only_five_cycles():
    red = get("dircycle-eq-to-cycle-eq", 5)
    g = cycle_graph(5, True)
    hits = 0
    for tape in _all_tapes(red, g, ()):
        out, _ = derive_graph(red, g, (), tape)
        assert all(any_cycle(out.rows, out.n, j) is None for j in (3, 4))
        hits += decide_graph(out, "Cycle^=5")
    assert hits > 0


def test_forget_even_k_counterexample():
    with pytest.raises(ReductionError):
        get("dircycle-eq-to-cycle-eq", 4)
    # colours 0, 1, 0, 1: every arc goes 0 -> 1, so no directed cycle, but
    # the undirected image is a 4-cycle
    g = make_graph(4, True, [(0, 1), (0, 3), (2, 1), (2, 3)])
    assert decide_graph(g, "DirCycle^=4") == 0
    out = ColorCode(CyclicRule(4), forget=True).derive(g, (), ColoringTape(None, (0, 1, 0, 1)))
    assert decide_graph(out, "Cycle^=4") == 1


def test_attach_endpoints():
    red = get("attach-endpoints", 3)
    assert red.src == tag("DirPath^=1") and red.claimed == F(1, 4)
    empty = empty_graph(3, True)
    for t in _all_tapes(red, empty, ()):
        out, pins = derive_graph(red, empty, (), t)
        assert decide_graph(out, "DirPath_st^=3", pins) == 0
    g = make_graph(3, True, [(0, 1)])
    res = survival(red, g, (), full_spec=True)
    assert res["exact"] and res["value"] >= F(1, 4)


def test_strip_endpoints_keeps_middle_arc():
    red = get("strip-endpoints", 3)
    g = make_graph(4, True, [(0, 2), (2, 3), (3, 1)])
    found = []
    for t in _all_tapes(red, g, (0, 1)):
        out, pins = derive_graph(red, g, (0, 1), t)
        if decide_graph(out, "DirPath^=1"):
            found.append(out.edges())
    assert found and all(e == [(2, 3)] for e in found)
    assert red.claimed == F(1, 4)


def test_merge_st_monte_carlo():
    red = get("prom-dirpath-st-merge", 3)
    rng = random.Random(5)
    checked = 0
    while checked < 60:
        pairs = [(u, v) for u in range(5) for v in range(5) if u != v]
        g = make_graph(5, True, [p for p in pairs if rng.random() < 0.25])
        if not promise_holds_graph(g, "PromDirPath_st^=3", (0, 1)):
            continue
        truth = decide_graph(g, "DirPath_st^=3", (0, 1))
        hits = 0
        for seed in range(200):
            out, pins = derive_graph(red, g, (0, 1), random_tape(red, 5, (0, 1), seed))
            d = decide_graph(out, "DirCycle_s^=3", pins)
            assert d <= truth
            hits += d
        if truth:
            assert hits / 200 >= 0.25 - 0.1
        checked += 1


def test_merge_disconnected_never_cycles():
    red = get("prom-dirpath-st-merge", 4)
    g = make_graph(6, True, [(0, 2), (2, 3), (4, 5), (5, 1)])
    for t in _all_tapes(red, g, (0, 1))[:500]:
        out, pins = derive_graph(red, g, (0, 1), t)
        assert decide_graph(out, "DirCycle_s^<=8", pins) == 0


def test_directed_split():
    red = get("dircycle-s-split", 5)
    g = cycle_graph(5, True)
    out, pins = derive_graph(red, g, (0,), ColoringTape(None))
    assert decide_graph(out, "DirPath_st^=5", pins) == 1
    assert all(decide_graph(out, f"DirPath_st^={j}", pins) == 0 for j in range(1, 5))
    lonely = make_graph(4, True, [(1, 2), (2, 3), (3, 1)])
    out, pins = derive_graph(red, lonely, (0,), ColoringTape(None))
    assert decide_graph(out, "DirPath_st^<=5", pins) == 0


def test_undirected_split_claim():
    assert get("prom-cycle-s-split", 4).claimed == F(1, 2)


def test_contraction_empty_neighbourhood():
    red = get("cycle-s-eq-to-leq", 5)
    g = make_graph(6, False, [(1, 2), (2, 3), (3, 4), (4, 5), (5, 1)])
    for seed in range(50):
        tape = random_tape(red, 6, (0,), seed)
        out, pins = derive_graph(red, g, (0,), tape)
        assert decide_graph(out, "Cycle_s^<=5", pins) == 0


def test_contraction_k5_survives():
    red = get("cycle-s-eq-to-leq", 5)
    res = survival(red, complete_graph(5), (0,), samples=2000)
    assert res["lower"] > 0


@pytest.mark.parametrize("name,k,budget", [("cycle-s-eq-to-leq", 5, 1), ("dircycle-s-eq-to-cycle-s-eq", 4, 2),
                                           ("prom-path-st-contract", 4, 2)])
def test_contraction_upfront_budget(name, k, budget):
    red = get(name, k)
    n = 7
    directed = red.src.directed
    g = complete_graph(n, directed)
    pins = tuple(range(red.src.arity))
    inst = instance(g, red.src, pins)
    derived = apply(red, inst, random_tape(red, n, pins, 1))
    assert red.eager_budget(n) == budget * n
    assert derived.view.upfront_budget == budget * n
    assert derived.view.upfront <= budget * n


def test_pin_s_cyclic():
    red = get("dircycle-s-unpin", 4)
    g = cycle_graph(4, True)
    assert any(decide_graph(derive_graph(red, g, (0,), t)[0], "DirCycle^=4") for t in _all_tapes(red, g, (0,)))
    assert red.claimed == F(1, 4**4)


def test_pin_s_cyclic_avoids_cycles_missing_s():
    red = get("dircycle-s-unpin", 4)
    rng = random.Random(2)
    for _ in range(40):
        pairs = [(u, v) for u in range(1, 6) for v in range(1, 6) if u != v]
        g = make_graph(6, True, [p for p in pairs if rng.random() < 0.3] + [(0, 1)])
        for t in _all_tapes(red, g, (0,)):
            out, _ = derive_graph(red, g, (0,), t)
            assert decide_graph(out, "DirCycle^<=6") == 0


def _subsample(keep):
    t = tag("DirPath^=2")
    return Reduction("sub", "F0", t, t, (Stage(Subsample(keep), t),), F(1), "exact")


def test_subsample_identity_and_pinned_only():
    red = _subsample(4)
    g = path_graph(4, True)
    for tape in _all_tapes(red, g, ()):
        assert derive_graph(red, g, (), tape)[0] == g
    red_st = Reduction("sub-st", "F0", tag("DirPath_st^=2"), tag("DirPath_st^=2"),
                       (Stage(Subsample(2), tag("DirPath_st^=2")),), F(1), "exact")
    out, pins = derive_graph(red_st, path_graph(4, True), (0, 1), _all_tapes(red_st, path_graph(4, True), (0, 1))[0])
    assert out.n == 2 and pins == (0, 1)


def test_subsample_planted_three_path():
    red = _subsample(3)
    g = relabel(path_graph(3, True), [2, 5, 7], 9)
    res = survival(red, g, (), full_spec=True)
    assert res["exact"] and res["value"] == F(1, 84)


def test_subsample_registered_claim_is_hypergeometric():
    red = get("subsample-dirpath")
    g = relabel(path_graph(3, True), [2, 5, 7], 9)
    res = survival(red, g, ())
    assert res["value"] == red.claimed_at(9)


def test_gc_embed_examples():
    k2 = path_graph(2)
    view, pins = gc_embed(k2, [[1, 0], [0, 1]])
    g = view.materialize()
    assert g.n == 9
    assert decide_graph(g, "Cycle_s^=5", pins) == 1
    # one 5-cycle per orientation of the colliding edge {0, 1}
    assert _count_cycles_through(g, 0, 5) == 2
    view, pins = gc_embed(k2, [[0, 0], [0, 0]])
    assert decide_graph(view.materialize(), "Cycle_s^=5", pins) == 0
    assert view.max_fanout <= 1


def _count_cycles_through(g, s, length):
    seen = set()
    for rest in permutations([v for v in range(g.n) if v != s], length - 1):
        cyc = (s,) + rest
        if all(g.has_edge(cyc[i], cyc[(i + 1) % length]) for i in range(length)):
            seen.add(min(cyc[1:], cyc[1:][::-1]))
    return len(seen)


def test_gc_embed_exhaustive_on_path():
    p3 = path_graph(3)
    for flat in product((0, 1), repeat=9):
        xs = [flat[0:3], flat[3:6], flat[6:9]]
        view, pins = gc_embed(p3, xs)
        assert decide_graph(view.materialize(), "Cycle_s^=5", pins) == gc_or(p3, xs)
        assert view.max_fanout <= 1


def test_amplify_schedule():
    assert amplify_schedule(F(1))[0] == 1
    assert amplify_schedule(F(1, 4))[0] == 8
    with pytest.raises(ReductionError):
        amplify_schedule(F(0))


def _exact(g, t, pins):
    return decide_graph(g, t, pins)


@pytest.mark.parametrize("name,k,directed,arity,max_n", [
    ("path-st-eq-to-leq", 3, False, 2, 5),
    ("cycle-eq-orient", 3, False, 0, 5),
    ("dircycle-s-split", 3, True, 1, 4),
])
def test_amplify_exact_decider_matches_truth(name, k, directed, arity, max_n):
    # NO instances are always rejected; a YES instance is missed only when all
    # T tapes fail, which happens with probability (1 - q)^T <= e^-2
    red = get(name, k)
    pins = tuple(range(arity))
    misses = yes = 0
    for n in range(max(arity, 1), max_n + 1):
        for g in iso_graphs(n, directed, arity):
            truth = decide_graph(g, red.src, pins)
            got = amplify(red, g, _exact, pins, seed=n)
            if not truth:
                assert got == 0
                continue
            yes += 1
            misses += got == 0
            q = survival(red, g, pins)["value"]
            tapes, _ = amplify_schedule(red.claimed_at(n), len(red.stages))
            assert float((1 - q) ** tapes) <= math.exp(-2) + 1e-12
    assert yes > 0 and misses / yes <= 1 / 3


def test_amplify_noisy_decider_error():
    red = get("path-st-eq-to-leq", 3)
    yes = make_graph(5, False, [(0, 2), (2, 3), (3, 1)])
    no = make_graph(5, False, [(0, 2), (2, 1), (3, 4)])
    rng = random.Random(11)
    cache = {}

    def noisy(g, t, pins):
        key = (g.rows, str(t), pins)
        if key not in cache:
            cache[key] = decide_graph(g, t, pins)
        truth = cache[key]
        return truth if rng.random() < 2 / 3 else 1 - truth

    errors = 0
    trials = 10_000
    for i in range(trials):
        g, truth = (yes, 1) if i % 2 == 0 else (no, 0)
        errors += amplify(red, g, noisy, (0, 1), p=F(1, 4), seed=i) != truth
    assert errors / trials <= 1 / 3


@given(st.sampled_from(reduction_names()), st.integers(0, 2**32), st.data())
@settings(max_examples=80, deadline=None)
def test_lazy_view_matches_direct_derivation(name, seed, data):
    red = get(name)
    n = data.draw(st.integers(max(red.src.arity, 3), 6))
    g = data.draw(graphs(min_n=n, max_n=n, directed=red.src.directed))
    pins = tuple(range(red.src.arity))
    for i in range(len(red.stages)):
        tape = random_tape(red, n, pins, seed, i)
        direct, dpins = derive_graph(red, g, pins, tape, i)
        lazy = apply(red, instance(g, red.src, pins), tape, i)
        assert lazy.view.materialize() == direct
        assert lazy.pinned == dpins
        assert lazy.view.max_fanout <= red.fanout_for(n)


@given(st.sampled_from([n for n in reduction_names() if n not in ("subsample-path-st",)]), st.data())
@settings(max_examples=30, deadline=None)
def test_reduced_tape_space_gives_same_survival(name, data):
    red = get(name)
    n = red.src.arity + 2 if red.src.arity else 3
    g = data.draw(graphs(min_n=n, max_n=n, directed=red.src.directed))
    pins = tuple(range(red.src.arity))
    full = survival(red, g, pins, full_spec=True, limit=20_000)
    short = survival(red, g, pins, limit=20_000)
    if full["exact"] and short["exact"]:
        assert full["value"] == short["value"]


def test_composition_chain_sound():
    k = 4
    chain = [get("dircycle-s-leq-to-eq", k), get("dircycle-s-eq-to-cycle-s-eq", k), get("cycle-s-eq-to-leq", k)]
    rng = random.Random(3)
    corpus = [g for n in range(1, 5) for g in iso_graphs(n, True, 1)]
    pairs5 = [(u, v) for u in range(5) for v in range(5) if u != v]
    corpus += [make_graph(5, True, [p for p in pairs5 if rng.random() < 0.3]) for _ in range(150)]
    checked = 0
    for g in corpus:
        if decide_graph(g, chain[0].src, (0,)):
            continue
        for _ in range(2):
            frontier = [(g, (0,))]
            for red in chain:
                nxt = []
                for h, pins in frontier:
                    for i in range(len(red.stages)):
                        tape = random_tape(red, h.n, pins, rng.getrandbits(32), i)
                        nxt.append(derive_graph(red, h, pins, tape, i))
                frontier = nxt
            for h, pins in frontier:
                assert decide_graph(h, chain[-1].dst, pins) == 0
                checked += 1
    assert checked > 1000
