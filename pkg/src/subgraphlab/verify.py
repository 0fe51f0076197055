"""Machine checks for reductions: soundness, completeness, promise, fanout.

Soundness runs over every isomorphism class of small graphs (with the pinned
vertices held fixed) and over every tape when the tape space is small.
Completeness runs over planted YES instances and reports exact survival
fractions from full tape enumeration, or a Wilson interval when sampled.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from contextlib import contextmanager
from functools import lru_cache
from itertools import permutations
from typing import Iterable, Sequence

import numpy as np

from .graph import CountedOracle, Graph, ProblemTag, enumerate_tapes, fresh_tape, make_graph
from .oracles import MAX_K, MAX_N, GuardError, decide_rows, promise_holds_graph
from .reductions import ColorCode, Reduction, derive_graph

EXHAUSTIVE_LIMIT = 10**6
SAMPLED_TAPES = 10**4
WILSON_Z99 = 2.5758293035489004
UNDIRECTED_MAX = 6
DIRECTED_MAX = 5


# ---------------------------------------------------------------------------
# Isomorph-reduced corpus


def _pairs(n: int, directed: bool) -> list[tuple[int, int]]:
    if directed:
        return [(u, v) for u in range(n) for v in range(n) if u != v]
    return [(u, v) for u in range(n) for v in range(u + 1, n)]


@lru_cache(maxsize=None)
def iso_codes(n: int, directed: bool, arity: int) -> tuple[int, ...]:
    """Canonical edge codes, one per class under permutations fixing 0..arity-1.

    Bit i of a code is pair i of ``_pairs``; the canonical code is the
    minimum over the permutation group.
    """
    pairs = _pairs(n, directed)
    index = {p: i for i, p in enumerate(pairs)}
    codes = np.arange(1 << len(pairs), dtype=np.int64)
    best = codes.copy()
    free = list(range(arity, n))
    for perm in permutations(free):
        mapping = list(range(arity)) + list(perm)
        if mapping == list(range(n)):
            continue
        image = np.zeros_like(codes)
        for i, (u, v) in enumerate(pairs):
            a, b = mapping[u], mapping[v]
            if not directed and a > b:
                a, b = b, a
            image |= ((codes >> i) & 1) << index[(a, b)]
        np.minimum(best, image, out=best)
    return tuple(int(c) for c in np.unique(best))


def code_to_graph(code: int, n: int, directed: bool) -> Graph:
    pairs = _pairs(n, directed)
    return make_graph(n, directed, [p for i, p in enumerate(pairs) if code >> i & 1])


def iso_graphs(n: int, directed: bool, arity: int = 0) -> list[Graph]:
    return [code_to_graph(c, n, directed) for c in iso_codes(n, directed, arity)]


def soundness_corpus(directed: bool, arity: int, max_n: int | None = None) -> Iterable[Graph]:
    top = (DIRECTED_MAX if directed else UNDIRECTED_MAX) if max_n is None else max_n
    for n in range(max(arity, 1), top + 1):
        yield from iso_graphs(n, directed, arity)


# ---------------------------------------------------------------------------
# Reports


@dataclass
class VerificationReport:
    reduction: str
    label: str
    check: str
    corpus: str
    passed: bool
    soundness_violations: int = 0
    instances: int = 0
    tapes_checked: int = 0
    measured_survival: str | None = None  # exact fraction or empirical rate
    survival_float: float | None = None
    confidence_radius: float | None = None
    samples: int | None = None
    claimed: str | None = None
    claim_kind: str | None = None
    max_fanout_observed: int | None = None
    declared_fanout: int | None = None
    upfront_observed: int | None = None
    upfront_budget: int | None = None
    promise_violation_note: str | None = None
    details: list = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


def reports_to_json(reports: Sequence[VerificationReport]) -> str:
    return json.dumps([r.to_json() for r in reports], indent=2)


def reports_table(reports: Sequence[VerificationReport]) -> str:
    head = f"{'label':<6} {'reduction':<34} {'check':<12} {'ok':<4} {'viol':>5} {'inst':>7} {'tapes':>9}  survival/claim"
    lines = [head, "-" * len(head)]
    for r in reports:
        surv = ""
        if r.measured_survival is not None:
            surv = f"{r.measured_survival} >= {r.claimed}"
        elif r.max_fanout_observed is not None:
            surv = f"fanout {r.max_fanout_observed}/{r.declared_fanout}"
            if r.upfront_budget is not None:
                surv += f", upfront {r.upfront_observed}/{r.upfront_budget}"
        lines.append(
            f"{r.label:<6} {r.reduction:<34} {r.check:<12} {'yes' if r.passed else 'NO':<4} "
            f"{r.soundness_violations:>5} {r.instances:>7} {r.tapes_checked:>9}  {surv}"
        )
    return "\n".join(lines)


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z99) -> tuple[float, float]:
    if trials <= 0:
        raise ValueError("no trials")
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


# ---------------------------------------------------------------------------
# Shared helpers


def _check_guard(g: Graph, t: ProblemTag):
    if g.n > MAX_N or t.k > MAX_K:
        raise GuardError(f"corpus instance n={g.n}, k={t.k} exceeds the oracle guard")


def _tapes(spec, rng: random.Random, limit: int = EXHAUSTIVE_LIMIT, samples: int = SAMPLED_TAPES):
    """(iterator of tapes, count, exhaustive?)."""
    size = spec.size()
    if size <= limit:
        return enumerate_tapes(spec), size, True
    return (fresh_tape(rng.getrandbits(64), spec) for _ in range(samples)), samples, False


class _Decider:
    """Cached exact decisions for derived graphs."""

    def __init__(self):
        self.cache: dict = {}

    def __call__(self, g: Graph, t: ProblemTag, pins) -> int:
        key = (t, g.rows, g.directed, tuple(pins))
        hit = self.cache.get(key)
        if hit is None:
            _check_guard(g, t)
            hit = decide_rows(g.rows, g.n, t, pins)
            self.cache[key] = hit
        return hit


def is_no_instance(red: Reduction, g: Graph, pins) -> bool:
    """Source NO instance (promise-valid when the source carries a promise)."""
    src = red.src
    if decide_rows(g.rows, g.n, src, pins):
        return False
    if src.promise and not promise_holds_graph(g, src, pins):
        return False
    return True


# ---------------------------------------------------------------------------
# Soundness


def verify_soundness(
    red: Reduction,
    corpus: Iterable[Graph] | None = None,
    seed: int = 0,
    limit: int = EXHAUSTIVE_LIMIT,
    samples: int = SAMPLED_TAPES,
    max_n: int | None = None,
) -> VerificationReport:
    """Every NO instance must map to NO under every tape of every stage."""
    src = red.src
    pins = tuple(range(src.arity))
    if corpus is None:
        corpus = soundness_corpus(src.directed, src.arity, max_n)
        desc = f"iso-classes {'directed' if src.directed else 'undirected'} n<={max_n or (DIRECTED_MAX if src.directed else UNDIRECTED_MAX)}, {src.arity} pinned"
    else:
        desc = "custom"
    rng = random.Random(seed)
    decide = _Decider()
    violations = 0
    instances = tapes_checked = 0
    exhaustive = True
    details = []
    for g in corpus:
        _check_guard(g, src)
        if len(pins) > g.n or not is_no_instance(red, g, pins):
            continue
        instances += 1
        for i, st in enumerate(red.stages):
            spec = st.construction.enum_spec(g, pins)
            tapes, count, full = _tapes(spec, rng, limit, samples)
            exhaustive &= full
            tapes_checked += count
            for tape in tapes:
                dg, dpins = derive_graph(red, g, pins, tape, i)
                if decide(dg, st.dst, dpins):
                    violations += 1
                    if len(details) < 5:
                        details.append({"graph": g.to_text(), "stage": i, "tape": asdict(tape)})
    return VerificationReport(
        red.name,
        red.label,
        "soundness",
        desc + ("" if exhaustive else f"; tapes sampled ({samples}) where space > {limit}"),
        violations == 0,
        soundness_violations=violations,
        instances=instances,
        tapes_checked=tapes_checked,
        details=details,
    )


# ---------------------------------------------------------------------------
# Planted YES corpus


def _planted_core(t: ProblemTag) -> tuple[int, list[tuple[int, int]]]:
    """(vertex count, edges) of the target structure with pins 0 (and 1)."""
    k = t.k
    if t.family == "path":
        if t.restriction == "st":
            seq = [0] + list(range(2, k + 1)) + [1]
        else:
            seq = list(range(k + 1))
        return len(seq), list(zip(seq, seq[1:]))
    seq = list(range(k))
    return k, list(zip(seq, seq[1:] + seq[:1]))


def _shorter(t: ProblemTag) -> ProblemTag | None:
    if t.mode != "<=":
        return None
    low = 1 if t.family == "path" else 3
    return t.with_(mode="=", k=max(low, t.k - 1)) if t.k - 1 >= low else None


def _decoy_edges(t: ProblemTag, start: int) -> tuple[int, list[tuple[int, int]]]:
    """A wrong-length competitor on fresh vertices from ``start``.

    s-t paths get a second s-t route one longer; cycles through s a second
    cycle through s one longer; unrestricted cycles a disjoint longer cycle;
    unrestricted paths a disjoint shorter path.  Returns (new n, edges).
    """
    k = t.k
    if t.family == "path" and t.restriction == "st":
        seq = [0] + list(range(start, start + k)) + [1]
    elif t.family == "cycle" and t.restriction == "s":
        seq = [0] + list(range(start, start + k))
        seq.append(0)
    elif t.family == "cycle":
        seq = list(range(start, start + k + 1))
        seq.append(start)
    else:
        if k < 2:
            return start, []
        seq = list(range(start, start + k))
    return max(seq) + 1, list(zip(seq, seq[1:]))


def planted_corpus(t: ProblemTag) -> list[tuple[str, Graph]]:
    """Small YES instances of ``t``.

    Families: the bare structure, padding with isolated vertices, a pendant
    path, a chord between structure vertices two steps apart, and a
    wrong-length competitor (second route or disjoint decoy).
    """
    out = []
    base_tags = [t.with_(mode="=")]
    short = _shorter(t)
    if short is not None:
        base_tags.append(short)
    for bt in base_tags:
        n, edges = _planted_core(bt)
        name = f"len{bt.k}"
        out.append((f"{name}-bare", make_graph(n, t.directed, edges)))
        out.append((f"{name}-padded", make_graph(n + 2, t.directed, edges)))
        last = n - 1
        out.append((f"{name}-pendant", make_graph(n + 2, t.directed, edges + [(last, n), (n, n + 1)])))
        seq = [u for u, _ in edges] + [edges[-1][1]]
        inner = [v for v in seq if v >= t.arity]
        if len(inner) >= 3:
            a, b = inner[0], inner[2]
            if (a, b) not in edges and (b, a) not in edges:
                out.append((f"{name}-chord", make_graph(n, t.directed, edges + [(a, b)])))
        m, extra = _decoy_edges(bt, n)
        if extra:
            out.append((f"{name}-decoy", make_graph(m, t.directed, edges + extra)))
    result = []
    pins = tuple(range(t.arity))
    for label, g in out:
        if decide_rows(g.rows, g.n, t, pins):
            result.append((label, g))
    return result


def x5_counterexample(k: int = 4) -> Graph:
    """s-a-b-...-t with a chord s-b: every tape loses the s-t path."""
    n, edges = _planted_core(ProblemTag("path", False, True, "st", "=", k))
    seq = [0] + list(range(2, k + 1)) + [1]
    return make_graph(n, False, edges + [(0, seq[2])])


# ---------------------------------------------------------------------------
# Completeness


def survival(red: Reduction, g: Graph, pins=None, seed: int = 0, limit: int = EXHAUSTIVE_LIMIT,
             samples: int = SAMPLED_TAPES, full_spec: bool = False) -> dict:
    """Probability (over tapes) that some stage maps ``g`` to YES.

    Stages use independent tapes, so the combined value is 1 - prod(1 - p_i).
    Returns exact fractions when every stage was enumerated.
    """
    pins = tuple(range(red.src.arity)) if pins is None else tuple(pins)
    rng = random.Random(seed)
    decide = _Decider()
    miss_exact = Fraction(1)
    miss_float = 1.0
    exact = True
    total = 0
    stage_rates = []
    for i, st in enumerate(red.stages):
        con = st.construction
        spec = con.tape_spec(g.n, pins) if full_spec else con.enum_spec(g, pins)
        tapes, count, full = _tapes(spec, rng, limit, samples)
        hits = 0
        for tape in tapes:
            dg, dpins = derive_graph(red, g, pins, tape, i)
            hits += decide(dg, st.dst, dpins)
        total += count
        if full:
            p = Fraction(hits, count)
            miss_exact *= 1 - p
            stage_rates.append(str(p))
        else:
            exact = False
            lo, _ = wilson_interval(hits, count)
            stage_rates.append(f"{hits}/{count}")
            miss_float *= 1 - lo
    if exact:
        value = 1 - miss_exact
        return {"exact": True, "value": value, "lower": value, "tapes": total, "stages": stage_rates}
    lower = 1 - float(miss_exact) * miss_float
    return {"exact": False, "value": None, "lower": lower, "tapes": total, "stages": stage_rates}


def verify_completeness(red: Reduction, corpus: Sequence[tuple[str, Graph]] | None = None,
                        seed: int = 0) -> VerificationReport:
    src = red.src
    pins = tuple(range(src.arity))
    corpus = planted_corpus(src) if corpus is None else list(corpus)
    if not corpus:
        raise ValueError(f"no planted instances for {src}")
    worst_value = None
    worst_lower = None
    exact_all = True
    tapes = 0
    details = []
    for name, g in corpus:
        if not decide_rows(g.rows, g.n, src, pins):
            raise ValueError(f"planted instance {name} is not a YES instance of {src}")
        res = survival(red, g, pins, seed)
        tapes += res["tapes"]
        claimed = red.claimed_at(g.n)
        details.append({"instance": name, "n": g.n, "claimed": str(claimed), **{
            "survival": str(res["value"]) if res["exact"] else None,
            "lower": res["lower"] if not res["exact"] else float(res["value"]),
            "stages": res["stages"],
        }})
        lower = float(res["value"]) if res["exact"] else res["lower"]
        if worst_lower is None or lower < worst_lower:
            worst_lower = lower
            worst_value = res["value"]
        exact_all &= res["exact"]
    ok = True
    for d, (name, g) in zip(details, corpus):
        claimed = red.claimed_at(g.n)
        if d["survival"] is not None:
            ok &= Fraction(d["survival"]) >= claimed
        else:
            ok &= d["lower"] >= float(claimed)
    return VerificationReport(
        red.name,
        red.label,
        "completeness",
        f"planted {src}: {', '.join(n for n, _ in corpus)}",
        ok,
        instances=len(corpus),
        tapes_checked=tapes,
        measured_survival=str(worst_value) if exact_all else f"{worst_lower:.4f}",
        survival_float=worst_lower,
        claimed=str(red.claimed_at(max(g.n for _, g in corpus))) if not callable(red.claimed) else "hypergeometric",
        claim_kind=red.claim_kind,
        details=details,
    )


# ---------------------------------------------------------------------------
# Promise preservation


def verify_promise(red: Reduction, no_corpus: Iterable[Graph] | None = None,
                   yes_corpus: Sequence[tuple[str, Graph]] | None = None, seed: int = 0,
                   max_n: int = 5) -> VerificationReport:
    """NO bases must give promise-valid NO; YES bases are scored by promise-valid YES tapes."""
    src = red.src
    pins = tuple(range(src.arity))
    rng = random.Random(seed)
    if no_corpus is None:
        top = min(max_n, DIRECTED_MAX if src.directed else UNDIRECTED_MAX)
        no_corpus = soundness_corpus(src.directed, src.arity, top)
    yes_corpus = planted_corpus(src) if yes_corpus is None else yes_corpus
    bad_no = 0
    instances = tapes_checked = 0
    for g in no_corpus:
        if len(pins) > g.n or not is_no_instance(red, g, pins):
            continue
        instances += 1
        for i, st in enumerate(red.stages):
            tapes, count, _ = _tapes(st.construction.enum_spec(g, pins), rng)
            tapes_checked += count
            for tape in tapes:
                dg, dpins = derive_graph(red, g, pins, tape, i)
                if decide_rows(dg.rows, dg.n, st.dst, dpins):
                    bad_no += 1
                elif st.dst.promise and not promise_holds_graph(dg, st.dst, dpins):
                    bad_no += 1
    ok = bad_no == 0
    details = []
    worst = None
    for name, g in yes_corpus:
        good = broken = total = 0
        miss = Fraction(1)
        for i, st in enumerate(red.stages):
            tapes, count, _ = _tapes(st.construction.enum_spec(g, pins), rng)
            hits = 0
            for tape in tapes:
                dg, dpins = derive_graph(red, g, pins, tape, i)
                valid = (not st.dst.promise) or promise_holds_graph(dg, st.dst, dpins)
                yes = decide_rows(dg.rows, dg.n, st.dst, dpins)
                if not valid:
                    broken += 1
                elif yes:
                    hits += 1
            good += hits
            total += count
            miss *= 1 - Fraction(hits, count)
        rate = 1 - miss
        tapes_checked += total
        details.append({"instance": name, "valid_yes": str(rate), "promise_violating_tapes": broken, "tapes": total})
        ok &= rate >= red.claimed_at(g.n)
        worst = rate if worst is None or rate < worst else worst
    note = None
    total_broken = sum(d["promise_violating_tapes"] for d in details)
    if total_broken:
        note = f"{total_broken} tapes gave promise-violating derived YES-side instances"
    return VerificationReport(
        red.name,
        red.label,
        "promise",
        f"NO: iso-classes n<={max_n}; YES: planted {src}",
        ok,
        soundness_violations=bad_no,
        instances=instances + len(yes_corpus),
        tapes_checked=tapes_checked,
        measured_survival=None if worst is None else str(worst),
        survival_float=None if worst is None else float(worst),
        claimed=str(red.claimed_at(8)) if not callable(red.claimed) else "hypergeometric",
        claim_kind=red.claim_kind,
        promise_violation_note=note,
        details=details,
    )


# ---------------------------------------------------------------------------
# Query efficiency and route agreement


def fanout_corpus(directed: bool, arity: int, count: int = 12, n: int = 7, seed: int = 0) -> list[Graph]:
    rng = random.Random(seed)
    out = []
    for i in range(count):
        p = [0.15, 0.3, 0.5, 0.8][i % 4]
        pairs = _pairs(n, directed)
        out.append(make_graph(n, directed, [e for e in pairs if rng.random() < p]))
    return out


def verify_fanout(red: Reduction, corpus: Sequence[Graph] | None = None, tapes_per_graph: int = 3,
                  seed: int = 0) -> VerificationReport:
    """Materialize lazy views; audit per-query fanout, upfront cost, and agreement with derive."""
    src = red.src
    pins = tuple(range(src.arity))
    corpus = fanout_corpus(src.directed, src.arity, seed=seed) if corpus is None else corpus
    rng = random.Random(seed)
    worst = 0
    upfront = 0
    budget = None
    mismatches = 0
    checked = 0
    declared = 0
    for g in corpus:
        for i, st in enumerate(red.stages):
            con = st.construction
            for _ in range(tapes_per_graph):
                tape = fresh_tape(rng.getrandbits(64), con.tape_spec(g.n, pins))
                base = CountedOracle.from_graph(g)
                view, vpins = con.view(base, pins, tape)
                lazy = view.materialize()
                direct, dpins = derive_graph(red, g, pins, tape, i)
                if lazy != direct or tuple(vpins) != tuple(dpins):
                    mismatches += 1
                worst = max(worst, view.max_fanout)
                declared = max(declared, view.fanout_bound)
                if view.upfront_budget is not None:
                    upfront = max(upfront, view.upfront)
                    budget = view.upfront_budget
                checked += 1
    eager = budget is not None
    n = corpus[0].n if corpus else 0
    ok = mismatches == 0 and worst <= declared
    if eager:
        ok &= upfront <= budget and budget in (n, 2 * n)
    else:
        ok &= declared <= 3
    return VerificationReport(
        red.name,
        red.label,
        "fanout",
        f"{len(corpus)} random graphs n={n}, {tapes_per_graph} tapes each",
        ok,
        soundness_violations=mismatches,
        instances=len(corpus),
        tapes_checked=checked,
        max_fanout_observed=worst,
        declared_fanout=declared,
        upfront_observed=upfront if eager else None,
        upfront_budget=budget,
        promise_violation_note=None if not mismatches else f"{mismatches} lazy/direct mismatches",
    )


def verify_all(reds: Sequence[Reduction], checks: Sequence[str] = ("soundness", "completeness", "promise", "fanout"),
               seed: int = 0, max_n: int | None = None) -> list[VerificationReport]:
    out = []
    for red in reds:
        if "soundness" in checks:
            out.append(verify_soundness(red, seed=seed, max_n=max_n))
        if "completeness" in checks:
            out.append(verify_completeness(red, seed=seed))
        if "promise" in checks and (red.src.promise or red.dst.promise):
            out.append(verify_promise(red, seed=seed, max_n=min(max_n or 5, 5)))
        if "fanout" in checks:
            out.append(verify_fanout(red, seed=seed))
    return out


MUTATIONS = ("color-check",)


@contextmanager
def mutation(name: str):
    """Temporarily break a construction so the harness can prove it notices.

    ``color-check``: colour coding keeps every edge regardless of colours.
    """
    if name not in MUTATIONS:
        raise ValueError(f"unknown mutation {name!r}; choose from {MUTATIONS}")
    saved = ColorCode.coded_rows, ColorCode.arc_ok
    ColorCode.coded_rows = lambda self, g, colors: list(g.rows)
    ColorCode.arc_ok = lambda self, colors, u, v: True
    try:
        yield
    finally:
        ColorCode.coded_rows, ColorCode.arc_ok = saved
