"""Brute-force deciders, finders and promise checks for path/cycle problems.

These are meant to be obviously correct rather than fast: depth-first search
over simple paths with a visited bitmask.  Cycles have length >= 3; a pair
of opposite arcs is never a cycle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .graph import Graph, ProblemInstance, ProblemTag, bits, tag

MAX_N = 32
MAX_K = 9


class GuardError(ValueError):
    """Instance too large for exhaustive search."""


@dataclass(frozen=True)
class Witness:
    kind: str  # "path", "cycle" or "none"
    vertices: tuple[int, ...] = ()

    def __bool__(self) -> bool:
        return self.kind != "none"

    def to_json(self) -> dict:
        return {"kind": self.kind, "vertices": list(self.vertices)}


NONE = Witness("none")


def _guard(n: int, k: int):
    if n > MAX_N:
        raise GuardError(f"n = {n} exceeds the exhaustive-search guard {MAX_N}")
    if k > MAX_K:
        raise GuardError(f"k = {k} exceeds the exhaustive-search guard {MAX_K}")


# ---------------------------------------------------------------------------
# Search primitives on adjacency rows


def _extend(rows, v, visited, steps, allowed, goal, closing=False):
    """Simple path of exactly ``steps`` more arcs from v, ending in ``goal``.

    Intermediate vertices come from ``allowed`` and avoid ``visited``.  With
    ``closing`` the goal may be an already visited vertex (the cycle start).
    Returns the tail (excluding v) or None.
    """
    if steps == 1:
        hit = rows[v] & goal
        if not closing:
            hit &= ~visited
        if hit:
            return [(hit & -hit).bit_length() - 1]
        return None
    nxt = rows[v] & allowed & ~visited
    while nxt:
        low = nxt & -nxt
        w = low.bit_length() - 1
        nxt ^= low
        tail = _extend(rows, w, visited | low, steps - 1, allowed, goal, closing)
        if tail is not None:
            return [w] + tail
    return None


def st_path(rows, n: int, s: int, t: int, length: int):
    """Simple s->t path with exactly ``length`` arcs, as a vertex list."""
    full = (1 << n) - 1
    allowed = full & ~(1 << s) & ~(1 << t)
    tail = _extend(rows, s, 1 << s, length, allowed, 1 << t)
    return None if tail is None else [s] + tail


def any_path(rows, n: int, length: int):
    full = (1 << n) - 1
    for v in range(n):
        if length == 0:
            return [v]
        tail = _extend(rows, v, 1 << v, length, full, full)
        if tail is not None:
            return [v] + tail
    return None


def cycle_through(rows, n: int, s: int, length: int, allowed: int | None = None):
    """Cycle of exactly ``length`` arcs through s (vertex list starting at s)."""
    if length < 3:
        return None
    full = (1 << n) - 1 if allowed is None else allowed
    inner = full & ~(1 << s)
    tail = _extend(rows, s, 1 << s, length, inner, 1 << s, closing=True)
    if tail is None:
        return None
    return [s] + tail[:-1]


def any_cycle(rows, n: int, length: int):
    for v in range(n):
        above = ((1 << n) - 1) & ~((1 << v) - 1)  # vertices >= v
        cyc = cycle_through(rows, n, v, length, above)
        if cyc is not None:
            return cyc
    return None


def reach(rows, start: int, allowed: int) -> int:
    """Bitmask of vertices reachable from ``start`` inside ``allowed`` (inclusive)."""
    seen = 1 << start
    frontier = seen
    while frontier:
        nxt = 0
        for v in bits(frontier):
            nxt |= rows[v]
        nxt &= allowed & ~seen
        seen |= nxt
        frontier = nxt
    return seen


# ---------------------------------------------------------------------------
# Problem-level API on raw graphs


def _lengths(t: ProblemTag) -> range:
    low = 1 if t.family == "path" else 3
    return range(t.k, t.k + 1) if t.mode == "=" else range(low, t.k + 1)


def find_exact(rows, n: int, t: ProblemTag, pinned: Sequence[int], length: int):
    if t.family == "path":
        if t.restriction == "st":
            return st_path(rows, n, pinned[0], pinned[1], length)
        return any_path(rows, n, length)
    if t.restriction == "s":
        return cycle_through(rows, n, pinned[0], length)
    return any_cycle(rows, n, length)


def find_graph(g: Graph, problem, pinned: Sequence[int] = ()) -> Witness:
    t = tag(problem)
    _guard(g.n, t.k)
    if len(pinned) != t.arity:
        raise ValueError(f"{t} needs {t.arity} pinned vertices")
    if g.directed != t.directed:
        raise ValueError(f"{t} does not match graph directedness")
    for length in _lengths(t):
        found = find_exact(g.rows, g.n, t, pinned, length)
        if found is not None:
            return Witness(t.family, tuple(found))
    return NONE


def decide_graph(g: Graph, problem, pinned: Sequence[int] = ()) -> int:
    return int(bool(find_graph(g, problem, pinned)))


def decide_rows(rows, n: int, t: ProblemTag, pinned: Sequence[int] = ()) -> int:
    """Unchecked fast path of decide_graph for trusted callers."""
    for length in _lengths(t):
        if find_exact(rows, n, t, pinned, length) is not None:
            return 1
    return 0


def decide(inst: ProblemInstance) -> int:
    _guard(inst.oracle.n, inst.k)
    return decide_graph(inst.oracle.materialize(), inst.tag, inst.pinned)


def find(inst: ProblemInstance) -> Witness:
    _guard(inst.oracle.n, inst.k)
    return find_graph(inst.oracle.materialize(), inst.tag, inst.pinned)


def witness_valid(g: Graph, problem, pinned: Sequence[int], w: Witness) -> bool:
    t = tag(problem)
    vs = list(w.vertices)
    if w.kind != t.family or len(set(vs)) != len(vs):
        return False
    if any(not 0 <= v < g.n for v in vs):
        return False
    if t.family == "path":
        length = len(vs) - 1
        if t.restriction == "st" and (vs[0], vs[-1]) != (pinned[0], pinned[1]):
            return False
        pairs = zip(vs, vs[1:])
    else:
        length = len(vs)
        if length < 3:
            return False
        if t.restriction == "s" and pinned[0] not in vs:
            return False
        pairs = zip(vs, vs[1:] + vs[:1])
    if length not in _lengths(t):
        return False
    return all(g.has_edge(u, v) for u, v in pairs)


# ---------------------------------------------------------------------------
# Promises


def has_any_cycle_through(g: Graph, s: int) -> bool:
    """Is there a cycle (length >= 3) through s, of any length?"""
    rows, n = g.rows, g.n
    rest = ((1 << n) - 1) & ~(1 << s)
    if not g.directed:
        nbrs = list(bits(rows[s]))
        for i, u in enumerate(nbrs):
            comp = reach(rows, u, rest)
            if any(comp >> w & 1 for w in nbrs[i + 1 :]):
                return True
        return False
    ins = g.in_rows()[s]
    for u in bits(rows[s]):
        comp = reach(rows, u, rest)
        if comp & ins & ~(1 << u):
            return True
    return False


def has_any_cycle(g: Graph) -> bool:
    return any(has_any_cycle_through(g, v) for v in range(g.n))


def promise_holds_graph(g: Graph, problem, pinned: Sequence[int] = ()) -> int:
    t = tag(problem)
    if not t.promise:
        raise ValueError(f"{t} carries no promise")
    _guard(g.n, t.k)
    plain = t.with_(promise=False)
    if t.family == "path":
        s, tt = pinned
        connected = reach(g.rows, s, (1 << g.n) - 1) >> tt & 1
        trigger = bool(connected)
    elif t.restriction == "s":
        trigger = has_any_cycle_through(g, pinned[0])
    else:
        trigger = has_any_cycle(g)
    if not trigger:
        return 1
    return decide_graph(g, plain, pinned)


def promise_holds(inst: ProblemInstance) -> int:
    return promise_holds_graph(inst.oracle.materialize(), inst.tag, inst.pinned)


# ---------------------------------------------------------------------------
# Graph collision


@dataclass
class GCInstance:
    G: Graph
    x: tuple[int, ...]
    queries: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.G.directed:
            raise ValueError("graph collision needs an undirected graph")
        self.x = tuple(int(b) for b in self.x)
        if len(self.x) != self.G.n:
            raise ValueError(f"x has {len(self.x)} bits for {self.G.n} vertices")

    def bit(self, v: int) -> int:
        self.queries += 1
        return self.x[v]


def graph_collision(inst: GCInstance) -> int:
    return int(any(inst.x[u] and inst.x[v] for u, v in inst.G.edges()))


def or_bits(xs: Sequence[Sequence[int]], n: int) -> tuple[int, ...]:
    if len(xs) != n or any(len(x) != n for x in xs):
        raise ValueError(f"need {n} strings of {n} bits")
    return tuple(int(any(x)) for x in xs)


def gc_or(G: Graph, xs: Sequence[Sequence[int]]) -> int:
    return graph_collision(GCInstance(G, or_bits(xs, G.n)))
