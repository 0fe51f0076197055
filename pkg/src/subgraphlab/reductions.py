"""Randomized instance transformers between path and cycle problems.

Every construction is a deterministic function of (base graph, tape) and is
available two ways: ``derive`` builds the derived graph from the base
adjacency rows in one pass, and ``view`` wraps a base oracle in a lazy
CountedOracle whose answers query the base on demand.  Tests check that the
two routes agree.

Vertex numbering of derived graphs: base vertices keep their indices (some
become isolated); fresh vertices are appended above n in this order:
layer copies (vertex v's j-th copy is n + v*t + j - 1), then endpoint
vertices (s then t), then contraction vertices (r then b), then a fresh
pinned vertex s'.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Callable, Sequence

from .graph import (
    ColoringTape,
    CountedOracle,
    Graph,
    ProblemInstance,
    ProblemTag,
    TapeSpec,
    bits,
    fresh_tape,
    make_graph,
    tag,
)

NO_COLOR = -1  # sentinel for vertices that cannot take part in any structure

RED, YELLOW, BLUE = 0, 1, 2


class ReductionError(ValueError):
    pass


def _masks(colors: Sequence[int], n: int) -> dict[int, int]:
    cm: dict[int, int] = {}
    for v in range(n):
        cm[colors[v]] = cm.get(colors[v], 0) | (1 << v)
    return cm


def _symmetrize(rows: list[int]) -> list[int]:
    out = list(rows)
    for u, row in enumerate(rows):
        for v in bits(row):
            out[v] |= 1 << u
    return out


def _isolated(g: Graph) -> list[bool]:
    ins = g.in_rows()
    return [g.rows[v] == 0 and ins[v] == 0 for v in range(g.n)]


def _fix_isolated_colors(spec: TapeSpec, g: Graph) -> TapeSpec:
    iso = _isolated(g)
    colors = tuple(
        (opts[0],) if v < len(iso) and iso[v] else opts for v, opts in enumerate(spec.colors)
    )
    return TapeSpec(colors, spec.groups, spec.flips, spec.fixed_flips)


# ---------------------------------------------------------------------------
# Coloring rules


class PathRule:
    """Layered coloring: s gets 0, t gets k, free vertices [1, k-1]."""

    def __init__(self, k: int):
        if k < 1:
            raise ReductionError("path coloring needs k >= 1")
        self.k = k

    def pin_colors(self, pins) -> dict[int, int]:
        s, t = pins
        return {s: 0, t: self.k}

    def palette(self) -> tuple[int, ...]:
        return tuple(range(1, self.k)) or (NO_COLOR,)

    def next(self, c: int):
        return c + 1 if 0 <= c < self.k else None

    def prev(self, c: int):
        return c - 1 if 0 < c <= self.k else None

    def __repr__(self):
        return f"PathRule({self.k})"


class CyclicRule:
    """Colors mod l; with ``through_s`` the pinned s is the only color 0."""

    def __init__(self, ell: int, through_s: bool = False):
        if ell < 3:
            raise ReductionError("cyclic coloring needs l >= 3")
        self.ell = ell
        self.through_s = through_s

    def pin_colors(self, pins) -> dict[int, int]:
        return {pins[0]: 0} if self.through_s else {}

    def palette(self) -> tuple[int, ...]:
        return tuple(range(1, self.ell)) if self.through_s else tuple(range(self.ell))

    def next(self, c: int):
        return (c + 1) % self.ell

    def prev(self, c: int):
        return (c - 1) % self.ell

    def __repr__(self):
        return f"CyclicRule({self.ell}, through_s={self.through_s})"


# ---------------------------------------------------------------------------
# Constructions


class Construction:
    """One transformer stage.  Subclasses fill in the hooks below."""

    name = "construction"
    fanout = 1
    needs_directed: bool | None = None  # required input directedness
    isolated_irrelevant = True  # colors of isolated base vertices never matter

    def out_n(self, n: int) -> int:
        return n

    def out_directed(self, directed: bool) -> bool:
        return directed

    def out_pins(self, n: int, pins: tuple[int, ...]) -> tuple[int, ...]:
        return pins

    def eager_budget(self, n: int) -> int | None:
        return None

    def tape_spec(self, n: int, pins: tuple[int, ...]) -> TapeSpec:
        return TapeSpec()

    def enum_spec(self, g: Graph, pins: tuple[int, ...]) -> TapeSpec:
        """Tape spec with coordinates that cannot affect the result pinned."""
        spec = self.tape_spec(g.n, pins)
        return _fix_isolated_colors(spec, g) if self.isolated_irrelevant else spec

    def check_input(self, directed: bool):
        if self.needs_directed is not None and directed != self.needs_directed:
            want = "directed" if self.needs_directed else "undirected"
            raise ReductionError(f"{self.name} needs a {want} input")

    def derive(self, g: Graph, pins, tape: ColoringTape) -> Graph:
        raise NotImplementedError

    def learn(self, q, n: int, directed: bool, pins, tape):
        return None

    def edge(self, ctx, q, n: int, directed: bool, pins, tape, u: int, v: int) -> int:
        raise NotImplementedError

    def view(self, base: CountedOracle, pins, tape: ColoringTape) -> tuple[CountedOracle, tuple]:
        self.check_input(base.directed)
        n, directed = base.n, base.directed
        pins = tuple(pins)
        out = CountedOracle(
            self.out_n(n),
            self.out_directed(directed),
            answer=lambda u, v: 0,
            bases=[base],
            fanout_bound=self.fanout_for(n),
            name=self.name,
        )
        ctx = None
        budget = self.eager_budget(n)
        if budget is not None:
            ctx = out.charge_upfront(lambda: self.learn(base.query, n, directed, pins, tape), budget)
        q = base.query
        out._answer = lambda u, v: self.edge(ctx, q, n, directed, pins, tape, u, v)
        return out, self.out_pins(n, pins)

    def fanout_for(self, n: int) -> int:
        return self.fanout

    def __repr__(self):
        return self.name


class Identity(Construction):
    name = "identity"

    def derive(self, g, pins, tape):
        return g

    def edge(self, ctx, q, n, directed, pins, tape, u, v):
        return q(u, v)


class ForgetDirections(Construction):
    """Undirected edge wherever either arc is present."""

    name = "forget_directions"
    fanout = 2
    needs_directed = True

    def out_directed(self, directed):
        return False

    def derive(self, g, pins, tape):
        return Graph(g.n, False, tuple(_symmetrize(list(g.rows))))

    def edge(self, ctx, q, n, directed, pins, tape, u, v):
        return int(q(u, v) or q(v, u))


class ColorCode(Construction):
    """Keep edges between color-consecutive endpoints.

    Directed input keeps (u, v) with c(v) = next(c(u)); undirected input keeps
    {u, v} with c(v) in {next(c(u)), prev(c(u))}.  ``forget`` turns the
    directed result into an undirected graph.
    """

    def __init__(self, rule, forget: bool = False, drop_pins: bool = False):
        self.rule = rule
        self.forget = forget
        self.drop_pins = drop_pins
        self.name = f"color_code[{rule!r}{', forget' if forget else ''}]"
        self.fanout = 1
        if forget:
            self.needs_directed = True

    def out_directed(self, directed):
        return False if self.forget else directed

    def out_pins(self, n, pins):
        return () if self.drop_pins else pins

    def tape_spec(self, n, pins):
        pinned = self.rule.pin_colors(pins)
        pal = self.rule.palette()
        return TapeSpec(colors=tuple((pinned[v],) if v in pinned else pal for v in range(n)))

    def coded_rows(self, g: Graph, colors) -> list[int]:
        cm = _masks(colors, g.n)
        rule = self.rule
        out = []
        for u in range(g.n):
            c = colors[u]
            nxt = rule.next(c) if c != NO_COLOR else None
            keep = cm.get(nxt, 0) if nxt is not None else 0
            if not g.directed:
                prv = rule.prev(c) if c != NO_COLOR else None
                keep |= cm.get(prv, 0) if prv is not None else 0
            out.append(g.rows[u] & keep)
        return out

    def derive(self, g, pins, tape):
        rows = self.coded_rows(g, tape.colors)
        if self.forget:
            return Graph(g.n, False, tuple(_symmetrize(rows)))
        return Graph(g.n, g.directed, tuple(rows))

    def arc_ok(self, colors, u, v) -> bool:
        cu = colors[u]
        return cu != NO_COLOR and colors[v] != NO_COLOR and self.rule.next(cu) == colors[v]

    def edge(self, ctx, q, n, directed, pins, tape, u, v):
        c = tape.colors
        if self.forget:
            if self.arc_ok(c, u, v):
                return q(u, v)
            if self.arc_ok(c, v, u):
                return q(v, u)
            return 0
        if directed:
            return q(u, v) if self.arc_ok(c, u, v) else 0
        if self.arc_ok(c, u, v) or self.arc_ok(c, v, u):
            return q(u, v)
        return 0


class InsertLayers(Construction):
    """Color-code, then stretch every vertex of color i* into a chain.

    A vertex v with c(v) = i* becomes v, v_1, ..., v_t; edges from v to
    color next(i*) are re-rooted at v_t, so every path or cycle crossing from
    color i* to color next(i*) gets exactly t longer.
    """

    def __init__(self, rule, istar: int, t: int):
        if t < 1:
            raise ReductionError("layer insertion needs t >= 1 copies")
        self.rule = rule
        self.istar = istar
        self.t = t
        self.coder = ColorCode(rule)
        palette = set(rule.palette()) | set(rule.pin_colors((0, 1)).values())
        if isinstance(rule, CyclicRule):
            valid = range(1, rule.ell)
        else:
            valid = range(0, rule.k)
        if istar not in valid or istar not in palette:
            raise ReductionError(f"color {istar} cannot be expanded under {rule!r}")
        self.name = f"insert_layers[{rule!r}, i*={istar}, t={t}]"

    def out_n(self, n):
        return n + n * self.t

    def copy(self, n: int, v: int, j: int) -> int:
        return n + v * self.t + (j - 1)

    def tape_spec(self, n, pins):
        return self.coder.tape_spec(n, pins)

    def derive(self, g, pins, tape):
        n, t, istar = g.n, self.t, self.istar
        colors = tape.colors
        base = self.coder.coded_rows(g, colors)
        rows = base + [0] * (n * t)
        nxt_mask = _masks(colors, n).get(self.rule.next(istar), 0)
        for v in range(n):
            if colors[v] != istar:
                continue
            moved = base[v] & nxt_mask
            first, last = self.copy(n, v, 1), self.copy(n, v, t)
            rows[v] = (rows[v] & ~moved) | (1 << first)
            for j in range(1, t):
                rows[self.copy(n, v, j)] |= 1 << self.copy(n, v, j + 1)
            rows[last] |= moved
            if not g.directed:
                rows[first] |= 1 << v
                for j in range(2, t + 1):
                    rows[self.copy(n, v, j)] |= 1 << self.copy(n, v, j - 1)
                for w in bits(moved):
                    rows[w] = (rows[w] & ~(1 << v)) | (1 << last)
        return Graph(n + n * t, g.directed, tuple(rows))

    def edge(self, ctx, q, n, directed, pins, tape, u, v):
        c, t, istar = tape.colors, self.t, self.istar
        nxt = self.rule.next(istar)

        def origin(x):
            return (x, 0) if x < n else ((x - n) // t, (x - n) % t + 1)

        (a, i), (b, j) = origin(u), origin(v)
        if i == 0 and j == 0:
            if directed and c[a] == istar:
                return 0
            if not directed and ((c[a] == istar and c[b] == nxt) or (c[b] == istar and c[a] == nxt)):
                return 0
            return self.coder.edge(None, q, n, directed, pins, tape, a, b)
        if directed:
            if i == 0:
                return int(a == b and j == 1 and c[a] == istar)
            if j > 0:
                return int(a == b and j == i + 1 and c[a] == istar)
            if c[a] != istar or i != t or c[b] != nxt:
                return 0
            return q(a, b)
        if i > 0 and j > 0:
            return int(a == b and abs(i - j) == 1 and c[a] == istar)
        if i > 0:
            (a, i), (b, j) = (b, j), (a, i)
        # now a is a base vertex and (b, j) a copy
        if c[b] != istar:
            return 0
        if a == b:
            return int(j == 1)
        if j != t or c[a] != nxt:
            return 0
        return q(a, b)


class AttachEndpoints(Construction):
    """Unrestricted directed path of length k' to an s-t path of length k'+2."""

    name = "attach_endpoints"
    needs_directed = True

    def __init__(self, kp: int):
        if kp < 1:
            raise ReductionError("attach_endpoints needs k' >= 1")
        self.kp = kp
        self.name = f"attach_endpoints[k'={kp}]"

    def out_n(self, n):
        return n + 2

    def out_pins(self, n, pins):
        return (n, n + 1)

    def tape_spec(self, n, pins):
        pal = tuple(range(1, self.kp + 2))
        return TapeSpec(colors=(pal,) * n)

    def derive(self, g, pins, tape):
        n, c = g.n, tape.colors
        cm = _masks(c, n)
        rows = [g.rows[u] & cm.get(c[u] + 1, 0) for u in range(n)]
        last = self.kp + 1
        rows = [r | (1 << (n + 1)) if c[u] == last else r for u, r in enumerate(rows)]
        rows += [cm.get(1, 0), 0]
        return Graph(n + 2, True, tuple(rows))

    def edge(self, ctx, q, n, directed, pins, tape, u, v):
        c = tape.colors
        s, t = n, n + 1
        if u == s:
            return int(v < n and c[v] == 1)
        if v == t:
            return int(u < n and c[u] == self.kp + 1)
        if u >= n or v >= n:
            return 0
        return q(u, v) if c[v] == c[u] + 1 else 0


class StripEndpoints(Construction):
    """s-t path of length k to an unrestricted path of length k-2 on V - {s,t}.

    An arc survives when it is color-consecutive, its color-1 tail is an
    out-neighbour of s, and its color-(k-1) head is an in-neighbour of t.
    s and t stay in the vertex set as isolated vertices.
    """

    fanout = 3
    needs_directed = True

    def __init__(self, k: int):
        if k < 3:
            raise ReductionError("strip_endpoints needs k >= 3")
        self.k = k
        self.name = f"strip_endpoints[k={k}]"

    def out_pins(self, n, pins):
        return ()

    def tape_spec(self, n, pins):
        s, t = pins
        pal = tuple(range(1, self.k))
        return TapeSpec(colors=tuple((0,) if v == s else (self.k,) if v == t else pal for v in range(n)))

    def derive(self, g, pins, tape):
        s, t = pins
        n, c, k = g.n, tape.colors, self.k
        ins_t = g.in_rows()[t]
        cm = _masks(c, n)
        ends = ~((1 << s) | (1 << t))
        rows = []
        for u in range(n):
            if u in (s, t) or (c[u] == 1 and not g.rows[s] >> u & 1):
                rows.append(0)
                continue
            keep = cm.get(c[u] + 1, 0) & ends
            if c[u] + 1 == k - 1:
                keep &= ins_t
            rows.append(g.rows[u] & keep)
        return Graph(n, True, tuple(rows))

    def edge(self, ctx, q, n, directed, pins, tape, u, v):
        s, t = pins
        c, k = tape.colors, self.k
        if {u, v} & {s, t} or c[v] != c[u] + 1:
            return 0
        if c[u] == 1 and not q(s, u):
            return 0
        if c[v] == k - 1 and not q(v, t):
            return 0
        return q(u, v)


class RandomizeDirections(Construction):
    """Orient each undirected edge by one tape bit (0: low -> high index)."""

    name = "randomize_directions"
    needs_directed = False
    isolated_irrelevant = False

    def out_directed(self, directed):
        return True

    @staticmethod
    def slot(n: int, u: int, v: int) -> int:
        a, b = min(u, v), max(u, v)
        return a * (2 * n - a - 1) // 2 + (b - a - 1)

    def tape_spec(self, n, pins):
        return TapeSpec(flips=n * (n - 1) // 2)

    def enum_spec(self, g, pins):
        n = g.n
        absent = tuple(
            self.slot(n, u, v) for u in range(n) for v in range(u + 1, n) if not g.rows[u] >> v & 1
        )
        return TapeSpec(flips=n * (n - 1) // 2, fixed_flips=absent)

    def derive(self, g, pins, tape):
        n = g.n
        rows = [0] * n
        for u, v in g.edges():
            if tape.flips[self.slot(n, u, v)]:
                rows[v] |= 1 << u
            else:
                rows[u] |= 1 << v
        return Graph(n, True, tuple(rows))

    def edge(self, ctx, q, n, directed, pins, tape, u, v):
        bit = tape.flips[self.slot(n, u, v)]
        forward = u < v
        if forward != (bit == 0):
            return 0
        return q(u, v)


class SplitDirected(Construction):
    """Fresh t = n takes over every in-arc of s.  Deterministic."""

    name = "split_s_directed"
    needs_directed = True

    def out_n(self, n):
        return n + 1

    def out_pins(self, n, pins):
        return (pins[0], n)

    def derive(self, g, pins, tape):
        s, n = pins[0], g.n
        rows = []
        for u in range(n):
            r = g.rows[u]
            if r >> s & 1:
                r = (r & ~(1 << s)) | (1 << n)
            rows.append(r)
        return Graph(n + 1, True, tuple(rows + [0]))

    def edge(self, ctx, q, n, directed, pins, tape, u, v):
        s, t = pins[0], n
        if u == t or v == s:
            return 0
        if v == t:
            return 0 if u == s else q(u, s)
        return q(u, v)


class SplitUndirected(Construction):
    """Fresh t = n; each edge {s, v} stays at s (bit 0) or moves to t (bit 1)."""

    name = "split_s_undirected"
    needs_directed = False
    isolated_irrelevant = False

    def out_n(self, n):
        return n + 1

    def out_pins(self, n, pins):
        return (pins[0], n)

    def tape_spec(self, n, pins):
        return TapeSpec(flips=n, fixed_flips=(pins[0],))

    def enum_spec(self, g, pins):
        s = pins[0]
        fixed = tuple(v for v in range(g.n) if v == s or not g.rows[s] >> v & 1)
        return TapeSpec(flips=g.n, fixed_flips=fixed)

    def derive(self, g, pins, tape):
        s, n = pins[0], g.n
        rows = list(g.rows) + [0]
        for v in bits(g.rows[s]):
            if tape.flips[v]:
                rows[s] &= ~(1 << v)
                rows[v] = (rows[v] & ~(1 << s)) | (1 << n)
                rows[n] |= 1 << v
        return Graph(n + 1, False, tuple(rows))

    def edge(self, ctx, q, n, directed, pins, tape, u, v):
        s, t = pins[0], n
        if t in (u, v):
            w = v if u == t else u
            return 0 if w == s or not tape.flips[w] else q(s, w)
        if s in (u, v):
            w = v if u == s else u
            return 0 if tape.flips[w] else q(s, w)
        return q(u, v)


class MergeST(Construction):
    """Layered coloring (s = 0, t = k), then fuse t into s.

    Arcs into t become arcs into s; t is left isolated.
    """

    needs_directed = True

    def __init__(self, k: int):
        self.k = k
        self.rule = PathRule(k)
        self.name = f"merge_st[k={k}]"

    def out_pins(self, n, pins):
        return (pins[0],)

    def tape_spec(self, n, pins):
        return ColorCode(self.rule).tape_spec(n, pins)

    def derive(self, g, pins, tape):
        s, t = pins
        rows = ColorCode(self.rule).coded_rows(g, tape.colors)
        out = []
        for u, r in enumerate(rows):
            if u == t:
                out.append(0)
                continue
            if r >> t & 1:
                r = (r & ~(1 << t)) | (1 << s)
            out.append(r)
        return Graph(g.n, True, tuple(out))

    def edge(self, ctx, q, n, directed, pins, tape, u, v):
        s, t = pins
        c = tape.colors
        if t in (u, v):
            return 0
        if v == s:
            return q(u, t) if c[u] == self.k - 1 else 0
        return q(u, v) if c[v] == c[u] + 1 else 0


class Subsample(Construction):
    """Induced subgraph on the pins plus a uniformly random set of free vertices.

    The result is relabelled so the kept vertices are 0..keep-1 in increasing
    base order.  The tape holds one group coordinate: the index of the subset.
    """

    isolated_irrelevant = False

    def __init__(self, keep: Callable[[int], int] | int):
        self.keep_fn = keep if callable(keep) else (lambda n, _k=keep: _k)
        self.name = "subsample"

    def keep(self, n: int, pins) -> int:
        keep = self.keep_fn(n)
        if keep < len(pins):
            raise ReductionError(f"cannot keep {keep} vertices with {len(pins)} pinned")
        if keep > n:
            raise ReductionError(f"cannot keep {keep} of {n} vertices")
        return keep

    @staticmethod
    @lru_cache(maxsize=256)
    def subsets(n: int, pins: tuple, keep: int) -> tuple[tuple[int, ...], ...]:
        free = [v for v in range(n) if v not in pins]
        return tuple(
            tuple(sorted(set(pins) | set(extra))) for extra in combinations(free, keep - len(pins))
        )

    def out_n(self, n):
        return self.keep_fn(n)

    def out_pins(self, n, pins):
        # the relabelled pins depend on the tape; see mapped_pins
        return pins

    def tape_spec(self, n, pins):
        count = len(self.subsets(n, tuple(pins), self.keep(n, pins)))
        return TapeSpec(groups=(tuple(range(count)),))

    def kept(self, n, pins, tape) -> tuple[int, ...]:
        return self.subsets(n, tuple(pins), self.keep(n, pins))[tape.groups[0]]

    def mapped_pins(self, n, pins, tape) -> tuple[int, ...]:
        kept = self.kept(n, pins, tape)
        return tuple(kept.index(p) for p in pins)

    def derive(self, g, pins, tape):
        kept = self.kept(g.n, pins, tape)
        rows = []
        for u in kept:
            r = 0
            for i, v in enumerate(kept):
                if g.rows[u] >> v & 1:
                    r |= 1 << i
            rows.append(r)
        return Graph(len(kept), g.directed, tuple(rows))

    def edge(self, ctx, q, n, directed, pins, tape, u, v):
        kept = self.kept(n, pins, tape)
        return q(kept[u], kept[v])

    def view(self, base, pins, tape):
        out, _ = super().view(base, pins, tape)
        return out, self.mapped_pins(base.n, pins, tape)


class _Contraction(Construction):
    """Shared plumbing for the neighbourhood contractions (eager)."""

    isolated_irrelevant = True
    options: tuple[int, ...] = (RED, YELLOW, BLUE)
    neutral = YELLOW

    def fanout_for(self, n):
        # queries touching a contracted vertex cost one base query per member
        return max(1, (n // 2) * ((n + 1) // 2))

    def group_spec(self, n, pins):
        return tuple((self.neutral,) if v in pins else self.options for v in range(n))

    def relevant(self, g: Graph, pins) -> int:
        raise NotImplementedError

    def enum_spec(self, g, pins):
        spec = self.tape_spec(g.n, pins)
        spec = _fix_isolated_colors(spec, g)
        rel = self.relevant(g, pins)
        groups = tuple(
            opts if rel >> v & 1 else (self.neutral,) for v, opts in enumerate(spec.groups)
        )
        return TapeSpec(spec.colors, groups, spec.flips, spec.fixed_flips)


class ContractUndirected(_Contraction):
    """Three-group contraction for cycles through s (undirected).

    N(s) is learned upfront.  Each neighbour is red, yellow or blue.  Red
    vertices fuse into r = n, blue into b = n + 1; the originals become
    isolated.  Yellow vertices stay but lose their edge to s.  Then s is
    joined to r and b only, and the cyclic coloring s = 1, r = 2, b = k, free
    vertices in [3, k-1] keeps edges whose colors differ by 1 or k-1.
    """

    needs_directed = False

    def __init__(self, k: int):
        if k < 3:
            raise ReductionError("contraction needs k >= 3")
        self.k = k
        self.name = f"contract_neighbourhood[k={k}]"

    def out_n(self, n):
        return n + 2

    def eager_budget(self, n):
        return n

    def tape_spec(self, n, pins):
        s = pins[0]
        pal = tuple(range(3, self.k)) or (NO_COLOR,)
        colors = tuple((1,) if v == s else pal for v in range(n))
        return TapeSpec(colors=colors, groups=self.group_spec(n, pins))

    def relevant(self, g, pins):
        return g.rows[pins[0]]

    def _ok(self, ca, cb) -> bool:
        if ca == NO_COLOR or cb == NO_COLOR:
            return False
        return abs(ca - cb) in (1, self.k - 1)

    def derive(self, g, pins, tape):
        s, n, k = pins[0], g.n, self.k
        c, grp = tape.colors, tape.groups
        ns = g.rows[s]
        red = sum(1 << v for v in bits(ns) if grp[v] == RED)
        blue = sum(1 << v for v in bits(ns) if grp[v] == BLUE)
        r, b = n, n + 1
        col = list(c) + [2, k]
        edges = {(s, r), (s, b)}
        for u, v in g.edges():
            if s in (u, v):
                continue
            a = r if red >> u & 1 else b if blue >> u & 1 else u
            z = r if red >> v & 1 else b if blue >> v & 1 else v
            if a == z:
                continue
            edges.add((min(a, z), max(a, z)))
        kept = [(a, z) for a, z in edges if self._ok(col[a], col[z])]
        return make_graph(n + 2, False, kept)

    def learn(self, q, n, directed, pins, tape):
        s = pins[0]
        nbrs = 0
        for v in range(n):
            if v != s and q(s, v):
                nbrs |= 1 << v
        grp = tape.groups
        red = tuple(v for v in bits(nbrs) if grp[v] == RED)
        blue = tuple(v for v in bits(nbrs) if grp[v] == BLUE)
        return {"nbrs": nbrs, "red": red, "blue": blue}

    def edge(self, ctx, q, n, directed, pins, tape, u, v):
        s, k = pins[0], self.k
        r, b = n, n + 1
        col = list(tape.colors) + [2, k]
        if not self._ok(col[u], col[v]):
            return 0
        red, blue = ctx["red"], ctx["blue"]
        merged = set(red) | set(blue)
        if s in (u, v):
            w = v if u == s else u
            return int(w in (r, b))
        if u in merged or v in merged:
            return 0
        if {u, v} == {r, b}:
            return int(any(q(x, y) for x in red for y in blue))
        for hub, group in ((r, red), (b, blue)):
            if hub in (u, v):
                w = v if u == hub else u
                return int(any(q(x, w) for x in group))
        return q(u, v)


class ContractDirected(_Contraction):
    """Three-group contraction from directed cycles through s to undirected ones.

    N+(s) and N-(s) are learned upfront.  A red label takes effect only on an
    out-neighbour of s and a blue label only on an in-neighbour; otherwise the
    vertex is treated as yellow.  Red vertices fuse into r = n (tail side),
    blue into b = n + 1 (head side).  Arcs s -> r and b -> s are added, the
    cyclic coloring s = 0, r = 1, b = k-1, free vertices in [2, k-2] keeps
    forward arcs only, and directions are then forgotten.
    """

    needs_directed = True

    def __init__(self, k: int):
        if k < 3:
            raise ReductionError("contraction needs k >= 3")
        self.k = k
        self.name = f"contract_neighbourhood_directed[k={k}]"

    def out_n(self, n):
        return n + 2

    def out_directed(self, directed):
        return False

    def eager_budget(self, n):
        return 2 * n

    def tape_spec(self, n, pins):
        s = pins[0]
        pal = tuple(range(2, self.k - 1)) or (NO_COLOR,)
        colors = tuple((0,) if v == s else pal for v in range(n))
        return TapeSpec(colors=colors, groups=self.group_spec(n, pins))

    def relevant(self, g, pins):
        s = pins[0]
        return g.rows[s] | g.in_rows()[s]

    def _fwd(self, ca, cb) -> bool:
        if ca == NO_COLOR or cb == NO_COLOR:
            return False
        return cb == (ca + 1) % self.k

    def _groups(self, outs: int, ins: int, grp) -> tuple[tuple[int, ...], tuple[int, ...]]:
        red = tuple(v for v in bits(outs) if grp[v] == RED)
        blue = tuple(v for v in bits(ins) if grp[v] == BLUE)
        return red, blue

    def derive(self, g, pins, tape):
        s, n, k = pins[0], g.n, self.k
        outs, ins = g.rows[s], g.in_rows()[s]
        red, blue = self._groups(outs, ins, tape.groups)
        rs, bs = set(red), set(blue)
        r, b = n, n + 1
        col = list(tape.colors) + [1, k - 1]
        arcs = {(s, r), (b, s)}
        for u, v in g.edges():
            if s in (u, v):
                continue
            a = r if u in rs else u if u not in bs else None
            z = b if v in bs else v if v not in rs else None
            if a is None or z is None:
                continue
            arcs.add((a, z))
        kept = [(a, z) for a, z in arcs if self._fwd(col[a], col[z])]
        return make_graph(n + 2, False, kept)

    def learn(self, q, n, directed, pins, tape):
        s = pins[0]
        outs = ins = 0
        for v in range(n):
            if v == s:
                continue
            if q(s, v):
                outs |= 1 << v
            if q(v, s):
                ins |= 1 << v
        red, blue = self._groups(outs, ins, tape.groups)
        return {"red": red, "blue": blue}

    def _arc(self, ctx, q, s, n, a, z) -> int:
        r, b = n, n + 1
        red, blue = ctx["red"], ctx["blue"]
        if a == s:
            return int(z == r)
        if z == s:
            return int(a == b)
        if a == b or z == r:
            return 0  # b has no out-arcs but to s; r no in-arcs but from s
        if a in blue or z in red or a in red or z in blue:
            return 0
        tails = red if a == r else (a,)
        heads = blue if z == b else (z,)
        return int(any(q(x, y) for x in tails for y in heads))

    def edge(self, ctx, q, n, directed, pins, tape, u, v):
        s, k = pins[0], self.k
        col = list(tape.colors) + [1, k - 1]
        if self._fwd(col[u], col[v]):
            return self._arc(ctx, q, s, n, u, v)
        if self._fwd(col[v], col[u]):
            return self._arc(ctx, q, s, n, v, u)
        return 0


class ContractPath(_Contraction):
    """Two-group contraction from promise s-t paths to cycles through a fresh s'.

    N(s) and N(t) are learned upfront.  A neighbour of s is red (bit 1) or
    yellow; a vertex of N(t) - N(s) is blue (bit 1) or yellow.  Red vertices
    fuse into r = n, blue into b = n + 1, s' = n + 2 is joined to r and b.
    Only edges avoiding {s, t} and N(s), N(t) survive, plus red/blue edges
    re-rooted at r/b.  Yellow vertices end up isolated.
    """

    needs_directed = False
    options = (0, 1)
    neutral = 0

    def __init__(self, k: int):
        self.k = k
        self.name = f"contract_st_neighbourhoods[k={k}]"

    def out_n(self, n):
        return n + 3

    def out_pins(self, n, pins):
        return (n + 2,)

    def eager_budget(self, n):
        return 2 * n

    def tape_spec(self, n, pins):
        return TapeSpec(groups=self.group_spec(n, pins))

    def relevant(self, g, pins):
        s, t = pins
        return g.rows[s] | g.rows[t]

    def _split(self, ns: int, nt: int, pins, grp):
        s, t = pins
        red = tuple(v for v in bits(ns & ~(1 << t)) if grp[v])
        blue = tuple(v for v in bits(nt & ~ns & ~(1 << s)) if grp[v])
        blocked = ns | nt | (1 << s) | (1 << t)
        return red, blue, blocked

    def derive(self, g, pins, tape):
        s, t = pins
        n = g.n
        red, blue, blocked = self._split(g.rows[s], g.rows[t], pins, tape.groups)
        rs, bs = set(red), set(blue)
        r, b, sp = n, n + 1, n + 2
        edges = {(r, sp), (b, sp)}
        for u, v in g.edges():
            a = r if u in rs else b if u in bs else u
            z = r if v in rs else b if v in bs else v
            if a == z:
                continue
            if (a < n and blocked >> a & 1) or (z < n and blocked >> z & 1):
                continue
            edges.add((min(a, z), max(a, z)))
        return make_graph(n + 3, False, edges)

    def learn(self, q, n, directed, pins, tape):
        s, t = pins
        ns = nt = 0
        for v in range(n):
            if v != s and q(s, v):
                ns |= 1 << v
            if v != t and q(t, v):
                nt |= 1 << v
        red, blue, blocked = self._split(ns, nt, pins, tape.groups)
        return {"red": red, "blue": blue, "blocked": blocked}

    def edge(self, ctx, q, n, directed, pins, tape, u, v):
        r, b, sp = n, n + 1, n + 2
        red, blue, blocked = ctx["red"], ctx["blue"], ctx["blocked"]
        if sp in (u, v):
            w = v if u == sp else u
            return int(w in (r, b))
        for x in (u, v):
            if x < n and blocked >> x & 1:
                return 0
        if {u, v} == {r, b}:
            return int(any(q(x, y) for x in red for y in blue))
        for hub, group in ((r, red), (b, blue)):
            if hub in (u, v):
                w = v if u == hub else u
                return int(any(q(x, w) for x in group))
        return q(u, v)


# ---------------------------------------------------------------------------
# Reductions: source/target problems plus one or more stages


def _power_bound(base: int) -> Fraction:
    # 1 / base^base with 0^0 = 1
    return Fraction(1, base**base) if base > 0 else Fraction(1)


@dataclass(frozen=True)
class Stage:
    construction: Construction
    dst: ProblemTag


@dataclass(frozen=True)
class Reduction:
    """A one-sided randomized reduction.

    With several stages the derived answer is the OR over stages, each with
    its own tape; a YES witness is expected to survive in at least one stage
    with probability >= ``claimed``.
    """

    name: str
    label: str
    src: ProblemTag
    dst: ProblemTag
    stages: tuple[Stage, ...]
    claimed: Fraction | Callable[[int], Fraction]
    claim_kind: str  # "bound", "measured" or "exact"
    params: dict = field(default_factory=dict, compare=False)
    figure: bool = True  # same-k edge of the relation graph

    def claimed_at(self, n: int) -> Fraction:
        value = self.claimed(n) if callable(self.claimed) else self.claimed
        return Fraction(value)

    @property
    def eager(self) -> bool:
        return any(st.construction.eager_budget(8) is not None for st in self.stages)

    def fanout_for(self, n: int) -> int:
        return max(st.construction.fanout_for(n) for st in self.stages)

    def eager_budget(self, n: int) -> int | None:
        budgets = [st.construction.eager_budget(n) for st in self.stages]
        budgets = [b for b in budgets if b is not None]
        return max(budgets) if budgets else None

    def check(self, g: Graph, pins) -> tuple[int, ...]:
        pins = tuple(range(self.src.arity)) if pins is None else tuple(pins)
        if len(pins) != self.src.arity:
            raise ReductionError(f"{self.src} needs {self.src.arity} pinned vertices")
        if g.directed != self.src.directed:
            raise ReductionError(f"{self.name} expects a {'directed' if self.src.directed else 'undirected'} graph")
        return pins


@dataclass
class DerivedInstance:
    view: CountedOracle
    pinned: tuple[int, ...]
    tape: ColoringTape
    spec: Reduction
    stage: int = 0

    def as_instance(self) -> ProblemInstance:
        return ProblemInstance(self.view, self.spec.stages[self.stage].dst, self.pinned)


def derive_graph(red: Reduction, g: Graph, pins, tape: ColoringTape, stage: int = 0) -> tuple[Graph, tuple]:
    """Derived graph and pins via the direct (non-lazy) route."""
    pins = red.check(g, pins)
    con = red.stages[stage].construction
    con.check_input(g.directed)
    out = con.derive(g, pins, tape)
    if isinstance(con, Subsample):
        return out, con.mapped_pins(g.n, pins, tape)
    return out, con.out_pins(g.n, pins)


def apply(red: Reduction, inst: ProblemInstance, tape: ColoringTape, stage: int = 0) -> DerivedInstance:
    """Lazy derived instance over ``inst``'s oracle."""
    if inst.tag != red.src:
        raise ReductionError(f"{red.name} expects {red.src}, got {inst.tag}")
    con = red.stages[stage].construction
    view, pins = con.view(inst.oracle, inst.pinned, tape)
    return DerivedInstance(view, pins, tape, red, stage)


def stage_spec(red: Reduction, n: int, pins, stage: int = 0) -> TapeSpec:
    return red.stages[stage].construction.tape_spec(n, tuple(pins))


def random_tape(red: Reduction, n: int, pins, seed: int, stage: int = 0) -> ColoringTape:
    return fresh_tape(seed, stage_spec(red, n, pins, stage))


# ---------------------------------------------------------------------------
# Registry


def _t(text: str) -> ProblemTag:
    return tag(text)


def _loop_cycle(k: int, through_s: bool, dst: ProblemTag) -> tuple[Stage, ...]:
    stages = []
    for ell in range(3, k):
        stages.append(Stage(InsertLayers(CyclicRule(ell, through_s), 1, k - ell), dst))
    stages.append(Stage(ColorCode(CyclicRule(k, through_s)), dst))
    return tuple(stages)


def _loop_path(k: int, dst: ProblemTag) -> tuple[Stage, ...]:
    stages = []
    for ell in range(1, k):
        istar = 1 if ell >= 2 else 0
        stages.append(Stage(InsertLayers(PathRule(ell), istar, k - ell), dst))
    stages.append(Stage(ColorCode(PathRule(k)), dst))
    return tuple(stages)


def _subsample_keep(h_free: int, pins: int):
    def keep(n: int) -> int:
        return min(n, max(h_free + pins, (n + 1) // 2))

    return keep


def _subsample_claim(h_free: int, pins: int, keep):
    def claim(n: int) -> Fraction:
        kk = keep(n)
        return Fraction(math.comb(n - pins - h_free, kk - pins - h_free), math.comb(n - pins, kk - pins))

    return claim


def _tags(k: int) -> dict[str, ProblemTag]:
    names = {}
    for prom in ("", "Prom"):
        for d in ("", "Dir"):
            for mode in ("=", "<="):
                for fam, res in (("Path", "_st"), ("Cycle", ""), ("Cycle", "_s")):
                    text = f"{prom}{d}{fam}{res}^{mode}{k}"
                    names[text] = _t(text)
    return names


def _entries(k: int) -> list[Reduction]:
    T = _tags(k)
    cyc = _power_bound(k)  # 1/k^k
    lay = _power_bound(k - 1)  # 1/(k-1)^(k-1)
    half = Fraction(1, 2)
    out: list[Reduction] = []
    used: set[str] = set()

    def add(name, label, src, dst, stages, claimed, kind="bound", figure=True, **params):
        src, dst = _t(str(src)), _t(str(dst))
        base, suffix = label, 0
        while label in used:
            suffix += 1
            label = f"{base}{chr(ord('a') + suffix - 1)}"
        used.add(label)
        if isinstance(stages, Construction):
            stages = (Stage(stages, dst),)
        out.append(Reduction(name, label, src, dst, tuple(stages), claimed, kind, dict(k=k, **params), figure))

    idn = Identity()
    # --- s-t paths
    add("path-st-eq-to-leq", "P1", T[f"Path_st^={k}"], T[f"Path_st^<={k}"], ColorCode(PathRule(k)), lay)
    add("path-st-leq-orient", "P2", T[f"Path_st^<={k}"], T[f"DirPath_st^<={k}"], RandomizeDirections(), Fraction(1, 2**k))
    add("dirpath-st-leq-to-eq", "P3", T[f"DirPath_st^<={k}"], T[f"DirPath_st^={k}"], _loop_path(k, T[f"DirPath_st^={k}"]), lay)
    add("dirpath-st-eq-to-path-st-eq", "P4", T[f"DirPath_st^={k}"], T[f"Path_st^={k}"], ColorCode(PathRule(k), forget=True), lay)
    if k >= 3:
        add("attach-endpoints", "P5", f"DirPath^={k - 2}", T[f"DirPath_st^={k}"], AttachEndpoints(k - 2), lay)
        add("strip-endpoints", "P6", T[f"DirPath_st^={k}"], f"DirPath^={k - 2}", StripEndpoints(k), lay)
        add("path-orient", "P12", f"Path^={k - 2}", f"DirPath^={k - 2}", RandomizeDirections(), Fraction(1, 2 ** (k - 2)))
    add("prom-dirpath-st-eq-to-leq", "P7", T[f"PromDirPath_st^={k}"], T[f"PromDirPath_st^<={k}"], idn, Fraction(1), "exact")
    add("prom-dirpath-st-leq-drop-promise", "P8", T[f"PromDirPath_st^<={k}"], T[f"DirPath_st^<={k}"], idn, Fraction(1), "exact")
    add("dirpath-st-eq-to-prom", "P9", T[f"DirPath_st^={k}"], T[f"PromDirPath_st^={k}"], ColorCode(PathRule(k)), lay)
    if k >= 3:
        add("dirpath-st-lengthen", "P10", f"DirPath_st^={k - 1}", T[f"DirPath_st^={k}"],
            InsertLayers(PathRule(k - 1), 1, 1), _power_bound(k - 2), figure=False)
    add("prom-path-st-eq-to-leq", "P11", T[f"PromPath_st^={k}"], T[f"PromPath_st^<={k}"], idn, Fraction(1), "exact")
    for d in ("", "Dir"):
        for mode in ("=", "<="):
            if d == "Dir" and mode == "<=":
                continue  # P8 above
            add(f"prom-{d.lower()}path-st-{'eq' if mode == '=' else 'leq'}-drop-promise",
                "P13", T[f"Prom{d}Path_st^{mode}{k}"], T[f"{d}Path_st^{mode}{k}"], idn, Fraction(1), "exact")

    # --- unrestricted cycles
    for prom, lab in (("", ""), ("Prom", "prom-")):
        add(f"{lab}dircycle-eq-to-leq", "C1" if not prom else "C3", T[f"{prom}DirCycle^={k}"], T[f"{prom}DirCycle^<={k}"],
            ColorCode(CyclicRule(k)), cyc)
        if k >= 3:
            add(f"{lab}dircycle-leq-to-eq", "C2" if not prom else "C4", T[f"{prom}DirCycle^<={k}"], T[f"{prom}DirCycle^={k}"],
                _loop_cycle(k, False, T[f"{prom}DirCycle^={k}"]), cyc)
        if k >= 4:
            add(f"{lab}dircycle-lengthen", "C15", f"{prom}DirCycle^={k - 1}", T[f"{prom}DirCycle^={k}"],
                InsertLayers(CyclicRule(k - 1), 1, 1), _power_bound(k - 1), figure=False)
    add("cycle-leq-to-eq", "C5", T[f"Cycle^<={k}"], T[f"Cycle^={k}"], _loop_cycle(k, False, T[f"Cycle^={k}"]), cyc)
    add("prom-cycle-eq-to-leq", "C6", T[f"PromCycle^={k}"], T[f"PromCycle^<={k}"], ColorCode(CyclicRule(k)), cyc)
    add("prom-cycle-leq-to-eq", "C7", T[f"PromCycle^<={k}"], T[f"PromCycle^={k}"], _loop_cycle(k, False, T[f"PromCycle^={k}"]), cyc)
    if k % 2 == 1:
        add("dircycle-eq-to-cycle-eq", "C8", T[f"DirCycle^={k}"], T[f"Cycle^={k}"], ColorCode(CyclicRule(k), forget=True), cyc)
        if k >= 5:
            dst = T[f"Cycle^<={k}"]
            stages = tuple(Stage(InsertLayers(CyclicRule(ell), 1, k - ell), dst) for ell in range(3, k))
            add("cycle-leq-lengthen", "C14", f"Cycle^<={k - 1}", dst, stages, _power_bound(k - 1), figure=False)
    add("cycle-eq-orient", "C9", T[f"Cycle^={k}"], T[f"DirCycle^={k}"], RandomizeDirections(), Fraction(1, 2**k))
    add("cycle-leq-orient", "C10", T[f"Cycle^<={k}"], T[f"DirCycle^<={k}"], RandomizeDirections(), Fraction(1, 2**k))
    add("prom-cycle-eq-orient", "C11", T[f"PromCycle^={k}"], T[f"PromDirCycle^={k}"], RandomizeDirections(), Fraction(1, 2**k))
    add("prom-cycle-leq-orient", "C11b", T[f"PromCycle^<={k}"], T[f"PromDirCycle^<={k}"], RandomizeDirections(), Fraction(1, 2**k))
    for d in ("", "Dir"):
        for mode, mname in (("=", "eq"), ("<=", "leq")):
            add(f"prom-{d.lower()}cycle-{mname}-drop-promise",
                "C12" if not d else "C13", T[f"Prom{d}Cycle^{mode}{k}"], T[f"{d}Cycle^{mode}{k}"], idn, Fraction(1), "exact")

    # --- cycles through s
    for prom, lab in (("", ""), ("Prom", "prom-")):
        add(f"{lab}dircycle-s-eq-to-leq", "S1" if not prom else "S3", T[f"{prom}DirCycle_s^={k}"], T[f"{prom}DirCycle_s^<={k}"],
            ColorCode(CyclicRule(k, True)), cyc)
        add(f"{lab}dircycle-s-leq-to-eq", "S2" if not prom else "S4", T[f"{prom}DirCycle_s^<={k}"], T[f"{prom}DirCycle_s^={k}"],
            _loop_cycle(k, True, T[f"{prom}DirCycle_s^={k}"]), cyc)
        if k >= 4:
            add(f"{lab}dircycle-s-lengthen", "S14", f"{prom}DirCycle_s^={k - 1}", T[f"{prom}DirCycle_s^={k}"],
                InsertLayers(CyclicRule(k - 1, True), 1, 1), _power_bound(k - 1), figure=False)
        add(f"{lab}dircycle-s-unpin", "X1", T[f"{prom}DirCycle_s^={k}"], T[f"{prom}DirCycle^={k}"],
            ColorCode(CyclicRule(k, True), drop_pins=True), cyc)
    add("cycle-s-leq-to-eq", "S5", T[f"Cycle_s^<={k}"], T[f"Cycle_s^={k}"], _loop_cycle(k, True, T[f"Cycle_s^={k}"]), cyc)
    add("cycle-s-eq-to-leq", "S6", T[f"Cycle_s^={k}"], T[f"Cycle_s^<={k}"], ContractUndirected(k), Fraction(1, 100), "measured")
    add("prom-cycle-s-eq-to-leq", "S7", T[f"PromCycle_s^={k}"], T[f"PromCycle_s^<={k}"], ColorCode(CyclicRule(k, True)), cyc)
    add("prom-cycle-s-leq-to-eq", "S8", T[f"PromCycle_s^<={k}"], T[f"PromCycle_s^={k}"], _loop_cycle(k, True, T[f"PromCycle_s^={k}"]), cyc)
    add("dircycle-s-eq-to-cycle-s-eq", "S9", T[f"DirCycle_s^={k}"], T[f"Cycle_s^={k}"], ContractDirected(k), Fraction(1, 100), "measured")
    add("dircycle-s-eq-to-prom", "S11", T[f"DirCycle_s^={k}"], T[f"PromDirCycle_s^={k}"], ColorCode(CyclicRule(k, True)), cyc)
    for d in ("", "Dir"):
        for mode, mname in (("=", "eq"), ("<=", "leq")):
            add(f"prom-{d.lower()}cycle-s-{mname}-drop-promise",
                "S10", T[f"Prom{d}Cycle_s^{mode}{k}"], T[f"{d}Cycle_s^{mode}{k}"], idn, Fraction(1), "exact")
    for prom, lab in (("", ""), ("Prom", "prom-")):
        for mode, mname in (("=", "eq"), ("<=", "leq")):
            add(f"{lab}cycle-s-{mname}-orient", "S12", T[f"{prom}Cycle_s^{mode}{k}"], T[f"{prom}DirCycle_s^{mode}{k}"],
                RandomizeDirections(), Fraction(1, 2**k))

    # --- crossing between paths and cycles
    add("dircycle-s-split", "X2", T[f"DirCycle_s^={k}"], T[f"DirPath_st^={k}"], SplitDirected(), Fraction(1), "exact")
    add("prom-dirpath-st-merge", "X3", T[f"PromDirPath_st^={k}"], T[f"PromDirCycle_s^={k}"], MergeST(k), lay)
    add("prom-cycle-s-split", "X4", T[f"PromCycle_s^={k}"], T[f"PromPath_st^={k}"], SplitUndirected(), half)
    add("prom-path-st-contract", "X5", T[f"PromPath_st^={k}"], T[f"PromCycle_s^={k}"], ContractPath(k), Fraction(1, 100), "measured")

    # --- subsampling gadget
    keep = _subsample_keep(3, 0)
    add("subsample-dirpath", "F1", f"DirPath^=2", f"DirPath^=2", Subsample(keep), _subsample_claim(3, 0, keep), "exact", figure=False)
    keep2 = _subsample_keep(k - 1, 2)
    add("subsample-path-st", "F2", T[f"Path_st^={k}"], T[f"Path_st^={k}"], Subsample(keep2), _subsample_claim(k - 1, 2, keep2),
        "exact", figure=False)
    return out


# Standard verification length per label: k = 3 unless a longer k is needed
# to exercise layer insertion or an odd-only construction.
_STANDARD_K = {"C2": 4, "C4": 4, "C5": 4, "C7": 4, "S2": 4, "S4": 4, "S5": 4, "S8": 4,
               "C14": 5, "C15": 4, "S14": 4, "P10": 3}


@lru_cache(maxsize=None)
def registry(k: int) -> dict[str, Reduction]:
    if k < 3:
        raise ReductionError("the registry is defined for k >= 3")
    entries = _entries(k)
    names = [r.name for r in entries]
    if len(set(names)) != len(names):
        dup = sorted({x for x in names if names.count(x) > 1})
        raise AssertionError(f"duplicate reduction names: {dup}")
    return {r.name: r for r in entries}


def reduction_names() -> list[str]:
    names = set(registry(3)) | set(registry(4)) | set(registry(5))
    return sorted(names)


def standard_k(name: str) -> int:
    for k in (3, 4, 5):
        if name in registry(k):
            return max(k, _STANDARD_K.get(registry(k)[name].label, 3))
    raise KeyError(name)


def get(name: str, k: int | None = None) -> Reduction:
    k = standard_k(name) if k is None else k
    reg = registry(k)
    if name not in reg:
        if name == "dircycle-eq-to-cycle-eq" and k % 2 == 0:
            raise ReductionError("forgetting directions after cyclic coloring needs odd k")
        raise KeyError(f"{name} is not defined at k = {k}")
    return reg[name]


def standard_suite() -> list[Reduction]:
    return [get(name) for name in reduction_names()]


# ---------------------------------------------------------------------------
# Relation graph nodes and edges at a fixed k


def figure_nodes(k: int) -> list[str]:
    nodes = sorted(str(t) for t in _tags(k).values())
    nodes += [f"Path^={k - 2}", f"DirPath^={k - 2}"]
    return sorted(nodes)


def figure_edges(k: int) -> list[tuple[str, str]]:
    """Edges A -> B meaning Q(A) in O(Q(B)), from the executable reductions."""
    nodes = set(figure_nodes(k))
    edges = set()
    for red in registry(k).values():
        a, b = str(red.src), str(red.dst)
        if red.figure and a in nodes and b in nodes and a != b:
            edges.add((a, b))
    return sorted(edges)


# ---------------------------------------------------------------------------
# Graph collision embedding


class _BitSource:
    """Counted access to the bits x^(i)_j."""

    def __init__(self, xs: Sequence[Sequence[int]]):
        self.xs = [tuple(int(b) for b in x) for x in xs]
        self.query_count = 0

    def bit(self, i: int, j: int) -> int:
        self.query_count += 1
        return self.xs[i][j]


def gc_layout(n: int) -> dict[str, Callable[[int], int] | int]:
    """s = 0 and v_j in layer l (1..4) at index 1 + (l-1)*n + j."""
    return {"s": 0, "vertex": lambda layer, j: 1 + (layer - 1) * n + j}


def gc_embed(G: Graph, xs: Sequence[Sequence[int]]) -> tuple[CountedOracle, tuple[int]]:
    """Lazy undirected graph on 4n+1 vertices whose 5-cycles through s encode GC_G o OR_n.

    Fixed edges: s to every vertex of layers 1 and 4; v_j(2) - v_k(3) and
    v_k(2) - v_j(3) for every edge {j, k} of G.  Bit-dependent edges:
    v_j(1) - v_k(2) and v_k(3) - v_j(4) when x^(k)_j = 1.
    """
    if G.directed:
        raise ReductionError("graph collision needs an undirected graph")
    n = G.n
    if len(xs) != n or any(len(x) != n for x in xs):
        raise ReductionError(f"need {n} strings of {n} bits")
    gq = CountedOracle.from_graph(G, name="G")
    xq = _BitSource(xs)

    def where(v):
        if v == 0:
            return 0, -1
        return (v - 1) // n + 1, (v - 1) % n

    def answer(u, v):
        (lu, ju), (lv, jv) = where(u), where(v)
        if lu > lv:
            (lu, ju), (lv, jv) = (lv, jv), (lu, ju)
        if lu == 0:
            return int(lv in (1, 4))
        if (lu, lv) == (1, 2):
            return xq.bit(jv, ju)
        if (lu, lv) == (3, 4):
            return xq.bit(ju, jv)
        if (lu, lv) == (2, 3):
            return 0 if ju == jv else gq.query(ju, jv)
        return 0

    view = CountedOracle(4 * n + 1, False, answer, bases=[gq, xq], fanout_bound=1, name="gc_embed")
    return view, (0,)


# ---------------------------------------------------------------------------
# Amplification


def amplify_schedule(p: Fraction, stages: int = 1) -> tuple[int, int]:
    """(tapes, votes per majority) giving overall error <= 1/3.

    With T = ceil(2/p) tapes a YES survives somewhere except with probability
    (1-p)^T <= e^-2; m = 18 ln(6 T S) votes keep every one of the T*S
    majorities wrong with probability <= 1/(6 T S) (Hoeffding).
    """
    p = Fraction(p)
    if p <= 0:
        raise ReductionError("survival probability must be positive")
    tapes = 1 if p >= 1 else math.ceil(2 / p)
    votes = math.ceil(18 * math.log(6 * tapes * stages))
    if votes % 2 == 0:
        votes += 1
    return tapes, votes


def _majority(call, votes: int) -> int:
    yes = no = 0
    need = votes // 2 + 1
    while yes < need and no < need:
        if call():
            yes += 1
        else:
            no += 1
    return int(yes >= need)


def amplify(
    red: Reduction,
    g: Graph,
    decider: Callable[[Graph, ProblemTag, tuple], int],
    pins=None,
    p: Fraction | None = None,
    seed: int = 0,
) -> int:
    """Decide the source problem on ``g`` through ``red`` with a bounded-error decider."""
    pins = red.check(g, pins)
    p = red.claimed_at(g.n) if p is None else Fraction(p)
    tapes, votes = amplify_schedule(p, len(red.stages))
    rng = random.Random(seed)
    for _ in range(tapes):
        for i, st in enumerate(red.stages):
            tape = fresh_tape(rng.getrandbits(64), stage_spec(red, g.n, pins, i))
            dg, dpins = derive_graph(red, g, pins, tape, i)
            if _majority(lambda: decider(dg, st.dst, dpins), votes):
                return 1
    return 0
