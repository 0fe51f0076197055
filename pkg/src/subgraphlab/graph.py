"""Graphs as adjacency bitsets, the counted query oracle, and randomness tapes."""

from __future__ import annotations

import json
import random
import re
import threading
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable, Iterator, Sequence


class GraphError(ValueError):
    pass


class QueryError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    """An eager reduction used more upfront queries than it declared."""


@dataclass(frozen=True)
class Graph:
    """Simple graph on vertices 0..n-1.

    ``rows[u]`` is a bitmask of the out-neighbours of ``u``.  For undirected
    graphs the matrix is symmetric.
    """

    n: int
    directed: bool
    rows: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != self.n:
            raise GraphError("row count does not match n")
        full = (1 << self.n) - 1
        for u, row in enumerate(self.rows):
            if row >> u & 1:
                raise GraphError(f"self-loop at {u}")
            if row & ~full:
                raise GraphError(f"row {u} points outside [0, {self.n})")
            if not self.directed:
                for v in bits(row):
                    if not self.rows[v] >> u & 1:
                        raise GraphError(f"undirected graph not symmetric at {u},{v}")

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u] >> v & 1)

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for u, row in enumerate(self.rows):
            for v in bits(row):
                if self.directed or u < v:
                    out.append((u, v))
        return out

    @property
    def edge_count(self) -> int:
        total = sum(row.bit_count() for row in self.rows)
        return total if self.directed else total // 2

    def adjacency(self) -> list[list[int]]:
        return [[self.rows[u] >> v & 1 for v in range(self.n)] for u in range(self.n)]

    def in_rows(self) -> tuple[int, ...]:
        if not self.directed:
            return self.rows
        cols = [0] * self.n
        for u, row in enumerate(self.rows):
            for v in bits(row):
                cols[v] |= 1 << u
        return tuple(cols)

    def to_text(self) -> str:
        head = f"{self.n} {'directed' if self.directed else 'undirected'}"
        return "\n".join([head] + [f"{u} {v}" for u, v in self.edges()]) + "\n"

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "directed": self.directed, "edges": self.edges()})


def bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def make_graph(n: int, directed: bool, edges: Iterable[Sequence[int]]) -> Graph:
    if n < 0:
        raise GraphError("negative vertex count")
    rows = [0] * n
    for pair in edges:
        u, v = pair
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge {(u, v)} has an endpoint outside [0, {n})")
        if u == v:
            raise GraphError(f"self-loop at {u}")
        rows[u] |= 1 << v
        if not directed:
            rows[v] |= 1 << u
    return Graph(n, directed, tuple(rows))


def empty_graph(n: int, directed: bool = False) -> Graph:
    return Graph(n, directed, (0,) * n)


def path_graph(n: int, directed: bool = False) -> Graph:
    return make_graph(n, directed, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int, directed: bool = False) -> Graph:
    return make_graph(n, directed, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int, directed: bool = False) -> Graph:
    return make_graph(n, directed, [(u, v) for u in range(n) for v in range(n) if u != v])


def relabel(g: Graph, mapping: Sequence[int], n: int | None = None) -> Graph:
    """Copy of ``g`` with old vertex ``u`` renamed to ``mapping[u]``."""
    size = g.n if n is None else n
    return make_graph(size, g.directed, [(mapping[u], mapping[v]) for u, v in g.edges()])


def parse_graph_text(text: str) -> Graph:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise GraphError("empty graph file")
    head = lines[0].split()
    if len(head) != 2 or head[1] not in ("directed", "undirected"):
        raise GraphError(f"bad header line: {lines[0]!r}")
    n = int(head[0])
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise GraphError(f"bad edge line: {ln!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return make_graph(n, head[1] == "directed", edges)


def parse_graph_json(text: str) -> Graph:
    data = json.loads(text)
    return make_graph(int(data["n"]), bool(data["directed"]), [tuple(e) for e in data["edges"]])


# ---------------------------------------------------------------------------
# Counted oracle


class CountedOracle:
    """Adjacency-query gate.

    ``answer(u, v)`` computes the bit; for derived views it queries the
    ``bases``.  Every query bumps ``query_count``; for derived views the number
    of base queries it triggered is recorded so fanout can be audited.
    """

    def __init__(
        self,
        n: int,
        directed: bool,
        answer: Callable[[int, int], int],
        bases: Sequence["CountedOracle"] = (),
        fanout_bound: int = 2,
        name: str = "",
    ):
        self.n = n
        self.directed = directed
        self._answer = answer
        self.bases = tuple(bases)
        self.fanout_bound = fanout_bound
        self.name = name
        self.query_count = 0
        self.max_fanout = 0
        self.upfront = 0
        self.upfront_budget: int | None = None
        self._lock = threading.Lock()

    @classmethod
    def from_graph(cls, g: Graph, name: str = "base") -> "CountedOracle":
        rows = g.rows
        return cls(g.n, g.directed, lambda u, v: rows[u] >> v & 1, name=name)

    def _base_total(self) -> int:
        return sum(b.query_count for b in self.bases)

    def query(self, u: int, v: int) -> int:
        if u == v:
            raise QueryError(f"query on a self-pair ({u}, {u})")
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise QueryError(f"pair {(u, v)} outside [0, {self.n})")
        before = self._base_total()
        bit = int(self._answer(u, v))
        spent = self._base_total() - before
        with self._lock:
            self.query_count += 1
            if spent > self.max_fanout:
                self.max_fanout = spent
        if spent > self.fanout_bound and self.bases:
            raise BudgetExceeded(
                f"{self.name}: one query used {spent} base queries, bound {self.fanout_bound}"
            )
        return bit

    def charge_upfront(self, spend: Callable[[], object], budget: int):
        """Run eager base queries, recording and enforcing their cost."""
        before = self._base_total()
        result = spend()
        used = self._base_total() - before
        self.upfront += used
        self.upfront_budget = budget
        if used > budget:
            raise BudgetExceeded(f"{self.name}: upfront cost {used} exceeds budget {budget}")
        return result

    def materialize(self) -> Graph:
        """Read the whole graph through queries (n(n-1)/2 or n(n-1) of them)."""
        rows = [0] * self.n
        for u in range(self.n):
            start = 0 if self.directed else u + 1
            for v in range(start, self.n):
                if u == v:
                    continue
                if self.query(u, v):
                    rows[u] |= 1 << v
                    if not self.directed:
                        rows[v] |= 1 << u
        return Graph(self.n, self.directed, tuple(rows))


def query_edge(oracle: CountedOracle, u: int, v: int) -> int:
    return oracle.query(u, v)


# ---------------------------------------------------------------------------
# Problem tags

_TAG_RE = re.compile(
    r"^(?P<prom>Prom)?(?P<dir>Dir)?(?P<fam>Path|Cycle)"
    r"(?:_(?P<res>st|s))?\^(?P<mode>=|<=|≤)(?P<k>\d+)$"
)


@dataclass(frozen=True)
class ProblemTag:
    family: str  # "path" or "cycle"
    directed: bool
    promise: bool
    restriction: str  # "none", "s" or "st"
    mode: str  # "=" or "<="
    k: int

    def __post_init__(self):
        if self.family not in ("path", "cycle"):
            raise ValueError(f"unknown family {self.family}")
        if self.mode not in ("=", "<="):
            raise ValueError(f"unknown length mode {self.mode}")
        allowed = ("none", "st") if self.family == "path" else ("none", "s")
        if self.restriction not in allowed:
            raise ValueError(f"{self.family} problems cannot be restricted to {self.restriction}")
        low = 1 if self.family == "path" else 3
        if self.k < low:
            raise ValueError(f"{self.family} problems need k >= {low}, got {self.k}")

    @property
    def arity(self) -> int:
        return {"none": 0, "s": 1, "st": 2}[self.restriction]

    def with_(self, **changes) -> "ProblemTag":
        data = dict(
            family=self.family,
            directed=self.directed,
            promise=self.promise,
            restriction=self.restriction,
            mode=self.mode,
            k=self.k,
        )
        data.update(changes)
        return ProblemTag(**data)

    def __str__(self) -> str:
        name = ("Prom" if self.promise else "") + ("Dir" if self.directed else "")
        name += "Path" if self.family == "path" else "Cycle"
        if self.restriction != "none":
            name += "_" + self.restriction
        return f"{name}^{self.mode}{self.k}"


def parse_tag(text: str) -> ProblemTag:
    m = _TAG_RE.match(text.strip())
    if not m:
        raise ValueError(f"cannot parse problem tag {text!r}")
    mode = "=" if m["mode"] == "=" else "<="
    return ProblemTag(
        family="path" if m["fam"] == "Path" else "cycle",
        directed=bool(m["dir"]),
        promise=bool(m["prom"]),
        restriction=m["res"] or "none",
        mode=mode,
        k=int(m["k"]),
    )


def tag(text: str | ProblemTag) -> ProblemTag:
    return text if isinstance(text, ProblemTag) else parse_tag(text)


@dataclass
class ProblemInstance:
    oracle: CountedOracle
    tag: ProblemTag
    pinned: tuple[int, ...] = ()

    def __post_init__(self):
        self.tag = tag(self.tag)
        self.pinned = tuple(self.pinned)
        if len(self.pinned) != self.tag.arity:
            raise ValueError(f"{self.tag} needs {self.tag.arity} pinned vertices, got {self.pinned}")
        if len(set(self.pinned)) != len(self.pinned):
            raise ValueError("pinned vertices must be distinct")
        for p in self.pinned:
            if not 0 <= p < self.oracle.n:
                raise ValueError(f"pinned vertex {p} outside the graph")
        if self.tag.directed != self.oracle.directed:
            raise ValueError(f"{self.tag} does not match the oracle's directedness")

    @property
    def k(self) -> int:
        return self.tag.k


def instance(g: Graph, problem: str | ProblemTag, pinned: Sequence[int] | None = None) -> ProblemInstance:
    """Wrap a graph as a problem instance; pins default to 0 (and 1)."""
    t = tag(problem)
    if pinned is None:
        pinned = tuple(range(t.arity))
    return ProblemInstance(CountedOracle.from_graph(g), t, tuple(pinned))


# ---------------------------------------------------------------------------
# Randomness tapes


@dataclass(frozen=True)
class TapeSpec:
    """Per-coordinate choice sets; a tape picks one option from each uniformly."""

    colors: tuple[tuple[int, ...], ...] = ()
    groups: tuple[tuple[int, ...], ...] = ()
    flips: int = 0
    fixed_flips: tuple[int, ...] = ()  # flip slots whose bit is irrelevant; pinned to 0

    def __post_init__(self):
        for opts in self.colors + self.groups:
            if not opts:
                raise ValueError("a tape coordinate has an empty choice set")

    def size(self) -> int:
        total = 1
        for opts in self.colors + self.groups:
            total *= len(opts)
        return total * 2 ** (self.flips - len(self.fixed_flips))


@dataclass(frozen=True)
class ColoringTape:
    seed: int | None
    colors: tuple[int, ...] = ()
    groups: tuple[int, ...] = ()
    flips: tuple[int, ...] = ()


def color_spec(
    n: int, palette: Sequence[int], pins: dict[int, int] | None = None, groups=None, flips: int = 0
) -> TapeSpec:
    palette = tuple(palette)
    if not palette:
        raise ValueError("empty color range")
    pins = pins or {}
    colors = tuple((pins[v],) if v in pins else palette for v in range(n))
    return TapeSpec(colors=colors, groups=tuple(groups or ()), flips=flips)


def fresh_tape(seed: int, spec: TapeSpec) -> ColoringTape:
    rng = random.Random(seed)
    colors = tuple(opts[rng.randrange(len(opts))] for opts in spec.colors)
    groups = tuple(opts[rng.randrange(len(opts))] for opts in spec.groups)
    fixed = set(spec.fixed_flips)
    flips = tuple(0 if i in fixed else rng.getrandbits(1) for i in range(spec.flips))
    return ColoringTape(seed, colors, groups, flips)


def enumerate_tapes(spec: TapeSpec) -> Iterator[ColoringTape]:
    """All tapes of the spec, each with equal weight."""
    nc = len(spec.colors)
    free_slots = [i for i in range(spec.flips) if i not in set(spec.fixed_flips)]
    for choice in product(*spec.colors, *spec.groups, *([(0, 1)] * len(free_slots))):
        colors = choice[:nc]
        groups = choice[nc : nc + len(spec.groups)]
        flips = [0] * spec.flips
        for slot, bit in zip(free_slots, choice[nc + len(spec.groups) :]):
            flips[slot] = bit
        yield ColoringTape(None, tuple(colors), tuple(groups), tuple(flips))
