"""Exact exponent formulas for the layered-path recursion and related bounds.

Everything that the tables are built from lives here as ``Fraction``.
Floats only appear in :func:`limit_constants`, where the quantities are
irrational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

Rational = Fraction

X2, X3 = Fraction(1, 2), Fraction(2, 3)
Y2, Y3 = Fraction(1, 2), Fraction(1, 2)


@dataclass(frozen=True)
class RecurrenceRow:
    k: int
    x: Fraction
    y: Fraction

    @property
    def sum(self) -> Fraction:
        return self.x + self.y


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    return Fraction(value)


@lru_cache(maxsize=None)
def solve_xy(k: int) -> tuple[Fraction, Fraction]:
    """Return ``(x_k, y_k)`` by iterating the two-step recurrence."""
    if k < 2:
        raise ValueError(f"solve_xy needs k >= 2, got {k}")
    if k == 2:
        return X2, Y2
    if k == 3:
        return X3, Y3
    x, y = solve_xy(k - 2)
    return (1 + x) / (2 - y), (1 - y) / (2 * (2 - y))


def recurrence_table(k_max: int, k_min: int = 2) -> list[RecurrenceRow]:
    return [RecurrenceRow(k, *solve_xy(k)) for k in range(k_min, k_max + 1)]


def _xy_extended(k: int) -> tuple[Fraction, Fraction]:
    # (x_1, y_1) = (0, 1) makes alpha_{1,r} = alpha_r fit the closed form.
    if k == 1:
        return Fraction(0), Fraction(1)
    return solve_xy(k)


def dirpath_exponent(k: int) -> Fraction:
    """Exponent of the layered directed k-path search at r = n."""
    if k < 1:
        raise ValueError(f"path length must be >= 1, got {k}")
    if k == 1:
        return Fraction(1)
    x, y = solve_xy(k)
    return x + y


def _check_alpha_r(alpha_r) -> Fraction:
    a = _as_fraction(alpha_r)
    if not 0 <= a <= 1:
        raise ValueError(f"alpha_r must lie in [0, 1], got {alpha_r}")
    return a


def alpha(k: int, alpha_r) -> Fraction:
    """Closed form ``max{x_{k-2}+y_{k-2}, x_k + y_k * alpha_r}``.

    k = 1 and k = 2 return the seeds ``alpha_r`` and ``1/2 + alpha_r/2``.
    """
    a = _check_alpha_r(alpha_r)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k == 1:
        return a
    if k == 2:
        return Fraction(1, 2) + a / 2
    xp, yp = _xy_extended(k - 2)
    x, y = solve_xy(k)
    return max(xp + yp, x + y * a)


# ---------------------------------------------------------------------------
# Direct evaluation of the raw min-max recurrence.
#
# alpha_k is convex and piecewise linear in its argument, so it is stored as
# its exact breakpoint list.  One step of the recurrence minimises, over s,
# the maximum of affine functions of (s, r); the result is again convex PWL.


@dataclass(frozen=True)
class PiecewiseLinear:
    """Convex piecewise-linear function on [0, 1] given by breakpoints."""

    points: tuple[tuple[Fraction, Fraction], ...]

    def __call__(self, r: Fraction) -> Fraction:
        pts = self.points
        for (r0, v0), (r1, v1) in zip(pts, pts[1:]):
            if r0 <= r <= r1:
                return v0 + (v1 - v0) * (r - r0) / (r1 - r0)
        raise ValueError(f"argument {r} outside [0, 1]")

    def pieces(self) -> list[tuple[Fraction, Fraction]]:
        """Affine pieces as (slope, intercept)."""
        out = []
        for (r0, v0), (r1, v1) in zip(self.points, self.points[1:]):
            slope = (v1 - v0) / (r1 - r0)
            piece = (slope, v0 - slope * r0)
            if piece not in out:
                out.append(piece)
        return out


def _step_terms(prev: PiecewiseLinear) -> list[tuple[Fraction, Fraction, Fraction]]:
    # Each term is a*s + b*r + c.
    half = Fraction(1, 2)
    terms = [(Fraction(1), half, Fraction(0)), (-half, half, Fraction(1))]
    for slope, icpt in prev.pieces():
        terms.append((slope - 1, Fraction(0), 1 + icpt))
    return terms


def _minmax_at(terms, r: Fraction) -> tuple[Fraction, Fraction]:
    """min over s in [0,1] of max_i terms_i(s, r); returns (value, argmin s)."""
    lines = [(a, b * r + c) for a, b, c in terms]
    candidates = {Fraction(0), Fraction(1)}
    for (a1, c1), (a2, c2) in combinations(lines, 2):
        if a1 != a2:
            s = (c2 - c1) / (a1 - a2)
            if 0 <= s <= 1:
                candidates.add(s)
    best = None
    for s in sorted(candidates):
        val = max(a * s + c for a, c in lines)
        if best is None or val < best[0]:
            best = (val, s)
    return best


def _solve3(rows):
    # Cramer's rule on a 3x3 system over Fractions; None if singular.
    (a1, b1, c1, d1), (a2, b2, c2, d2), (a3, b3, c3, d3) = rows
    det = a1 * (b2 * c3 - b3 * c2) - b1 * (a2 * c3 - a3 * c2) + c1 * (a2 * b3 - a3 * b2)
    if det == 0:
        return None
    dx = d1 * (b2 * c3 - b3 * c2) - b1 * (d2 * c3 - d3 * c2) + c1 * (d2 * b3 - d3 * b2)
    dy = a1 * (d2 * c3 - d3 * c2) - d1 * (a2 * c3 - a3 * c2) + c1 * (a2 * d3 - a3 * d2)
    return dx / det, dy / det


def _candidate_breakpoints(terms) -> set[Fraction]:
    cands = {Fraction(0), Fraction(1)}
    # Pairs of terms meeting on the boundary s = 0 or s = 1.
    for (a1, b1, c1), (a2, b2, c2) in combinations(terms, 2):
        if b1 != b2:
            for s in (Fraction(0), Fraction(1)):
                r = ((a2 - a1) * s + c2 - c1) / (b1 - b2)
                if 0 <= r <= 1:
                    cands.add(r)
    # Three terms meeting at one point (s, r, value).
    for t1, t2, t3 in combinations(terms, 3):
        # unknowns (s, r, v): a*s + b*r - v = -c
        rows = [(a, b, Fraction(-1), -c) for a, b, c in (t1, t2, t3)]
        sol = _solve3(rows)
        if sol is not None:
            s, r = sol
            if 0 <= s <= 1 and 0 <= r <= 1:
                cands.add(r)
    return cands


def _next_alpha(prev: PiecewiseLinear) -> PiecewiseLinear:
    terms = _step_terms(prev)
    rs = sorted(_candidate_breakpoints(terms))
    vals = {r: _minmax_at(terms, r)[0] for r in rs}
    # Convexity: value at an interior point equal to the chord means affine.
    for r0, r1 in zip(rs, rs[1:]):
        mid = (r0 + r1) / 2
        chord = (vals[r0] + vals[r1]) / 2
        if _minmax_at(terms, mid)[0] != chord:
            raise ArithmeticError(f"missed a breakpoint in ({r0}, {r1})")
    pts = [(r, vals[r]) for r in rs]
    # Drop collinear interior points.
    kept = [pts[0]]
    for i in range(1, len(pts) - 1):
        (r0, v0), (r1, v1), (r2, v2) = kept[-1], pts[i], pts[i + 1]
        if (v1 - v0) * (r2 - r1) != (v2 - v1) * (r1 - r0):
            kept.append(pts[i])
    kept.append(pts[-1])
    return PiecewiseLinear(tuple(kept))


@lru_cache(maxsize=None)
def alpha_function(k: int) -> PiecewiseLinear:
    """alpha_{k, .} as an exact convex PWL function, built from the raw min-max."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    zero, one = Fraction(0), Fraction(1)
    if k == 1:
        return PiecewiseLinear(((zero, zero), (one, one)))
    if k == 2:
        return PiecewiseLinear(((zero, Fraction(1, 2)), (one, one)))
    return _next_alpha(alpha_function(k - 2))


def alpha_min_direct(k: int, alpha_r) -> Fraction:
    """Evaluate alpha_{k, r} by minimising the raw recurrence over alpha_s."""
    a = _check_alpha_r(alpha_r)
    if k <= 2:
        return alpha_function(k)(a)
    terms = _step_terms(alpha_function(k - 2))
    return _minmax_at(terms, a)[0]


def alpha_argmin(k: int, alpha_r) -> Fraction:
    """The optimal alpha_s for one recursion step (smallest on ties)."""
    if k < 3:
        raise ValueError("no recursion step below k = 3")
    a = _check_alpha_r(alpha_r)
    return _minmax_at(_step_terms(alpha_function(k - 2)), a)[1]


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LimitConstants:
    chi: float
    phi: float
    alpha_limit: float
    c: float


def limit_constants() -> LimitConstants:
    r17 = math.sqrt(17)
    chi = (13 + 3 * r17) / 4
    phi = (5 - r17) / 4
    return LimitConstants(
        chi=chi,
        phi=phi,
        alpha_limit=1 / (1 - phi),
        c=min(math.sqrt(chi), math.sqrt(2 - phi)),
    )


def y_even_closed_form(ell: int) -> float:
    """Closed form for y_{2l} (= y_{2l+1})."""
    lc = limit_constants()
    return math.sqrt(17) / (2 * (1 - (-lc.chi) ** ell)) + lc.phi


def gap_ratio(k: int) -> float:
    """(3/2 - sum_{k+2}) / (3/2 - sum_k)."""
    h = Fraction(3, 2)
    return float((h - dirpath_exponent(k + 2)) / (h - dirpath_exponent(k)))


def gamma(k: int) -> Fraction:
    """Savings below 3/2 for the bounded-length cycle algorithm."""
    if k < 4:
        raise ValueError(f"gamma needs k >= 4, got {k}")
    if k % 2 == 0:
        return Fraction(k - 2, k * (k + 2))
    return Fraction(k - 3, (k - 1) * (k + 1))


def cycle_leq_exponent(k: int) -> Fraction:
    return Fraction(3, 2) - gamma(k)


def lms_exponent(k: int, m: int, d: int) -> Fraction:
    """Learning-graph exponent for a pattern with k vertices, m edges, min degree d."""
    if k < 3 or m < 1 or d < 1:
        raise ValueError(f"need k >= 3, m >= 1, d >= 1; got {(k, m, d)}")
    if m > k * (k - 1) // 2 or d > k - 1 or 2 * m < k * d:
        raise ValueError(f"(k, m, d) = {(k, m, d)} is not realisable by a graph")
    t1 = Fraction(k * k - 2 * (m + 1), k * (k + 1) * (m + 1))
    t2 = Fraction(2 * k - d - 3, k * (d + 1) * (m - d + 2))
    return 2 - Fraction(2, k) - max(t1, t2)


# ---------------------------------------------------------------------------
# Equivalence classes of problems under the proved reductions.

LINEAR = "Theta(n)"

# Results imported from elsewhere, recorded as relations rather than reproduced.
# (P, Q) means Q(P) in O(Q(Q)).
AXIOM_EDGES_TEMPLATE = (
    # span-program upper bounds: these problems are in O(n)
    ("PromPath_st^<=k", LINEAR),
    ("Path^=k-2", LINEAR),
    # a triangle-vs-forest promise instance is solvable in O(n) for these
    ("PromCycle^=k", LINEAR),
    # span programs also give the equal-length promise st-path problem from the
    # unrestricted path problem and from the bounded-length promise version
    ("Path^=k-2", "PromPath_st^=k"),
    ("PromPath_st^<=k", "PromPath_st^=k"),
)


def _tag_nodes(k: int) -> list[str]:
    from .reductions import figure_nodes

    return figure_nodes(k)


def relation_edges(k: int) -> list[tuple[str, str]]:
    """All O(.)-edges among problem nodes at length k, with the anchor LINEAR."""
    from .reductions import figure_edges

    nodes = _tag_nodes(k)
    edges = set(figure_edges(k))
    kk = str(k)
    km2 = str(k - 2)
    for a, b in AXIOM_EDGES_TEMPLATE:
        a = a.replace("k-2", km2).replace("k", kk)
        b = b.replace("k-2", km2).replace("k", kk)
        edges.add((a, b))
    # Every problem needs Omega(n) queries.
    for p in nodes:
        edges.add((LINEAR, p))
    return sorted(edges)


def strongly_connected(nodes, edges) -> list[frozenset[str]]:
    """Tarjan's algorithm, iterative."""
    succ: dict[str, list[str]] = {v: [] for v in nodes}
    for a, b in edges:
        succ.setdefault(a, []).append(b)
        succ.setdefault(b, [])
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    out: list[frozenset[str]] = []
    counter = 0
    for root in sorted(succ):
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                out.append(frozenset(comp))
    return out


def equivalence_classes(k: int) -> list[frozenset[str]]:
    """Classes of problems with equal query complexity up to constants.

    The anchor node ``LINEAR`` sits in the class of problems known to be
    Theta(n).  Classes are sorted by decreasing size, then lexicographically.
    """
    nodes = _tag_nodes(k) + [LINEAR]
    comps = strongly_connected(nodes, relation_edges(k))
    return sorted(comps, key=lambda c: (-len(c), sorted(c)))
