from __future__ import annotations

from hypothesis import strategies as st

from subgraphlab.graph import make_graph


@st.composite
def graphs(draw, min_n: int = 1, max_n: int = 7, directed: bool | None = None):
    n = draw(st.integers(min_n, max_n))
    d = draw(st.booleans()) if directed is None else directed
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v and (d or u < v)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return make_graph(n, d, chosen)
