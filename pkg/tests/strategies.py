from fractions import Fraction

from hypothesis import strategies as st

from netform.cost import GameParams
from netform.graph import PlayerType, Topology


@st.composite
def topologies(draw, min_n=1, max_n=8, connected=False):
    n = draw(st.integers(min_n, max_n))
    types = draw(st.lists(st.sampled_from([PlayerType.A, PlayerType.B]), min_size=n, max_size=n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    links = set(draw(st.lists(st.sampled_from(pairs), unique=True))) if pairs else set()
    if connected:
        for v in range(1, n):
            u = draw(st.integers(0, v - 1))
            links.add((u, v))
    return Topology(tuple(types), frozenset(links))


@st.composite
def params(draw):
    A = Fraction(draw(st.integers(3, 20)), 2)
    cA = Fraction(draw(st.integers(0, 16)), 2)
    cB = cA + Fraction(draw(st.integers(0, 16)), 2)
    return GameParams(cA, cB, A)
