"""Hypothesis strategies for regular terms over a fixed small signature."""

from hypothesis import strategies as st

SIGNATURE = {"A": 2, "B": 0, "C": 1}


@st.composite
def graphs(draw, max_nodes: int = 6, var_limit: int = 3):
    """A random graph presentation (possibly cyclic) as intern_graph input."""
    n = draw(st.integers(1, max_nodes))
    nodes = []
    for _ in range(n):
        if draw(st.booleans()) and draw(st.booleans()):
            nodes.append((draw(st.integers(1, var_limit)), []))
        else:
            name = draw(st.sampled_from(sorted(SIGNATURE)))
            nodes.append((name, [draw(st.integers(0, n - 1)) for _ in range(SIGNATURE[name])]))
    return nodes


@st.composite
def finite_texts(draw, depth: int = 3, var_limit: int = 3):
    if depth == 0 or draw(st.integers(0, 3)) == 0:
        if draw(st.booleans()):
            return "B"
        return f"x{draw(st.integers(1, var_limit))}"
    name = draw(st.sampled_from(["A", "C"]))
    args = [draw(finite_texts(depth - 1, var_limit)) for _ in range(SIGNATURE[name])]
    return f"{name}({', '.join(args)})"


def declare(store):
    for name, ar in SIGNATURE.items():
        store.declare(name, ar)
    return store
