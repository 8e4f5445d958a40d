import pytest

from graphbimod import Edge, GraphBimodule


@pytest.fixture(scope="session")
def full_shift2():
    return GraphBimodule(["z"], [Edge("a", "z", "z"), Edge("b", "z", "z")])


@pytest.fixture(scope="session")
def full_shift3():
    return GraphBimodule(
        ["z"], [Edge("a", "z", "z"), Edge("b", "z", "z"), Edge("c", "z", "z")]
    )


@pytest.fixture(scope="session")
def golden():
    # two vertices, loop at u, and a 2-cycle through v; adjacency [[1,1],[1,0]]
    return GraphBimodule(
        ["u", "v"],
        [Edge("a", "u", "u"), Edge("b", "u", "v"), Edge("c", "v", "u")],
    )


@pytest.fixture(scope="session")
def triangular():
    # loop at each vertex plus one edge w <- v; path counts grow linearly at w
    return GraphBimodule(
        ["v", "w"],
        [Edge("e", "v", "v"), Edge("f", "w", "v"), Edge("g", "w", "w")],
    )


@pytest.fixture(scope="session")
def cycle3():
    return GraphBimodule(
        ["a", "b", "c"],
        [Edge("e1", "a", "b"), Edge("e2", "b", "c"), Edge("e3", "c", "a")],
    )


@pytest.fixture(scope="session")
def two_loops():
    return GraphBimodule(["p", "q"], [Edge("x", "p", "p"), Edge("y", "q", "q")])


@pytest.fixture(scope="session")
def lopsided():
    # adjacency [[1,2],[1,0]], not symmetric, still primitive
    return GraphBimodule(
        ["u", "v"],
        [
            Edge("a", "u", "u"),
            Edge("b", "u", "v"),
            Edge("c", "u", "v"),
            Edge("d", "v", "u"),
        ],
    )


@pytest.fixture(scope="session")
def weighted_loop():
    return GraphBimodule(["z"], [Edge("l", "z", "z", weight=2.0)])


@pytest.fixture(scope="session")
def oscillating():
    # the 2-cycle x <-> y has period two with weight 4 one way, so the
    # ratio at z alternates and has no limit
    return GraphBimodule(
        ["x", "y", "z"],
        [
            Edge("p", "x", "y"),
            Edge("q", "y", "x", weight=4.0),
            Edge("l", "z", "z", weight=2.0),
            Edge("m", "z", "x"),
        ],
    )
