import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphbimod import (
    AlgebraElement,
    FockVector,
    beta_k,
    index_element,
    paths,
    phi_k,
    rank_one_phi,
    rank_one_tensor_matrix,
    right_inner_fock,
)
from graphbimod.fock import Path, left_inner_fock, make_path, path_index, vertex_path


def brute_force_paths(module, k):
    """Composable edge tuples by exhaustive product, the slow way."""
    if k == 0:
        return [(v,) for v in module.vertices]
    out = []
    for combo in itertools.product(module.edges, repeat=k):
        if all(combo[i].s == combo[i + 1].r for i in range(k - 1)):
            out.append(tuple(e.id for e in combo))
    return out


@pytest.mark.parametrize("k", [0, 1, 2, 3, 4, 5])
def test_path_enumeration_matches_brute_force(golden, k):
    got = {p.ids if len(p) else (p.base,) for p in paths(golden, k)}
    assert got == set(brute_force_paths(golden, k))


def test_path_count_golden_length5(golden):
    # row sums of the fifth adjacency power: 8 + 5 at u, 5 + 3 at v
    assert len(paths(golden, 5)) == 21


def test_paths_sorted_and_indexed(golden):
    ps = paths(golden, 3)
    assert ps == sorted(ps, key=lambda p: p.sort_key())
    idx = path_index(golden, 3)
    assert all(idx[p] == i for i, p in enumerate(ps))


def test_path_endpoints_and_weight(golden):
    p = make_path(golden, ["a", "b"])
    assert (p.r, p.s) == ("u", "v")
    assert len(p) == 2
    q = vertex_path(golden, "v")
    assert (q.r, q.s) == ("v", "v")
    assert len(q) == 0
    assert q.weight == 1.0


def test_make_path_rejects_noncomposable(golden):
    with pytest.raises(ValueError):
        make_path(golden, ["b", "b"])


def test_head_tail_concat_roundtrip(golden):
    p = make_path(golden, ["a", "b", "c"])
    assert p.head(1).concat(p.tail(2)) == p
    assert p.head(0) == vertex_path(golden, "u")
    assert p.tail(0) == vertex_path(golden, "u")
    assert p.extends(p.head(2))
    assert not p.extends(make_path(golden, ["b"]))


def test_empty_prefix_extension_checks_range(golden):
    p = make_path(golden, ["c"])
    assert p.extends(vertex_path(golden, "v"))
    assert not p.extends(vertex_path(golden, "u"))


def test_beta_k_matches_matrix_powers(golden, triangular, lopsided):
    for m in (golden, triangular, lopsided):
        B = m.adjacency()
        ones = np.ones(len(m.vertices))
        for k in range(8):
            expect = np.linalg.matrix_power(B, k) @ ones
            got = beta_k(m, k)
            assert np.allclose(
                [got[v] for v in m.vertices], expect, rtol=0, atol=1e-9
            ), k


def test_beta_one_is_the_index(golden):
    assert beta_k(golden, 1).isclose(index_element(golden), tol=0)


def test_full_shift_beta_is_exact_power(full_shift3):
    for k in range(11):
        assert beta_k(full_shift3, k)["z"] == 3**k


def test_fock_vector_degree_and_actions(golden):
    p = make_path(golden, ["a", "b"])
    x = FockVector.delta(golden, p) * 2
    assert x.degree() == 2
    a = AlgebraElement.from_dict(golden.vertices, {"u": 3, "v": 7})
    assert x.left_action(a).coefficient(p) == 6
    assert x.right_action(a).coefficient(p) == 14


def test_mixed_degrees_refuse_a_degree(golden):
    x = FockVector.delta(golden, make_path(golden, ["a"]))
    y = FockVector.delta(golden, make_path(golden, ["a", "b"]))
    assert not (x + y).is_homogeneous()
    with pytest.raises(ValueError):
        (x + y).degree()


def test_inner_products_on_path_basis(golden):
    pa = FockVector.delta(golden, make_path(golden, ["a"]))
    pb = FockVector.delta(golden, make_path(golden, ["b"]))
    assert right_inner_fock(pa, pa).as_dict() == {"u": 1, "v": 0}
    assert right_inner_fock(pa, pb).norm() == 0
    assert left_inner_fock(pb, pb).as_dict() == {"u": 1, "v": 0}


def test_left_inner_fock_multiplies_weights():
    from graphbimod import Edge, GraphBimodule

    m = GraphBimodule(["z"], [Edge("l", "z", "z", weight=2.0)])
    p = make_path(m, ["l", "l", "l"])
    x = FockVector.delta(m, p)
    assert left_inner_fock(x, x)["z"] == pytest.approx(8)
    assert right_inner_fock(x, x)["z"] == pytest.approx(1)


def test_phi_k_of_identity_is_beta_k(golden, triangular):
    for m in (golden, triangular):
        for k in range(5):
            n = len(paths(m, k))
            assert phi_k(m, k, np.eye(n)).isclose(beta_k(m, k), tol=1e-12)


GOLDEN = None


def _golden_module():
    global GOLDEN
    if GOLDEN is None:
        from graphbimod import Edge, GraphBimodule

        GOLDEN = GraphBimodule(
            ["u", "v"],
            [Edge("a", "u", "u"), Edge("b", "u", "v"), Edge("c", "v", "u")],
        )
    return GOLDEN


@given(st.integers(2, 5), st.integers(0, 2))
@settings(max_examples=20, deadline=None)
def test_rank_one_phi_agrees_with_dense_route(k, n):
    m = _golden_module()
    rng = np.random.default_rng(100 * k + n)
    pool = paths(m, n)
    xi = FockVector(
        m,
        {p: complex(rng.standard_normal(), rng.standard_normal()) for p in pool},
    )
    eta = FockVector(
        m,
        {p: complex(rng.standard_normal(), rng.standard_normal()) for p in pool},
    )
    fast = rank_one_phi(m, k, xi, eta)
    dense = phi_k(m, k, rank_one_tensor_matrix(m, k, xi, eta))
    assert fast.isclose(dense, tol=1e-10)


def test_rank_one_phi_dense_route_with_weights(oscillating):
    rng = np.random.default_rng(5)
    for n in (0, 1):
        pool = paths(oscillating, n)
        xi = FockVector(oscillating, {p: complex(rng.standard_normal()) for p in pool})
        eta = FockVector(oscillating, {p: complex(rng.standard_normal()) for p in pool})
        for k in (2, 3):
            fast = rank_one_phi(oscillating, k, xi, eta)
            dense = phi_k(oscillating, k, rank_one_tensor_matrix(oscillating, k, xi, eta))
            assert fast.isclose(dense, tol=1e-10), (n, k)
