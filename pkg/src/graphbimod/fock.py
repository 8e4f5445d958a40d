"""Path spaces, tensor powers of the edge module, and the k-step index.

A path of length k is a sequence (g_1, ..., g_k) of edges with
s(g_i) = r(g_{i+1}); its range is r(g_1) and its source is s(g_k), so paths
compose in the same order as the module tensor factors.  Length-0 paths are
the vertices themselves.  Path lists are always in lexicographic order of
the edge id sequence, vertex paths in vertex order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .algebra import AlgebraElement
from .bimodule import Edge, GraphBimodule


@dataclass(frozen=True)
class Path:
    edges: tuple[Edge, ...]
    base: str  # equals r(edges[0]) when nonempty; the vertex itself when empty

    def __post_init__(self):
        if self.edges:
            if self.base != self.edges[0].r:
                raise ValueError("base vertex must equal the range of the first edge")
            for a, b in zip(self.edges, self.edges[1:]):
                if a.s != b.r:
                    raise ValueError(
                        f"edges {a.id!r} and {b.id!r} do not compose (s != r)"
                    )

    @property
    def r(self) -> str:
        return self.base

    @property
    def s(self) -> str:
        return self.edges[-1].s if self.edges else self.base

    @property
    def weight(self) -> float:
        w = 1.0
        for e in self.edges:
            w *= e.weight
        return w

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.edges)

    def label(self) -> str:
        return ".".join(self.ids) if self.edges else f"({self.base})"

    def sort_key(self):
        return (len(self.edges), self.ids if self.edges else (self.base,))

    def head(self, n: int) -> "Path":
        """First n edges as a path (the outer tensor factors)."""
        if n == 0:
            return Path((), self.base)
        return Path(self.edges[:n], self.base)

    def tail(self, n: int) -> "Path":
        """Last n edges as a path (the inner tensor factors)."""
        if n == 0:
            return Path((), self.s)
        rest = self.edges[len(self.edges) - n :]
        return Path(rest, rest[0].r)

    def concat(self, other: "Path") -> "Path":
        if self.s != other.r:
            raise ValueError("paths do not compose")
        if not other.edges:
            return self
        if not self.edges:
            return other
        return Path(self.edges + other.edges, self.base)

    def extends(self, prefix: "Path") -> bool:
        """Whether `prefix` is an initial segment of this path."""
        if len(prefix) > len(self):
            return False
        if not prefix.edges:
            return prefix.base == self.r
        return self.edges[: len(prefix)] == prefix.edges

    def __repr__(self) -> str:
        return f"Path({self.label()})"


def vertex_path(module: GraphBimodule, v: str) -> Path:
    module.vertices.index(v)
    return Path((), v)


def make_path(module: GraphBimodule, edge_ids: Sequence[str], base: str | None = None) -> Path:
    if not edge_ids:
        if base is None:
            raise ValueError("a length-0 path needs a base vertex")
        return vertex_path(module, base)
    edges = tuple(module.edge(i) for i in edge_ids)
    return Path(edges, edges[0].r)


def paths(module: GraphBimodule, k: int) -> list[Path]:
    """All length-k paths in canonical order."""
    if k < 0:
        raise ValueError("path length must be nonnegative")
    if k == 0:
        return [Path((), v) for v in module.vertices]
    level = [(e,) for e in module.edges]
    for _ in range(k - 1):
        level = [
            tup + (e,) for tup in level for e in module.edges_with_range(tup[-1].s)
        ]
    out = [Path(tup, tup[0].r) for tup in level]
    out.sort(key=Path.sort_key)
    return out


def path_index(module: GraphBimodule, k: int) -> dict[Path, int]:
    return {p: i for i, p in enumerate(paths(module, k))}


class FockVector:
    """Finitely supported complex combination of paths.

    Degrees may mix; the inner products pair only identical paths, so mixed
    degrees are orthogonal automatically.
    """

    __slots__ = ("module", "terms")

    def __init__(self, module: GraphBimodule, terms: Mapping[Path, complex] | None = None):
        self.module = module
        self.terms: dict[Path, complex] = {}
        if terms:
            for p, c in terms.items():
                c = complex(c)
                if c != 0:
                    self.terms[p] = c

    @classmethod
    def delta(cls, module: GraphBimodule, path: Path) -> "FockVector":
        return cls(module, {path: 1.0})

    def degree(self) -> int:
        """Common path length; raises if the support mixes lengths."""
        lengths = {len(p) for p in self.terms}
        if len(lengths) > 1:
            raise ValueError("vector is not homogeneous")
        return lengths.pop() if lengths else 0

    def is_homogeneous(self) -> bool:
        return len({len(p) for p in self.terms}) <= 1

    def __add__(self, other: "FockVector") -> "FockVector":
        out = dict(self.terms)
        for p, c in other.terms.items():
            out[p] = out.get(p, 0.0) + c
        return FockVector(self.module, out)

    def __sub__(self, other: "FockVector") -> "FockVector":
        return self + (-1.0) * other

    def __mul__(self, scalar) -> "FockVector":
        z = complex(scalar)
        return FockVector(self.module, {p: c * z for p, c in self.terms.items()})

    __rmul__ = __mul__

    def left_action(self, a: AlgebraElement) -> "FockVector":
        return FockVector(self.module, {p: a[p.r] * c for p, c in self.terms.items()})

    def right_action(self, a: AlgebraElement) -> "FockVector":
        return FockVector(self.module, {p: c * a[p.s] for p, c in self.terms.items()})

    def coefficient(self, path: Path) -> complex:
        return self.terms.get(path, 0.0)

    def norm(self) -> float:
        """Module norm via the right inner product."""
        g = right_inner_fock(self, self)
        return float(np.sqrt(g.norm()))

    def sup_coefficient(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def __repr__(self) -> str:
        inner = " + ".join(f"{c:.4g}*{p.label()}" for p, c in sorted(
            self.terms.items(), key=lambda item: item[0].sort_key()))
        return f"FockVector({inner or '0'})"


def right_inner_fock(x: FockVector, y: FockVector) -> AlgebraElement:
    """<x|y>_R(v) over paths with source v; distinct paths are orthogonal."""
    m = x.module
    vals = np.zeros(len(m.vertices), dtype=complex)
    for p, c in x.terms.items():
        d = y.terms.get(p)
        if d is not None:
            vals[m.vertices.index(p.s)] += np.conj(c) * d
    return AlgebraElement(m.vertices, vals)


def left_inner_fock(x: FockVector, y: FockVector) -> AlgebraElement:
    """<x|y>_L(v) over paths with range v, weighted by the path weight."""
    m = x.module
    vals = np.zeros(len(m.vertices), dtype=complex)
    for p, c in x.terms.items():
        d = y.terms.get(p)
        if d is not None:
            vals[m.vertices.index(p.r)] += p.weight * c * np.conj(d)
    return AlgebraElement(m.vertices, vals)


# -- k-step index and compressions ----------------------------------------


def beta_k(module: GraphBimodule, k: int) -> AlgebraElement:
    """k-step index vector e^{beta_k} = (B^k 1), B the weighted adjacency.

    Equals the sum of the left inner squares of the length-k path basis.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    B = module.adjacency()
    vec = np.ones(len(module.vertices))
    for _ in range(k):
        vec = B @ vec
    return AlgebraElement(module.vertices, vec)


def phi_k(module: GraphBimodule, k: int, T: np.ndarray) -> AlgebraElement:
    """Weighted diagonal sum of a level-k operator, grouped by path range."""
    plist = paths(module, k)
    T = np.asarray(T, dtype=complex)
    if T.shape != (len(plist), len(plist)):
        raise ValueError(f"operator must be {len(plist)}x{len(plist)}")
    vals = np.zeros(len(module.vertices), dtype=complex)
    for i, p in enumerate(plist):
        vals[module.vertices.index(p.r)] += p.weight * T[i, i]
    return AlgebraElement(module.vertices, vals)


def rank_one_phi(
    module: GraphBimodule, k: int, xi: FockVector, eta: FockVector
) -> AlgebraElement:
    """Level-k diagonal sum of a rank-one operator, in closed form.

    For xi, eta homogeneous of degree n <= k the compression of the rank-one
    operator (tensored with the identity on the remaining k-n factors) has
    weighted diagonal sum <xi | eta . e^{beta_{k-n}}>_L.
    """
    n = xi.degree()
    if eta.degree() != n:
        raise ValueError("xi and eta must have equal degree")
    if k < n:
        raise ValueError("k must be at least the degree")
    growth = beta_k(module, k - n)
    return left_inner_fock(xi, eta.right_action(growth))


def rank_one_tensor_matrix(
    module: GraphBimodule, k: int, xi: FockVector, eta: FockVector
) -> np.ndarray:
    """Dense matrix of (rank-one on degree n) tensor (identity on k-n factors).

    Direct construction over the length-k path basis; the closed form above
    is tested against phi_k of this matrix.
    """
    n = xi.degree()
    if eta.degree() != n:
        raise ValueError("xi and eta must have equal degree")
    plist = paths(module, k)
    idx = {p: i for i, p in enumerate(plist)}
    M = np.zeros((len(plist), len(plist)), dtype=complex)
    for col, q in enumerate(plist):
        amp = eta.terms.get(q.head(n))
        if amp is None:
            continue
        rest = q.tail(k - n)
        for lam, c in xi.terms.items():
            if lam.s == rest.r:
                M[idx[lam.concat(rest)], col] += c * np.conj(amp)
    return M
