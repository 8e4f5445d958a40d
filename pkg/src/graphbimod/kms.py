"""Time evolution from the index weights and the traces it fixes.

A path scales under the flow by the product of index values along its
range vertices; the flow rotates a symbol by the ratio of the two path
scales.  States built from vertex weights satisfy the exchange relation
for the flow exactly on symbols; descending to the quotient by the
covariance relations additionally requires the weights to reproduce
themselves under the index-normalized edge sum, which is solved here
exactly in rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .algebra import AlgebraElement
from .bimodule import GraphBimodule, ModuleVector, index_element, right_inner
from .cuntz_pimsner import SpanningElement
from .fock import Path


def d_weight(module: GraphBimodule, path: Path) -> float:
    """Flow scale of a path: product of index values at the range vertices."""
    key = path.ids
    cached = module._dweight_cache.get(key)
    if cached is not None:
        return cached
    beta = index_element(module)
    out = 1.0
    for e in path.edges:
        out *= float(beta[e.r].real)
    module._dweight_cache[key] = out
    return out


def gamma(module: GraphBimodule, x: SpanningElement, t: float) -> SpanningElement:
    """Flow at time t: symbol (mu, nu) rotates by the scale ratio to the power it."""
    out = {}
    for (mu, nu), c in x.terms.items():
        angle = math.log(d_weight(module, mu)) - math.log(d_weight(module, nu))
        out[(mu, nu)] = c * complex(np.exp(1j * t * angle))
    return SpanningElement(module, out)


def gamma_minus_i(module: GraphBimodule, x: SpanningElement) -> SpanningElement:
    """Analytic continuation of the flow to -i: scales by the ratio itself."""
    out = {}
    for (mu, nu), c in x.terms.items():
        out[(mu, nu)] = c * d_weight(module, mu) / d_weight(module, nu)
    return SpanningElement(module, out)


@dataclass(frozen=True)
class TraceState:
    """Vertex weights defining a state on the symbol algebra.

    The value of a diagonal symbol (mu, mu) is the weight of the source of
    mu divided by the flow scale of mu; off-diagonal symbols get zero.
    Weights are kept as exact fractions.
    """

    module: GraphBimodule = field(repr=False)
    weights: Mapping[str, Fraction]

    def weight(self, v: str) -> Fraction:
        return self.weights[v]

    def float_weights(self) -> dict[str, float]:
        return {v: float(self.weights[v]) for v in self.module.vertices}

    def mass(self) -> Fraction:
        return sum(self.weights[v] for v in self.module.vertices)

    def algebra_element(self) -> AlgebraElement:
        return AlgebraElement.from_dict(self.module.vertices, self.float_weights())

    def evaluate_algebra(self, a: AlgebraElement) -> complex:
        return sum(a[v] * float(self.weights[v]) for v in self.module.vertices)

    def evaluate(self, x: SpanningElement) -> complex:
        total = 0.0 + 0.0j
        for (mu, nu), c in x.terms.items():
            if mu == nu:
                total += c * float(self.weights[mu.s]) / d_weight(self.module, mu)
        return total


def state_phi_d(trace: TraceState, x: SpanningElement) -> complex:
    return trace.evaluate(x)


def tr_phi(trace: TraceState, xi: ModuleVector, eta: ModuleVector) -> complex:
    """Pairing of two module vectors through the state on the vertex algebra."""
    return trace.evaluate_algebra(right_inner(eta, xi))


def kms_check(
    module: GraphBimodule,
    trace: TraceState,
    x: SpanningElement,
    y: SpanningElement,
) -> float:
    """Exchange defect |phi(xy) - phi(gamma_{-i}(y) x)| for one pair."""
    lhs = trace.evaluate(x * y)
    rhs = trace.evaluate(gamma_minus_i(module, y) * x)
    return abs(lhs - rhs)


# -- exact solve of the descent condition ----------------------------------


def _rational_nullspace(rows: list[list[Fraction]], n: int) -> list[list[Fraction]]:
    """Nullspace basis of a rational matrix by Gauss-Jordan elimination."""
    mat = [row[:] for row in rows]
    pivots: list[int] = []
    r = 0
    for col in range(n):
        pivot = None
        for i in range(r, len(mat)):
            if mat[i][col] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        inv = mat[r][col]
        mat[r] = [x / inv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(col)
        r += 1
        if r == len(mat):
            break
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * n
        vec[fc] = Fraction(1)
        for pr, pc in enumerate(pivots):
            vec[pc] = -mat[pr][fc]
        basis.append(vec)
    return basis


@dataclass(frozen=True)
class TraceFamily:
    """All states whose weights survive the quotient descent.

    basis holds one normalized weight vector per independent direction;
    canonical is their average (the uniform state on a connected graph
    with unit weights).  feasible is False when no nonnegative nonzero
    solution was found, in which case canonical is None and dimension -1.
    """

    module: GraphBimodule = field(repr=False)
    dimension: int = -1
    basis: tuple[dict[str, Fraction], ...] = ()
    canonical: TraceState | None = None
    feasible: bool = False


def invariant_traces(module: GraphBimodule) -> TraceFamily:
    """Solve w_v * index(v) = sum of w over edge sources at v, exactly.

    The system splits over undirected components; each component either
    supports a unique normalized solution, supports none, or (for
    disconnected graphs) contributes an independent simplex direction.
    Sign-indefinite null directions are discarded since states need
    nonnegative weights.
    """
    verts = list(module.vertices)
    vidx = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for g in module.edges:
        a, b = find(vidx[g.r]), find(vidx[g.s])
        if a != b:
            parent[a] = b
    comps: dict[int, list[int]] = {}
    for i in range(n):
        comps.setdefault(find(i), []).append(i)

    index_exact = [Fraction(0)] * n
    for g in module.edges:
        index_exact[vidx[g.r]] += Fraction(g.weight)

    generators: list[list[Fraction]] = []
    for members in comps.values():
        local = {v: i for i, v in enumerate(members)}
        m = len(members)
        rows = []
        for v in members:
            row = [Fraction(0)] * m
            row[local[v]] += index_exact[v]
            for g in module.edges_with_range(verts[v]):
                row[local[vidx[g.s]]] -= 1
            rows.append(row)
        for vec in _rational_nullspace(rows, m):
            if all(x >= 0 for x in vec) or all(x <= 0 for x in vec):
                total = sum(vec)
                if total == 0:
                    continue
                norm = [x / total for x in vec]
                full = [Fraction(0)] * n
                for v, i in local.items():
                    full[v] = norm[i]
                generators.append(full)

    if not generators:
        return TraceFamily(module)
    count = len(generators)
    canonical_vec = [
        sum(g[i] for g in generators) / count for i in range(n)
    ]
    canonical = TraceState(
        module, {verts[i]: canonical_vec[i] for i in range(n)}
    )
    basis = tuple({verts[i]: g[i] for i in range(n)} for g in generators)
    return TraceFamily(module, count - 1, basis, canonical, True)
