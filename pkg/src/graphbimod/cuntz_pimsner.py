"""Symbol algebra on path pairs, the residue expectation, and the Fock
projection with its compact commutators.

An element is a finite combination of symbols (mu, nu), two paths with a
common source, standing for the partial isometry built from mu times the
adjoint of the one built from nu.  Products reduce by prefix matching, so
the combination is closed under multiplication and adjoint.  The
expectation sends a symbol to zero unless mu equals nu, and weighs the
diagonal by the path weight times the residue coefficient of its class.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .algebra import AlgebraElement
from .bimodule import GraphBimodule
from .fock import Path, paths
from .spectral import GrowthTable, ResidueReport, eta_tilde


class ResidueUncertifiedError(RuntimeError):
    """A residue limit needed by the expectation did not certify."""


@dataclass(frozen=True)
class ResidueConfig:
    k_max: int = 200
    tol: float = 1e-10
    force_iterative: bool = False
    require_converged: bool = True


def _check_pair(mu: Path, nu: Path) -> None:
    if mu.s != nu.s:
        raise ValueError(
            f"paths {mu.label()} and {nu.label()} have different sources"
        )


def _compose_symbol(
    mu1: Path, nu1: Path, mu2: Path, nu2: Path
) -> tuple[Path, Path] | None:
    """Reduce the product of two symbols to a single symbol, or None."""
    if mu2.extends(nu1):
        rest = mu2.tail(len(mu2) - len(nu1))
        return (mu1.concat(rest), nu2)
    if nu1.extends(mu2):
        rest = nu1.tail(len(nu1) - len(mu2))
        return (mu1, nu2.concat(rest))
    return None


class SpanningElement:
    """Finite combination of path-pair symbols with a common-source rule."""

    __slots__ = ("module", "terms")

    def __init__(
        self,
        module: GraphBimodule,
        terms: Mapping[tuple[Path, Path], complex] | None = None,
    ):
        self.module = module
        self.terms: dict[tuple[Path, Path], complex] = {}
        if terms:
            for (mu, nu), c in terms.items():
                _check_pair(mu, nu)
                c = complex(c)
                if c != 0:
                    self.terms[(mu, nu)] = c

    # -- constructors ---------------------------------------------------

    @classmethod
    def symbol(cls, module: GraphBimodule, mu: Path, nu: Path) -> "SpanningElement":
        return cls(module, {(mu, nu): 1.0})

    @classmethod
    def generator(cls, module: GraphBimodule, edge_id: str) -> "SpanningElement":
        e = module.edge(edge_id)
        return cls(module, {(Path((e,), e.r), Path((), e.s)): 1.0})

    @classmethod
    def from_algebra(cls, module: GraphBimodule, a: AlgebraElement) -> "SpanningElement":
        terms = {}
        for v in module.vertices:
            if a[v] != 0:
                p = Path((), v)
                terms[(p, p)] = a[v]
        return cls(module, terms)

    @classmethod
    def identity(cls, module: GraphBimodule) -> "SpanningElement":
        return cls.from_algebra(module, AlgebraElement.one(module.vertices))

    # -- ring structure -------------------------------------------------

    def __add__(self, other: "SpanningElement") -> "SpanningElement":
        self._same(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, 0.0) + c
        return SpanningElement(self.module, out)

    def __sub__(self, other: "SpanningElement") -> "SpanningElement":
        return self + (-1.0) * other

    def __mul__(self, other):
        if isinstance(other, SpanningElement):
            self._same(other)
            out: dict[tuple[Path, Path], complex] = {}
            for (m1, n1), c1 in self.terms.items():
                for (m2, n2), c2 in other.terms.items():
                    res = _compose_symbol(m1, n1, m2, n2)
                    if res is None:
                        continue
                    out[res] = out.get(res, 0.0) + c1 * c2
            return SpanningElement(self.module, out)
        z = complex(other)
        return SpanningElement(
            self.module, {k: z * c for k, c in self.terms.items()}
        )

    def __rmul__(self, other):
        return self * other

    def __neg__(self) -> "SpanningElement":
        return (-1.0) * self

    def adjoint(self) -> "SpanningElement":
        return SpanningElement(
            self.module,
            {(nu, mu): np.conj(c) for (mu, nu), c in self.terms.items()},
        )

    def _same(self, other: "SpanningElement") -> None:
        if other.module is not self.module:
            raise ValueError("elements belong to different modules")

    # -- inspection -----------------------------------------------------

    def degrees(self) -> set[int]:
        return {len(mu) - len(nu) for mu, nu in self.terms}

    def sup_coefficient(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def isclose(self, other: "SpanningElement", tol: float = 1e-12) -> bool:
        self._same(other)
        keys = set(self.terms) | set(other.terms)
        return all(
            abs(self.terms.get(k, 0.0) - other.terms.get(k, 0.0)) <= tol
            for k in keys
        )

    def as_fock_matrix(self, k: int) -> np.ndarray:
        """Level-k compression over the length-k path basis.

        Unbalanced symbols shift the level and are cut off by the
        compression, so only terms with equal path lengths contribute.
        """
        plist = paths(self.module, k)
        idx = {p: i for i, p in enumerate(plist)}
        M = np.zeros((len(plist), len(plist)), dtype=complex)
        by_len: dict[int, list[Path]] = {}
        for (mu, nu), c in self.terms.items():
            n = len(nu)
            if len(mu) != n or n > k:
                continue
            rest_len = k - n
            if rest_len not in by_len:
                by_len[rest_len] = paths(self.module, rest_len)
            for rho in by_len[rest_len]:
                if rho.r != nu.s:
                    continue
                M[idx[mu.concat(rho)], idx[nu.concat(rho)]] += c
        return M

    def __repr__(self) -> str:
        parts = []
        for (mu, nu), c in sorted(
            self.terms.items(),
            key=lambda kv: (kv[0][0].sort_key(), kv[0][1].sort_key()),
        ):
            parts.append(f"{c:.4g}*S[{mu.label()}]S[{nu.label()}]*")
        return f"SpanningElement({' + '.join(parts) or '0'})"


def gauge_scaled(x: SpanningElement, theta: float) -> SpanningElement:
    """Circle action: each symbol picks up exp(i theta (|mu| - |nu|))."""
    return SpanningElement(
        x.module,
        {
            (mu, nu): c * complex(np.exp(1j * theta * (len(mu) - len(nu))))
            for (mu, nu), c in x.terms.items()
        },
    )


def covariance_substitute(module: GraphBimodule, a: AlgebraElement) -> SpanningElement:
    """Difference between a vertex function and its edge-sum replacement.

    These elements generate the kernel of the quotient that identifies a
    vertex projection with the range sum of its edge isometries; any
    reasonable state of the quotient must kill them.
    """
    out = SpanningElement.from_algebra(module, a)
    for g in module.edges:
        coef = a[g.r]
        if coef == 0:
            continue
        p = Path((g,), g.r)
        out = out - coef * SpanningElement.symbol(module, p, p)
    return out


# -- the residue expectation ------------------------------------------------


class ConditionalExpectation:
    """Diagonal expectation weighted by residue coefficients.

    Symbols with mu != nu are sent to zero.  A diagonal symbol (mu, mu)
    contributes its path weight times the residue limit of the class
    (range, source, length) of mu, placed at the range vertex.  Residue
    reports are cached per class; an unconverged limit raises unless the
    configuration says otherwise.
    """

    def __init__(self, module: GraphBimodule, config: ResidueConfig | None = None):
        self.module = module
        self.config = config or ResidueConfig()
        self._reports: dict[tuple[str, str, int], ResidueReport] = {}
        self._table: GrowthTable | None = None

    def residue(self, r: str, s: str, n: int) -> ResidueReport:
        key = (r, s, n)
        if key not in self._reports:
            self._reports[key] = eta_tilde(
                self.module,
                key,
                k_max=self.config.k_max,
                tol=self.config.tol,
                force_iterative=self.config.force_iterative,
            )
        return self._reports[key]

    def coeff(self, mu: Path) -> float:
        rep = self.residue(mu.r, mu.s, len(mu))
        if not rep.converged and self.config.require_converged:
            raise ResidueUncertifiedError(
                f"residue limit for class {rep.target} did not converge "
                f"(method {rep.method}, k_max {rep.k_max})"
            )
        return mu.weight * rep.value

    def phi(self, x: SpanningElement) -> AlgebraElement:
        vals = np.zeros(len(self.module.vertices), dtype=complex)
        for (mu, nu), c in x.terms.items():
            if mu == nu:
                vals[self.module.vertices.index(mu.r)] += c * self.coeff(mu)
        return AlgebraElement(self.module.vertices, vals)

    def finite_level(self, x: SpanningElement, k: int) -> AlgebraElement:
        """Level-k compression average, the finite stage of the limit.

        Equals the diagonal sum of the level-k compression of x divided by
        the k-step index, computed without forming the level matrix.
        """
        if self._table is None or self._table.k_max < k:
            self._table = GrowthTable(self.module, max(k, self.config.k_max))
        vals = np.zeros(len(self.module.vertices), dtype=complex)
        for (mu, nu), c in x.terms.items():
            if mu != nu:
                continue
            if len(mu) > k:
                raise ValueError(f"level {k} below symbol length {len(mu)}")
            ratio = self._table.ratio(mu.s, mu.r, len(mu), k)
            vals[self.module.vertices.index(mu.r)] += c * mu.weight * ratio
        return AlgebraElement(self.module.vertices, vals)

    def partition_defect(self) -> float:
        """Deviation of the weighted edge residues from a partition of one."""
        worst = 0.0
        for v in self.module.vertices:
            total = 0.0
            for g in self.module.edges_with_range(v):
                total += self.coeff(Path((g,), g.r))
            worst = max(worst, abs(total - 1.0))
        return worst


def _expectation_for(
    module: GraphBimodule, config: ResidueConfig | None
) -> ConditionalExpectation:
    cache = getattr(module, "_expectation_cache", None)
    if cache is None:
        cache = {}
        module._expectation_cache = cache
    key = config or ResidueConfig()
    if key not in cache:
        cache[key] = ConditionalExpectation(module, key)
    return cache[key]


def phi_infty(
    module: GraphBimodule,
    x: SpanningElement,
    config: ResidueConfig | None = None,
) -> AlgebraElement:
    """Expectation of a symbol combination onto the vertex algebra."""
    return _expectation_for(module, config).phi(x)


# -- spanning basis, Gram matrices, and the Fock projection ----------------


def spanning_basis(module: GraphBimodule, depth: int) -> list[tuple[Path, Path]]:
    """All symbols with both path lengths at most `depth`, canonically ordered."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    pool: list[Path] = []
    for k in range(depth + 1):
        pool.extend(paths(module, k))
    basis = [(mu, nu) for mu in pool for nu in pool if mu.s == nu.s]
    basis.sort(
        key=lambda pair: (
            len(pair[0]),
            len(pair[1]),
            pair[0].sort_key(),
            pair[1].sort_key(),
        )
    )
    return basis


@dataclass(frozen=True)
class GramData:
    """Vertex-sliced Gram matrices of a spanning family with quotient maps.

    matrices[i] is the Gram matrix of the family under the expectation,
    evaluated at vertex i.  The quotient map of a vertex sends coefficient
    vectors to the quotient by the null space of its slice; ranks of
    operators in the quotient are computed per vertex and summed.
    """

    depth: int
    basis: tuple[tuple[Path, Path], ...]
    vertex_names: tuple[str, ...]
    matrices: np.ndarray
    hermitian_defect: float
    psd_min: tuple[float, ...]
    cutoff: float
    quotient_maps: tuple[np.ndarray, ...]
    gram_ranks: tuple[int, ...]

    def operator_rank(
        self, columns: np.ndarray, rank_tol: float = 1e-10
    ) -> tuple[dict[str, int], int]:
        ranks: dict[str, int] = {}
        total = 0
        for label, Q in zip(self.vertex_names, self.quotient_maps):
            if Q.shape[0] == 0:
                ranks[label] = 0
                continue
            r = int(np.linalg.matrix_rank(Q @ columns, tol=rank_tol))
            ranks[label] = r
            total += r
        return ranks, total

    def isometry_defect(self) -> float:
        """Worst deviation of the plain path block from the identity.

        Path symbols with an empty second leg pair to the point mass at
        their common source when equal and to zero otherwise, so the
        module map from the path space is isometric.  Exact up to the
        residue coefficients at length zero, which every branch fixes
        at one.
        """
        plain = [
            (i, mu) for i, (mu, nu) in enumerate(self.basis) if len(nu) == 0
        ]
        worst = 0.0
        for vi, vname in enumerate(self.vertex_names):
            G = self.matrices[vi]
            for i, mu in plain:
                for j, sg in plain:
                    want = 1.0 if (i == j and mu.s == vname) else 0.0
                    worst = max(worst, abs(G[i, j] - want))
        return worst


def gram(
    module: GraphBimodule,
    depth: int,
    expectation: ConditionalExpectation | None = None,
    cutoff: float = 1e-10,
) -> GramData:
    """Gram matrices G[v, i, j] of the depth-limited spanning family."""
    exp_ = expectation or _expectation_for(module, None)
    basis = spanning_basis(module, depth)
    N = len(basis)
    V = len(module.vertices)
    vidx = {v: i for i, v in enumerate(module.vertices)}
    mats = np.zeros((V, N, N), dtype=complex)
    for i, (mu_i, nu_i) in enumerate(basis):
        for j, (mu_j, nu_j) in enumerate(basis):
            res = _compose_symbol(nu_i, mu_i, mu_j, nu_j)
            if res is None:
                continue
            a, b = res
            if a == b:
                mats[vidx[a.r], i, j] = exp_.coeff(a)
    herm = float(np.max(np.abs(mats - np.conj(np.swapaxes(mats, 1, 2)))))
    psd_min = []
    maps = []
    ranks = []
    for v in range(V):
        H = (mats[v] + mats[v].conj().T) / 2.0
        vals, vecs = np.linalg.eigh(H)
        psd_min.append(float(vals.min()) if N else 0.0)
        keep = vals > cutoff
        Q = (np.sqrt(vals[keep])[:, None] * vecs[:, keep].conj().T)
        maps.append(Q)
        ranks.append(int(keep.sum()))
    return GramData(
        depth=depth,
        basis=tuple(basis),
        vertex_names=tuple(module.vertices),
        matrices=mats,
        hermitian_defect=herm,
        psd_min=tuple(psd_min),
        cutoff=cutoff,
        quotient_maps=tuple(maps),
        gram_ranks=tuple(ranks),
    )


def _projection_matrix(
    module: GraphBimodule,
    basis: Sequence[tuple[Path, Path]],
    exp_: ConditionalExpectation,
) -> np.ndarray:
    idx = {pair: i for i, pair in enumerate(basis)}
    N = len(basis)
    P = np.zeros((N, N), dtype=complex)
    for j, (mu, nu) in enumerate(basis):
        n = len(nu)
        if len(mu) < n:
            continue
        if mu.tail(n) != nu:
            continue
        head = mu.head(len(mu) - n)
        target = (head, Path((), head.s))
        P[idx[target], j] = exp_.coeff(nu)
    return P


@dataclass(frozen=True)
class ProjectionData:
    """Closed-form action of the vacuum-summing projection on the basis."""

    depth: int
    basis: tuple[tuple[Path, Path], ...]
    matrix: np.ndarray
    idempotency_defect: float
    adjoint_defect: float


def projection_p(
    module: GraphBimodule,
    depth: int,
    expectation: ConditionalExpectation | None = None,
    gram_data: GramData | None = None,
) -> ProjectionData:
    """Matrix of the projection onto plain path symbols, with defects.

    A symbol (mu, nu) projects to the path symbol of the head of mu when
    the tail of mu matches nu, scaled by the residue coefficient of nu;
    otherwise to zero.  The adjoint defect measures self-adjointness with
    respect to the vertex Gram slices.
    """
    exp_ = expectation or _expectation_for(module, None)
    if gram_data is None:
        gram_data = gram(module, depth, exp_)
    basis = list(gram_data.basis)
    P = _projection_matrix(module, basis, exp_)
    idem = float(np.max(np.abs(P @ P - P)))
    adj = 0.0
    for G in gram_data.matrices:
        adj = max(adj, float(np.max(np.abs(P.conj().T @ G - G @ P))))
    return ProjectionData(depth, tuple(basis), P, idem, adj)


def theta_projection_matrix(
    module: GraphBimodule,
    depth: int,
    expectation: ConditionalExpectation | None = None,
) -> np.ndarray:
    """Rank-one-sum route to the projection matrix, for cross-checking.

    Builds each column as the sum over plain path symbols of the
    expectation of the adjoint path times the column symbol, evaluated at
    the path source.  Must agree with the closed-form matrix exactly.
    """
    exp_ = expectation or _expectation_for(module, None)
    basis = spanning_basis(module, depth)
    idx = {pair: i for i, pair in enumerate(basis)}
    N = len(basis)
    M = np.zeros((N, N), dtype=complex)
    pool: list[Path] = []
    for k in range(depth + 1):
        pool.extend(paths(module, k))
    for j, (mu, nu) in enumerate(basis):
        for rho in pool:
            empty_s = Path((), rho.s)
            res = _compose_symbol(empty_s, rho, mu, nu)
            if res is None:
                continue
            a, b = res
            if a != b:
                continue
            if a.r != rho.s:
                continue
            row = idx[(rho, Path((), rho.s))]
            M[row, j] += exp_.coeff(a)
    return M


@dataclass(frozen=True)
class CommutatorReport:
    """Commutator of the projection with one edge isometry."""

    edge: str
    depth: int
    discrepancy: float
    ranks: dict[str, int]
    total_rank: int
    predicted: dict[str, int]
    predicted_total: int
    surviving: tuple[tuple[str, str], ...]
    matches: bool


def commutator_check(
    module: GraphBimodule,
    depth: int,
    expectation: ConditionalExpectation | None = None,
    edges: Iterable[str] | None = None,
    rank_tol: float = 1e-10,
    cutoff: float = 1e-10,
) -> tuple[CommutatorReport, ...]:
    """Compare the direct commutator with its closed form, edge by edge.

    The direct route multiplies matrices of the projection at depth+1 and
    depth around the edge isometry; the closed form is supported on
    symbols of degree -1 whose adjoint path is the edge followed by the
    plain path.  Ranks are taken in the Gram quotient at depth+1, per
    vertex, and compared against the structural prediction: one at the
    edge's range vertex when any surviving coefficient exceeds rank_tol.
    """
    exp_ = expectation or _expectation_for(module, None)
    cols = spanning_basis(module, depth)
    rows = spanning_basis(module, depth + 1)
    col_idx = {pair: i for i, pair in enumerate(cols)}
    row_idx = {pair: i for i, pair in enumerate(rows)}
    P_low = _projection_matrix(module, cols, exp_)
    P_high = _projection_matrix(module, rows, exp_)
    gram_high = gram(module, depth + 1, exp_, cutoff)
    edge_ids = list(edges) if edges is not None else [g.id for g in module.edges]
    reports = []
    for gid in edge_ids:
        g = module.edge(gid)
        S = np.zeros((len(rows), len(cols)), dtype=complex)
        for (rho, sigma), j in col_idx.items():
            if rho.r != g.s:
                continue
            lifted = Path((g,) + rho.edges, g.r)
            S[row_idx[(lifted, sigma)], j] = 1.0
        direct = P_high @ S - S @ P_low
        formula = np.zeros_like(direct)
        vac = Path((), g.r)
        vac_row = row_idx[(vac, vac)]
        surviving = []
        for (rho, sigma), j in col_idx.items():
            if len(sigma) != len(rho) + 1:
                continue
            if sigma.edges[0] != g:
                continue
            if sigma.tail(len(sigma) - 1) != rho:
                continue
            coef = exp_.coeff(sigma)
            formula[vac_row, j] = coef
            if abs(coef) > rank_tol:
                surviving.append((rho.label(), sigma.label()))
        discrepancy = float(np.max(np.abs(direct - formula)))
        ranks, total = gram_high.operator_rank(direct, rank_tol)
        predicted = {v: 0 for v in module.vertices}
        predicted[g.r] = 1 if surviving else 0
        predicted_total = sum(predicted.values())
        matches = ranks == predicted and total == predicted_total
        reports.append(
            CommutatorReport(
                edge=gid,
                depth=depth,
                discrepancy=discrepancy,
                ranks=ranks,
                total_rank=total,
                predicted=predicted,
                predicted_total=predicted_total,
                surviving=tuple(sorted(surviving)),
                matches=matches,
            )
        )
    return tuple(reports)
