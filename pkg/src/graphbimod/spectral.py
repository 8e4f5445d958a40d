"""Growth of the weighted adjacency matrix and residue-type limits.

Everything here is about the sequence B^k 1 (B the weighted adjacency in
range-by-source convention) and the ratios

    c_k(r, s, n) = (B^{k-n} 1)_s / (B^k 1)_r

whose limits give the residue coefficients of the series built on the
k-step index.  For primitive B the limit has a closed form through the
Perron eigenvectors; in general it is decided structurally where possible
and otherwise estimated by polynomial extrapolation in 1/k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraElement
from .bimodule import GraphBimodule
from .fock import Path, beta_k, paths, phi_k

_POWER_TOL = 1e-14
_POWER_MAX_ITER = 20_000


def _wielandt_primitive(B: np.ndarray) -> bool:
    """Primitivity via the Wielandt exponent n^2 - 2n + 2 on the 0/1 pattern."""
    n = B.shape[0]
    M = (B > 0).astype(np.int8)
    exponent = n * n - 2 * n + 2
    P = np.eye(n, dtype=np.int8)
    base = M
    e = exponent
    while e > 0:
        if e & 1:
            P = np.clip(P @ base, 0, 1).astype(np.int8)
        base = np.clip(base @ base, 0, 1).astype(np.int8)
        e >>= 1
    return bool(np.all(P > 0))


def _power_iteration(M: np.ndarray) -> tuple[float, np.ndarray, int, bool]:
    """Leading eigenpair of a nonnegative matrix by normalized iteration."""
    n = M.shape[0]
    v = np.full(n, 1.0 / n)
    for it in range(1, _POWER_MAX_ITER + 1):
        w = M @ v
        norm = w.sum()
        if norm <= 0:
            return 0.0, v, it, False
        w = w / norm
        if np.max(np.abs(w - v)) < _POWER_TOL:
            v = w
            lam = float(v @ M @ v) / float(v @ v)
            return lam, v / np.linalg.norm(v), it, True
        v = w
    lam = float(v @ M @ v) / float(v @ v)
    return lam, v / np.linalg.norm(v), _POWER_MAX_ITER, False


@dataclass(frozen=True)
class PFData:
    """Perron data of the weighted adjacency matrix.

    `eigenvector` is the leading unit eigenvector of the transpose (the
    functional that picks out the growth direction), `right_eigenvector`
    the one of B itself.  The rate constants certify geometric convergence
    of the normalized transpose powers to the orthogonal projection Q when
    that convergence holds; they are meaningful as a certificate only when
    B is normal, and are None when B is not primitive.
    """

    spectral_radius: float
    eigenvector: np.ndarray
    right_eigenvector: np.ndarray
    projection: np.ndarray
    primitive: bool
    rate_alpha: float | None
    rate_C: float | None
    iterations: int
    converged: bool


def pf_data(module: GraphBimodule) -> PFData:
    B = module.adjacency()
    n = B.shape[0]
    primitive = _wielandt_primitive(B)
    lam, x, it_x, ok_x = _power_iteration(B.T)
    lam_r, w, it_w, ok_w = _power_iteration(B)
    converged = ok_x and ok_w
    Q = np.outer(x, x)
    if n == 1:
        return PFData(
            spectral_radius=float(B[0, 0]),
            eigenvector=np.array([1.0]),
            right_eigenvector=np.array([1.0]),
            projection=np.array([[1.0]]),
            primitive=primitive,
            rate_alpha=0.0,
            rate_C=0.0,
            iterations=max(it_x, it_w),
            converged=True,
        )
    if not (primitive and converged):
        return PFData(
            spectral_radius=lam,
            eigenvector=x,
            right_eigenvector=w,
            projection=Q,
            primitive=primitive,
            rate_alpha=None,
            rate_C=None,
            iterations=max(it_x, it_w),
            converged=converged,
        )
    # smallest l with ||(1-Q)(B^T/r)^l(1-Q)|| < 1, then a geometric envelope
    # constant covering the powers below l
    comp = np.eye(n) - Q
    S = B.T / lam
    power = np.eye(n)
    norms = []
    l = None
    for p in range(0, 400):
        norms.append(float(np.linalg.norm(comp @ power @ comp, 2)))
        if p >= 1 and norms[p] < 1.0:
            l = p
            break
        power = power @ S
    if l is None:
        return PFData(lam, x, w, Q, primitive, None, None, max(it_x, it_w), False)
    alpha = norms[l] ** (1.0 / l)
    C = max(norms[p] / alpha**p for p in range(l))
    C = max(C, norms[l] / alpha**l)
    return PFData(lam, x, w, Q, primitive, alpha, C, max(it_x, it_w), converged)


@dataclass(frozen=True)
class RateCheck:
    passed: bool
    worst_ratio: float
    first_failure: int | None
    k_max: int
    alpha: float
    C: float
    precision_floor: float


def verify_rate_certificate(
    module: GraphBimodule, k_max: int = 100, slack: float = 1e-9
) -> RateCheck:
    """Check ||(B^T/r)^k - Q|| <= C alpha^k for k = 1..k_max.

    Only meaningful when the normalized powers actually converge to the
    orthogonal projection, i.e. when the adjacency matrix is normal.  The
    geometric bound quickly drops below what repeated matrix products can
    resolve, so a precision floor growing linearly with k is added to the
    bound before comparing.
    """
    data = pf_data(module)
    if not data.primitive:
        raise ValueError("rate certificate requires a primitive adjacency matrix")
    if data.rate_alpha is None or data.rate_C is None:
        raise ValueError("rate constants unavailable (power iteration failed)")
    B = module.adjacency()
    S = B.T / data.spectral_radius
    eps = float(np.finfo(float).eps)
    power = np.eye(B.shape[0])
    worst = 0.0
    first = None
    floor = 0.0
    for k in range(1, k_max + 1):
        power = power @ S
        lhs = float(np.linalg.norm(power - data.projection, 2))
        floor = (32.0 + 8.0 * k) * eps
        bound = data.rate_C * data.rate_alpha**k + floor
        ratio = lhs / bound
        if ratio > worst:
            worst = ratio
        if ratio > 1.0 + slack and first is None:
            first = k
    return RateCheck(
        first is None, worst, first, k_max, data.rate_alpha, data.rate_C, floor
    )


class GrowthTable:
    """Normalized powers B^k 1 with cumulative log norms, overflow safe."""

    def __init__(self, module: GraphBimodule, k_max: int):
        B = module.adjacency()
        n = B.shape[0]
        self.module = module
        self.k_max = k_max
        vecs = np.empty((k_max + 1, n))
        logs = np.empty(k_max + 1)
        v = np.ones(n)
        acc = 0.0
        vecs[0] = v
        logs[0] = 0.0
        for k in range(1, k_max + 1):
            v = B @ v
            m = float(np.max(v))
            v = v / m
            acc += math.log(m)
            vecs[k] = v
            logs[k] = acc
        self.vectors = vecs
        self.log_norms = logs

    def ratio(self, s_vertex: str, r_vertex: str, n: int, k: int) -> float:
        """(B^{k-n} 1)_s / (B^k 1)_r without forming the raw powers."""
        if not 0 <= n <= k <= self.k_max:
            raise ValueError("need 0 <= n <= k <= k_max")
        si = self.module.vertices.index(s_vertex)
        ri = self.module.vertices.index(r_vertex)
        scale = math.exp(self.log_norms[k - n] - self.log_norms[k])
        return scale * self.vectors[k - n][si] / self.vectors[k][ri]

    def value(self, vertex: str, k: int) -> float:
        """Raw (B^k 1)_v; overflows for large k, use ratio() instead."""
        i = self.module.vertices.index(vertex)
        return math.exp(self.log_norms[k]) * float(self.vectors[k][i])


# -- condensation growth profile ------------------------------------------


def _strong_components(succ: list[list[int]], n: int) -> list[int]:
    """Kosaraju with explicit stacks; returns a component index per node."""
    order: list[int] = []
    seen = [False] * n
    for root in range(n):
        if seen[root]:
            continue
        stack = [(root, 0)]
        seen[root] = True
        while stack:
            node, ptr = stack.pop()
            if ptr < len(succ[node]):
                stack.append((node, ptr + 1))
                nxt = succ[node][ptr]
                if not seen[nxt]:
                    seen[nxt] = True
                    stack.append((nxt, 0))
            else:
                order.append(node)
    pred: list[list[int]] = [[] for _ in range(n)]
    for v in range(n):
        for w in succ[v]:
            pred[w].append(v)
    comp = [-1] * n
    label = 0
    for root in reversed(order):
        if comp[root] >= 0:
            continue
        stack = [root]
        comp[root] = label
        while stack:
            node = stack.pop()
            for w in pred[node]:
                if comp[w] < 0:
                    comp[w] = label
                    stack.append(w)
        label += 1
    return comp


@dataclass(frozen=True)
class GrowthProfile:
    """Per-vertex growth exponents of (B^k 1)_v ~ k^degree * radius^k.

    radius is the largest spectral radius among strongly connected
    components reachable from the vertex (walking range to source), and
    degree counts the longest reachable chain of components attaining that
    radius, minus one.
    """

    radius: dict[str, float]
    degree: dict[str, int]


def growth_profile(module: GraphBimodule, rel_tol: float = 1e-9) -> GrowthProfile:
    B = module.adjacency()
    n = B.shape[0]
    succ: list[list[int]] = [[] for _ in range(n)]
    for v in range(n):
        for w in range(n):
            if B[v, w] > 0:
                succ[v].append(w)
    comp = _strong_components(succ, n)
    n_comp = max(comp) + 1
    members: list[list[int]] = [[] for _ in range(n_comp)]
    for v, c in enumerate(comp):
        members[c].append(v)
    comp_radius = []
    for c in range(n_comp):
        idx = members[c]
        sub = B[np.ix_(idx, idx)]
        if len(idx) == 1 and sub[0, 0] == 0:
            comp_radius.append(0.0)
        else:
            comp_radius.append(float(np.max(np.abs(np.linalg.eigvals(sub)))))
    comp_succ: list[set[int]] = [set() for _ in range(n_comp)]
    for v in range(n):
        for w in succ[v]:
            if comp[v] != comp[w]:
                comp_succ[comp[v]].add(comp[w])
    # reachable radius and radius-attaining chain count, memoized over the DAG
    best_radius = [-1.0] * n_comp
    chain = [-1] * n_comp

    def close(c: int) -> None:
        stack = [(c, False)]
        while stack:
            node, expanded = stack.pop()
            if best_radius[node] >= 0:
                continue
            if not expanded:
                stack.append((node, True))
                for d in comp_succ[node]:
                    if best_radius[d] < 0:
                        stack.append((d, False))
            else:
                r = comp_radius[node]
                m = 0
                for d in comp_succ[node]:
                    if best_radius[d] > r:
                        r = best_radius[d]
                for d in comp_succ[node]:
                    if math.isclose(best_radius[d], r, rel_tol=rel_tol, abs_tol=1e-12):
                        m = max(m, chain[d])
                if math.isclose(comp_radius[node], r, rel_tol=rel_tol, abs_tol=1e-12):
                    m += 1
                best_radius[node] = r
                chain[node] = m

    for c in range(n_comp):
        close(c)
    radius = {}
    degree = {}
    for i, v in enumerate(module.vertices):
        c = comp[i]
        radius[v] = best_radius[c]
        degree[v] = max(chain[c] - 1, 0)
    return GrowthProfile(radius, degree)


# -- residue limits --------------------------------------------------------


@dataclass(frozen=True)
class ResidueReport:
    """Limit of the growth ratio for one (range, source, length) class."""

    target: tuple[str, str, int]
    value: float
    converged: bool
    method: str
    delta: float | None
    r_squared: float | None
    samples: tuple[tuple[int, float], ...]
    residuals: tuple[tuple[int, float], ...]
    rate_alpha: float | None
    k_max: int
    tol: float


def _resolve_target(module: GraphBimodule, target) -> tuple[str, str, int]:
    if isinstance(target, Path):
        return (target.r, target.s, len(target))
    r, s, n = target
    module.vertices.index(r)
    module.vertices.index(s)
    n = int(n)
    if n < 0:
        raise ValueError("path length must be nonnegative")
    return (r, s, n)


def _target_realized(module: GraphBimodule, r: str, s: str, n: int) -> bool:
    if n == 0:
        return r == s
    M = (module.adjacency() > 0).astype(np.int8)
    P = np.eye(M.shape[0], dtype=np.int8)
    for _ in range(n):
        P = np.clip(P @ M, 0, 1).astype(np.int8)
    return bool(P[module.vertices.index(r), module.vertices.index(s)])


def _fit_decay(samples, value, k_max):
    """Least-squares slope of log residual against log k over the top half."""
    xs, ys = [], []
    lo = max(1, k_max // 2)
    residuals = []
    for k, c in samples:
        res = abs(c - value)
        residuals.append((k, res))
        if k >= lo and res > 1e-14:
            xs.append(math.log(k))
            ys.append(math.log(res))
    if len(xs) < 3:
        return math.inf, None, tuple(residuals)
    xs = np.array(xs)
    ys = np.array(ys)
    A = np.stack([xs, np.ones_like(xs)], axis=1)
    coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((ys - pred) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return float(-coef[0]), r2, tuple(residuals)


def _extrapolation_nodes(n: int, k_max: int, count: int = 12) -> list[int]:
    """Geometrically spaced sample indices, largest first, then reversed."""
    floor = max(n + 1, 6)
    ks = []
    k = float(k_max)
    while len(ks) < count:
        ki = int(round(k))
        if ki < floor:
            break
        if not ks or ki < ks[-1]:
            ks.append(ki)
        k /= math.sqrt(2.0)
    if len(ks) < 4:
        raise ValueError("k_max too small for the requested length")
    return ks[::-1]


def _extrapolate_to_zero(xs: list[float], ys: list[float]) -> tuple[float, float]:
    """Neville evaluation at 0 with an error estimate from the last column."""
    m = len(xs)
    T = list(ys)
    prev_diag = T[0]
    for j in range(1, m):
        for i in range(m - 1, j - 1, -1):
            T[i] = T[i] + (T[i] - T[i - 1]) * xs[i] / (xs[i - j] - xs[i])
        if j == m - 2:
            prev_diag = T[m - 1]
    est = abs(T[m - 1] - prev_diag)
    return T[m - 1], est


def eta_tilde(
    module: GraphBimodule,
    target,
    k_max: int = 200,
    tol: float = 1e-10,
    force_iterative: bool = False,
) -> ResidueReport:
    """Residue coefficient for a path class, with convergence diagnostics.

    `target` is a Path or an (r, s, n) triple; the ratio depends on the
    path only through its endpoints and length.  Primitive graphs get the
    closed form r^{-n} w_s / w_r from the right Perron eigenvector of the
    adjacency matrix.  Otherwise a stationary sequence is read off
    directly, a strict growth gap forces the limit 0 exactly, and the
    remaining cases are extrapolated polynomially in 1/k; a sequence with
    no limit (oscillating growth coefficients) is reported unconverged.
    """
    r, s, n = _resolve_target(module, target)
    if not _target_realized(module, r, s, n):
        raise ValueError(f"no path of length {n} from source {s!r} to range {r!r}")
    if k_max < n + 8:
        raise ValueError("k_max too small for the requested length")
    table = GrowthTable(module, k_max)
    samples = tuple((k, table.ratio(s, r, n, k)) for k in range(n, k_max + 1))
    data = pf_data(module)
    rate_alpha = data.rate_alpha

    if data.primitive and data.converged and not force_iterative:
        w = data.right_eigenvector
        wi = {v: float(w[i]) for i, v in enumerate(module.vertices)}
        value = data.spectral_radius ** (-n) * wi[s] / wi[r]
        converged, method = True, "closed_form"
    else:
        lookup = dict(samples)
        vc = lookup[k_max]
        scale = max(1.0, abs(vc))
        if all(abs(c - vc) <= tol * scale for _, c in samples[len(samples) // 4 :]):
            value, converged, method = vc, True, "stationary"
        else:
            profile = growth_profile(module)
            gap = profile.radius[s] < profile.radius[r] * (1.0 - 1e-9) or (
                math.isclose(profile.radius[s], profile.radius[r], rel_tol=1e-9)
                and profile.degree[s] < profile.degree[r]
            )
            if gap:
                value, converged, method = 0.0, True, "structural_zero"
            else:
                ks = _extrapolation_nodes(n, k_max)
                xs = [1.0 / k for k in ks]
                ys = [lookup[k] for k in ks]
                value, est = _extrapolate_to_zero(xs, ys)
                value = float(value)
                converged = bool(est <= max(tol * max(1.0, abs(value)), 1e-13))
                method = "extrapolation"

    delta, r2, residuals = _fit_decay(samples, value, k_max)
    return ResidueReport(
        (r, s, n), value, converged, method, delta, r2,
        samples, residuals, rate_alpha, k_max, tol,
    )


@dataclass(frozen=True)
class PartialSumReport:
    """Truncation of the weighted series of level compressions."""

    value: AlgebraElement
    per_level: tuple[AlgebraElement, ...]
    s: complex
    K: int
    norm_estimate: float
    tail_coefficient: float
    tail_bound: float


def phi_s_partial(module: GraphBimodule, T, s: complex, K: int) -> PartialSumReport:
    """Sum over k <= K of the level-k diagonal compression of T, scaled by
    the inverse index and the weight (1 + k^2)^{-s/2}.

    T is a symbol combination (anything with a `terms` mapping of path
    pairs to coefficients) or a callable k -> ndarray over the level-k path
    basis.  Symbol input never builds a path basis, so K is unrestricted;
    callable input is summed by brute force.  The discarded tail is bounded
    in sup norm by norm_estimate times K^{1 - Re s} / (Re s - 1), which
    requires Re s > 1.  For symbol input norm_estimate is the triangle
    bound over terms, for callable input the largest compressed 2-norm
    seen, so only the former is a certified bound.
    """
    sigma = complex(s).real
    if sigma <= 1.0:
        raise ValueError("the tail bound needs Re(s) > 1")
    if K < 0:
        raise ValueError("K must be nonnegative")
    total = AlgebraElement.zero(module.vertices)
    per_level = []
    norm_est = 0.0
    vidx = {v: i for i, v in enumerate(module.vertices)}
    terms = getattr(T, "terms", None)
    if terms is not None:
        # symbol combination: the level sum has a closed form, so no path
        # basis is ever built and K can exceed any feasible matrix size
        table = GrowthTable(module, K)
        norm_est = float(sum(abs(c) for c in terms.values()))
        for k in range(K + 1):
            vals = np.zeros(len(module.vertices), dtype=complex)
            for (mu, nu), c in terms.items():
                if mu != nu or len(mu) > k:
                    continue
                ratio = table.ratio(mu.s, mu.r, len(mu), k)
                vals[vidx[mu.r]] += c * mu.weight * ratio
            weight = (1.0 + k * k) ** (-complex(s) / 2.0)
            term = AlgebraElement(module.vertices, vals) * weight
            per_level.append(term)
            total = total + term
    else:
        if not callable(T):
            raise TypeError("T must be a symbol combination or callable k -> matrix")
        for k in range(K + 1):
            M = np.asarray(T(k), dtype=complex)
            count = len(paths(module, k))
            if M.shape != (count, count):
                raise ValueError(f"level {k} matrix must be {count}x{count}")
            norm_est = max(norm_est, float(np.linalg.norm(M, 2)))
            weight = (1.0 + k * k) ** (-complex(s) / 2.0)
            term = phi_k(module, k, M) / beta_k(module, k) * weight
            per_level.append(term)
            total = total + term
    tail_coeff = (max(K, 1)) ** (1.0 - sigma) / (sigma - 1.0)
    return PartialSumReport(
        total, tuple(per_level), complex(s), K, norm_est, tail_coeff,
        tail_coeff * norm_est,
    )
