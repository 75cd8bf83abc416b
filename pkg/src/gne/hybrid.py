"""Sequential Erdos-Renyi graph whose vertex names copy from linked parents.

Vertex n (0-based) links to each earlier vertex independently with
probability alpha/N; each coordinate of its name is then copied from a
uniform choice among a fresh uniform letter and the linked parents' letters
at that coordinate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .entropy import RateConstants, bernoulli_entropy, h_A, J_table
from .errors import ValidationError
from .graph import Dag, GraphWithNames, name_length
from .models import EntropyReport


@dataclass(frozen=True)
class HybridParams:
    N: int
    alpha: float
    beta: float
    A: int
    seed: int = 0
    ordered: bool = True
    tag = "hybrid"

    def validate(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValidationError("N must be an integer >= 2")
        if not 0 <= self.alpha <= self.N:
            raise ValidationError("alpha must satisfy 0 <= alpha <= N")
        if not self.beta > 1:
            raise ValidationError("beta must be > 1")
        if int(self.A) != self.A or not 2 <= self.A <= 36:
            raise ValidationError("A must be an integer in [2, 36]")

    @property
    def L(self) -> int:
        return name_length(self.N, self.beta, self.A)


@dataclass
class CopyTrace:
    """Where each letter came from, plus per-step link bookkeeping.

    ``origins[v, u]`` is the vertex whose original letter sits at coordinate
    u of vertex v. ``link_counts[v]`` is the number of earlier vertices v
    linked to. ``is_tree[v]`` says whether the set of vertices reachable from
    v along decreasing paths forms a tree.
    """

    origins: np.ndarray
    link_counts: np.ndarray
    is_tree: np.ndarray


def _distinct(rng, n: int, q: int) -> np.ndarray:
    """q distinct uniform values from range(n); cheap for q << n."""
    if q * 4 > n:
        return np.sort(rng.choice(n, size=q, replace=False))
    while True:
        s = np.unique(rng.integers(0, n, size=q))
        if s.size == q:
            return s


def gen_hybrid(params: HybridParams):
    """Run the construction. Returns ``(graph, dag, trace)``."""
    params.validate()
    rng = np.random.default_rng(params.seed)
    N, A, L = params.N, params.A, params.L
    p = params.alpha / N

    original = rng.integers(0, A, size=(N, L), dtype=np.uint8)
    pick = rng.random(size=(N, L))
    Q = np.zeros(N, dtype=np.int64)
    Q[1:] = rng.binomial(np.arange(1, N), p)

    names = original.copy()
    origins = np.repeat(np.arange(N, dtype=np.int32)[:, None], L, axis=1)
    is_tree = np.ones(N, dtype=bool)
    reach: list[frozenset | None] = [None] * N  # None means {v}
    edge_chunks = []
    cols = np.arange(L)

    for v in np.flatnonzero(Q):
        q = int(Q[v])
        parents = _distinct(rng, int(v), q)
        edge_chunks.append(np.stack([parents, np.full(q, v)], axis=1))
        # candidate 0 is the original letter, candidate c >= 1 is parent c-1
        choice = np.minimum((pick[v] * (q + 1)).astype(np.int64), q)
        copied = choice > 0
        src = parents[choice[copied] - 1]
        names[v, copied] = names[src, cols[copied]]
        origins[v, copied] = origins[src, cols[copied]]

        sets = [reach[i] or frozenset((int(i),)) for i in parents]
        tree = bool(np.all(is_tree[parents]))
        if tree:
            total = sum(len(s) for s in sets)
            union = frozenset().union(*sets)
            tree = len(union) == total
        else:
            union = frozenset().union(*sets)
        reach[v] = union | {int(v)}
        is_tree[v] = tree

    edges = np.concatenate(edge_chunks) if edge_chunks else np.zeros((0, 2), np.int64)
    edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))] if edges.size else edges
    graph = GraphWithNames(A, L, names, edges, ordered=params.ordered)
    dag = Dag(N, edges[:, ::-1].copy())
    trace = CopyTrace(origins, Q, is_tree)
    return graph, dag, trace


def rename_duplicates(graph: GraphWithNames, seed: int = 0):
    """Give fresh names to all but the earliest holder of each repeated name.

    Returns ``(new_graph, renamed_count)``. Fresh names are uniform among
    words not already in use.
    """
    N, A, L = graph.N, graph.A, graph.L
    if A**L < N:
        raise ValidationError(f"name space A^L = {A**L} is smaller than N = {N}")
    names = graph.names.copy()
    _, first = np.unique(names, axis=0, return_index=True)
    later = np.setdiff1d(np.arange(N), first)
    if later.size == 0:
        return GraphWithNames(A, L, names, graph.edges.copy(), graph.ordered), 0
    rng = np.random.default_rng(seed)
    used = {row.tobytes() for row in names[first]}
    for v in later:
        while True:
            cand = rng.integers(0, A, size=L, dtype=np.uint8)
            key = cand.tobytes()
            if key not in used:
                break
        used.add(key)
        names[v] = cand
    return GraphWithNames(A, L, names, graph.edges.copy(), graph.ordered), int(later.size)


# --- rates and series ---------------------------------------------------------

def _series_K(alpha: float, tol: float) -> int:
    """Smallest K whose tail bound sum_{k>K} alpha^k / (k+1)! is below tol."""
    K = 0
    while True:
        # first omitted term alpha^{K+1}/(K+2)!, geometric tail ratio alpha/(K+3)
        ratio = alpha / (K + 3)
        if ratio < 1:
            first = math.exp((K + 1) * math.log(alpha) - math.lgamma(K + 3)) if alpha > 0 else 0.0
            if first / (1 - ratio) < tol:
                return K
        K += 1


def rate_hybrid(constants: RateConstants, ordered: bool = True, tol: float = 1e-12,
                K: int | None = None) -> float:
    """Entropy rate of the hybrid model; unordered is ordered minus one.

    The series is truncated at ``K`` terms when given, else where the tail
    bound drops below ``tol``.
    """
    if tol <= 0:
        raise ValidationError("tol must be > 0")
    alpha, beta, A = constants.alpha, constants.beta, constants.A
    if alpha is None or beta is None or A is None:
        raise ValidationError("rate_hybrid needs alpha, beta and A")
    if K is None:
        K = _series_K(alpha, tol / max(beta, 1.0))
    Jk = J_table(alpha, K)
    lnA = math.log(A)
    terms = []
    for k in range(K + 1):
        log_pow = k * math.log(alpha) if alpha > 0 else (0.0 if k == 0 else -math.inf)
        if log_pow == -math.inf:
            continue
        terms.append(math.exp(log_pow - math.lgamma(k + 1)) * Jk[k] * h_A(A, k) / lnA)
    r = alpha / 2 + beta * math.fsum(terms)
    return r if ordered else r - 1.0


@dataclass(frozen=True)
class ESeries:
    per_step: np.ndarray   # name-entropy approximation e_{N,n}, n = 0..N-1
    names_total: float
    edges_total: float

    @property
    def total(self) -> float:
        return self.names_total + self.edges_total


def e_series(N: int, constants: RateConstants, L: int | None = None,
             K: int | None = None, tol: float = 1e-12) -> ESeries:
    """Finite-N approximation of the ordered entropy, step by step.

    Step n (0-based, n earlier vertices) contributes
    ``len * sum_k alpha^k h_A(k) C(n,k) / N^k * exp(-alpha n / N)`` where
    ``len`` is ``beta log_A N`` or, when ``L`` is given, the actual name
    length L. The edge total is ``C(N,2) * bern_ent(alpha/N)``.
    """
    if N < 2:
        raise ValidationError("N must be >= 2")
    alpha, beta, A = constants.alpha, constants.beta, constants.A
    if K is None:
        K = _series_K(alpha, tol)
    lnA = math.log(A)
    length = beta * math.log(N) / lnA if L is None else float(L)
    n = np.arange(N, dtype=float)
    acc = np.zeros(N)
    for k in range(K + 1):
        hk = h_A(A, k)
        if k == 0:
            acc += hk
            continue
        if alpha == 0:
            break
        valid = n >= k
        logc = np.full(N, -np.inf)
        nv = n[valid]
        logc[valid] = gammaln(nv + 1) - gammaln(k + 1) - gammaln(nv - k + 1)
        acc += np.exp(k * math.log(alpha) + logc - k * math.log(N)) * hk
    per_step = length * acc * np.exp(-alpha * n / N)
    edges_total = N * (N - 1) / 2 * bernoulli_entropy(alpha / N)
    return ESeries(per_step, math.fsum(per_step), edges_total)


def _mixture_entropy_rows(letters: np.ndarray, A: int) -> float:
    """Sum over coordinates of the copy-rule entropy given parents' letters.

    ``letters`` has shape (k, L).
    """
    k, L = letters.shape
    counts = np.zeros((L, A))
    np.add.at(counts, (np.tile(np.arange(L), k), letters.ravel()), 1.0)
    q = (1.0 + A * counts) / ((1 + k) * A)
    return float(-(q * np.log(q)).sum())


def mc_entropy(params: HybridParams, link_samples: int, seed: int | None = None) -> EntropyReport:
    """Monte Carlo chain-rule estimate of the ordered model's entropy.

    One trajectory is simulated. At each step the edge part is exact and the
    name part averages the exact conditional name entropy over independently
    sampled link sets; the standard error reflects that sampling.
    """
    if link_samples < 1:
        raise ValidationError("link_samples must be >= 1")
    params.validate()
    graph, _, _ = gen_hybrid(params)
    rng = np.random.default_rng(params.seed if seed is None else seed)
    N, A, L = params.N, params.A, params.L
    p = params.alpha / N
    base = L * math.log(A)
    eb = bernoulli_entropy(p)
    names = graph.names

    totals = []
    var_total = 0.0
    for n in range(N):
        ks = rng.binomial(n, p, size=link_samples) if n > 0 else np.zeros(link_samples, np.int64)
        vals = np.full(link_samples, base)
        for r in np.flatnonzero(ks):
            parents = _distinct(rng, n, int(ks[r]))
            vals[r] = _mixture_entropy_rows(names[parents], A)
        totals.append(n * eb + vals.mean())
        if link_samples > 1:
            var_total += vals.var(ddof=1) / link_samples
    return EntropyReport(math.fsum(totals), N, method="monte_carlo", stderr=math.sqrt(var_total))


def ideal_name_step_entropy(names: np.ndarray, parents: np.ndarray, A: int) -> float:
    if parents.size == 0:
        return names.shape[1] * math.log(A)
    return _mixture_entropy_rows(names[parents], A)


# --- structural diagnostics -----------------------------------------------------

@dataclass(frozen=True)
class CollisionStats:
    duplicate_name_count: int
    est_theta: float
    non_tree_fraction: float
    pairs_sampled: int


def collision_stats(trace: CopyTrace, graph: GraphWithNames, pairs: int = 100_000,
                    seed: int = 0) -> CollisionStats:
    """Duplicate names, shared copy-origin rate at coordinate 0, non-tree rate."""
    N = graph.N
    if trace.origins.shape != graph.names.shape or trace.link_counts.shape[0] != N:
        raise ValidationError("trace and graph come from different constructions")
    _, inverse, counts = np.unique(graph.names, axis=0, return_inverse=True, return_counts=True)
    dup = int((counts[np.ravel(inverse)] > 1).sum())

    rng = np.random.default_rng(seed)
    i = rng.integers(0, N, size=pairs)
    j = rng.integers(0, N - 1, size=pairs)
    j = np.where(j >= i, j + 1, j)
    theta = float(np.mean(trace.origins[i, 0] == trace.origins[j, 0]))
    return CollisionStats(dup, theta, float(np.mean(~trace.is_tree)), pairs)
