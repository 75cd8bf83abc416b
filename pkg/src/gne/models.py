"""Random graph-with-names model families.

Each family has a parameter class, a sampler (``generate``), an exact
finite-N entropy (``exact_entropy``) and an asymptotic entropy rate
(``rate``), with ``ent ~ rate * N ln N``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar, Union

import numpy as np
from scipy.special import gammaln, logsumexp

from .entropy import (RateConstants, bernoulli_entropy, bernoulli_entropy_array, kappa,
                      large_dev_rate, log_choose)
from .errors import CapacityError, ModelInvalidError, ValidationError
from .graph import GraphWithNames, binary_names, ints_to_names, name_length

LN2 = math.log(2.0)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


# --- parameters --------------------------------------------------------------

@dataclass(frozen=True)
class ErBinary:
    N: int
    alpha: float
    seed: int = 0
    tag: ClassVar[str] = "er-binary"

    def validate(self):
        _check_N(self.N)
        if not 0 < self.alpha <= self.N:
            raise ValidationError("alpha must satisfy 0 < alpha <= N")


@dataclass(frozen=True)
class ErNamed:
    N: int
    alpha: float
    beta: float
    A: int
    seed: int = 0
    tag: ClassVar[str] = "er-named"

    def validate(self):
        _check_N(self.N)
        _check_A(self.A)
        if not 0 < self.alpha <= self.N:
            raise ValidationError("alpha must satisfy 0 < alpha <= N")
        if not self.beta > 1:
            raise ValidationError("beta must be > 1")

    @property
    def L(self) -> int:
        return name_length(self.N, self.beta, self.A)


@dataclass(frozen=True)
class SmallWorld:
    n: int
    alpha: float
    gamma: float
    seed: int = 0
    tag: ClassVar[str] = "smallworld"

    def validate(self):
        if self.n < 5 or self.n % 2 == 0:
            raise ValidationError("torus side n must be odd and >= 5")
        if not self.alpha > 0:
            raise ValidationError("alpha must be > 0")
        if not self.gamma > 0:
            raise ValidationError("gamma must be > 0")

    @property
    def N(self) -> int:
        return self.n * self.n


@dataclass(frozen=True)
class Hamming:
    N: int
    alpha: float
    beta: float
    A: int
    d: float
    seed: int = 0
    tag: ClassVar[str] = "hamming"

    def validate(self):
        _check_N(self.N)
        _check_A(self.A)
        if not self.alpha > 0:
            raise ValidationError("alpha must be > 0")
        _check_hamming_constants(self.A, self.beta, self.d)

    @property
    def L(self) -> int:
        return name_length(self.N, self.beta, self.A)

    @property
    def M(self) -> int:
        return hamming_radius(self.d, self.L)


@dataclass(frozen=True)
class TreeSequential:
    N: int
    seed: int = 0
    tag: ClassVar[str] = "tree-seq"

    def validate(self):
        _check_N(self.N)


@dataclass(frozen=True)
class TreeUniform:
    N: int
    seed: int = 0
    tag: ClassVar[str] = "tree-uniform"

    def validate(self):
        _check_N(self.N)


ModelParams = Union[ErBinary, ErNamed, SmallWorld, Hamming, TreeSequential, TreeUniform]
MODEL_CLASSES = {cls.tag: cls for cls in (ErBinary, ErNamed, SmallWorld, Hamming,
                                          TreeSequential, TreeUniform)}


def _check_N(N):
    if int(N) != N or N < 2:
        raise ValidationError("N must be an integer >= 2")


def _check_A(A):
    if int(A) != A or not 2 <= A <= 36:
        raise ValidationError("A must be an integer in [2, 36]")


def _check_hamming_constants(A, beta, d):
    if not 0 < d < 1 - 1 / A:
        raise ValidationError(f"d must lie in (0, 1 - 1/A) = (0, {1 - 1 / A:g})")
    if beta < 1:
        raise ValidationError("beta must be >= 1")
    bound = math.log(A) / large_dev_rate(1 - 1 / A, d)
    if not beta < bound:
        raise ValidationError(f"beta must be < ln A / Lambda(d) = {bound:.6g}")


def hamming_radius(d: float, L: int) -> int:
    """Hamming cutoff ``round(d L)`` clamped to ``[1, L - 1]``."""
    return min(max(_round_half_up(d * L), 1), max(L - 1, 1))


# --- reports -----------------------------------------------------------------

@dataclass(frozen=True)
class EntropyReport:
    nats: float
    N: int
    method: str = "exact"
    stderr: float | None = None

    def __post_init__(self):
        if self.method not in ("exact", "monte_carlo"):
            raise ValueError(f"unknown method {self.method!r}")
        if (self.stderr is not None) != (self.method == "monte_carlo"):
            raise ValueError("stderr is present exactly for Monte Carlo reports")

    @property
    def bits(self) -> float:
        return self.nats / LN2

    @property
    def normalized_rate(self) -> float:
        return self.nats / (self.N * math.log(self.N))

    @property
    def stderr_bits(self) -> float | None:
        return None if self.stderr is None else self.stderr / LN2


# --- sampling helpers ----------------------------------------------------------

def _bernoulli_positions(total: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Sorted success positions among ``total`` Bernoulli(p) trials.

    Geometric skipping: cost is proportional to the number of successes.
    """
    if p <= 0 or total <= 0:
        return np.zeros(0, dtype=np.int64)
    if p >= 1:
        return np.arange(total, dtype=np.int64)
    chunks = []
    pos = -1
    mean = total * p
    batch = int(mean + 5 * math.sqrt(mean) + 16)
    while True:
        gaps = rng.geometric(p, size=batch).astype(np.int64)
        cs = pos + np.cumsum(gaps)
        keep = cs[cs < total]
        chunks.append(keep)
        if keep.size < cs.size:
            break
        pos = int(cs[-1])
        batch = max(16, batch // 4)
    return np.concatenate(chunks)


def unrank_pairs(k: np.ndarray, N: int) -> np.ndarray:
    """Pair index -> (u, v) in the order (0,1), (0,2), ..., (1,2), ..."""
    k = np.asarray(k, dtype=np.int64)
    if k.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    b = 2.0 * N - 1.0
    u = np.floor((b - np.sqrt(b * b - 8.0 * k)) / 2.0).astype(np.int64)
    u = np.clip(u, 0, N - 2)

    def start(r):
        return r * (2 * N - r - 1) // 2

    # correct floating error in either direction
    for _ in range(3):
        u = np.where(start(u) > k, u - 1, u)
        u = np.where(start(u + 1) <= k, u + 1, u)
    v = k - start(u) + u + 1
    return np.stack([u, v], axis=1)


def rank_pairs(edges: np.ndarray, N: int) -> np.ndarray:
    u = edges[:, 0].astype(np.int64)
    v = edges[:, 1].astype(np.int64)
    return u * (2 * N - u - 1) // 2 + (v - u - 1)


def sample_er_edges(N: int, p: float, rng: np.random.Generator) -> np.ndarray:
    pos = _bernoulli_positions(N * (N - 1) // 2, p, rng)
    return unrank_pairs(pos, N)


def distinct_names(N: int, A: int, L: int, rng: np.random.Generator) -> np.ndarray:
    """N distinct uniform length-L words, in uniformly random vertex order."""
    space = A**L
    if space < N:
        raise ModelInvalidError(f"only {space} names of length {L} for {N} vertices")
    if space <= 4 * N:
        picks = rng.choice(space, size=N, replace=False)
        return ints_to_names([int(x) for x in picks], A, L)
    names = rng.integers(0, A, size=(N, L), dtype=np.uint8)
    draws = N
    while True:
        _, first = np.unique(names, axis=0, return_index=True)
        dup = np.setdiff1d(np.arange(N), first)
        if dup.size == 0:
            break
        if draws > 100 * N:
            # pathological: fall back to exact distinct sampling of integers
            picks = rng.choice(space, size=N, replace=False)
            return ints_to_names([int(x) for x in picks], A, L)
        names[dup] = rng.integers(0, A, size=(dup.size, L), dtype=np.uint8)
        draws += dup.size
    return names[rng.permutation(N)]


def _distinct_per_group(counts: np.ndarray, N: int, rng: np.random.Generator):
    """For each group g draw counts[g] distinct uniform values in [0, N)."""
    groups = np.repeat(np.arange(counts.size, dtype=np.int64), counts)
    vals = rng.integers(0, N, size=groups.size, dtype=np.int64)
    while True:
        key = groups * N + vals
        _, first = np.unique(key, return_index=True)
        if first.size == key.size:
            return groups, vals
        dup = np.setdiff1d(np.arange(key.size), first)
        vals[dup] = rng.integers(0, N, size=dup.size, dtype=np.int64)


# --- small worlds --------------------------------------------------------------

def _sw_grid(n: int):
    h = (n - 1) // 2
    i = np.arange(1, h + 1, dtype=float)
    r2 = i[:, None] ** 2 + i[None, :] ** 2
    axis = i[1:]
    return r2, axis


def smallworld_sum(n: int, gamma: float) -> float:
    """The lattice sum S_n with expected added degree ``a * S_n``."""
    r2, axis = _sw_grid(n)
    return 4.0 * math.fsum((r2 ** (-gamma / 2)).ravel()) + 4.0 * math.fsum(axis ** (-gamma))


def calibrate_a(n: int, gamma: float, alpha: float) -> float:
    """Solve ``a * S_n = alpha`` exactly; the largest edge probability must be <= 1."""
    if n < 5 or n % 2 == 0:
        raise ValidationError("torus side n must be odd and >= 5")
    a = alpha / smallworld_sum(n, gamma)
    if a * 2.0 ** (-gamma / 2) > 1.0:
        raise ModelInvalidError(
            f"calibrated a={a:.4g} gives edge probability above 1 at distance sqrt(2)")
    return a


def calibration_ratio(n: int, gamma: float, alpha: float) -> float | None:
    """Exact ``a`` divided by its large-N approximation (None for gamma > 2)."""
    a = calibrate_a(n, gamma, alpha)
    N = n * n
    if gamma == 2:
        return a / (alpha / (math.pi * math.log(N)))
    if gamma < 2:
        return a / (alpha * kappa(gamma) * N ** (-1 + gamma / 2))
    return None


def _sw_offsets(n: int):
    """Half-plane offset representatives excluding the four torus neighbours."""
    h = (n - 1) // 2
    dx, dy = np.meshgrid(np.arange(-h, h + 1), np.arange(-h, h + 1), indexing="ij")
    dx = dx.ravel()
    dy = dy.ravel()
    half = (dx > 0) | ((dx == 0) & (dy > 0))
    near = ((np.abs(dx) + np.abs(dy)) == 1)
    keep = half & ~near
    return dx[keep].astype(np.int64), dy[keep].astype(np.int64)


def _sw_generate(params: SmallWorld, rng) -> GraphWithNames:
    n = params.n
    N = n * n
    a = calibrate_a(n, params.gamma, params.alpha)
    bits = max(1, math.ceil(math.log2(n)))
    coord = binary_names(2 ** bits)[:n]
    ii, jj = np.divmod(np.arange(N), n)
    names = np.concatenate([coord[ii], coord[jj]], axis=1)

    v = np.arange(N, dtype=np.int64)
    right = ii * n + (jj + 1) % n
    down = ((ii + 1) % n) * n + jj
    torus = np.concatenate([np.stack([v, right], 1), np.stack([v, down], 1)])

    dx, dy = _sw_offsets(n)
    p = a * (dx * dx + dy * dy).astype(float) ** (-params.gamma / 2)
    counts = rng.binomial(N, p)
    groups, src = _distinct_per_group(counts, N, rng)
    si, sj = np.divmod(src, n)
    dst = ((si + dx[groups]) % n) * n + (sj + dy[groups]) % n
    rand = np.stack([src, dst], 1)
    edges = np.sort(np.concatenate([torus, rand]), axis=1)
    edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))]
    return GraphWithNames(2, 2 * bits, names, edges)


def smallworld_exact_entropy(n: int, gamma: float, alpha: float) -> float:
    a = calibrate_a(n, gamma, alpha)
    r2, axis = _sw_grid(n)
    inner = 4.0 * math.fsum(bernoulli_entropy_array(a * r2 ** (-gamma / 2)).ravel())
    edge = 4.0 * math.fsum(bernoulli_entropy_array(a * axis ** (-gamma)))
    return (n * n / 2.0) * (inner + edge)


def torus_offsets(graph_edges: np.ndarray, n: int):
    """Signed torus offsets (dx, dy) in [-h, h] for each edge (u, v)."""
    h = (n - 1) // 2
    ui, uj = np.divmod(graph_edges[:, 0], n)
    vi, vj = np.divmod(graph_edges[:, 1], n)
    dx = (vi - ui + h) % n - h
    dy = (vj - uj + h) % n - h
    return dx, dy


def smallworld_random_edge_mask(graph: GraphWithNames, n: int) -> np.ndarray:
    dx, dy = torus_offsets(graph.edges, n)
    return (np.abs(dx) + np.abs(dy)) != 1


# --- Hamming-distance model ------------------------------------------------------

def hamming_mu(N: int, A: int, L: int, M: int) -> float:
    """Expected number of other vertices within Hamming distance 1..M."""
    if not 1 <= M <= L:
        raise ValidationError("need 1 <= M <= L")
    u = np.arange(1, M + 1, dtype=float)
    q = 1.0 - 1.0 / A
    logpmf = (gammaln(L + 1.0) - gammaln(u + 1.0) - gammaln(L - u + 1.0)
              + u * math.log(q) + (L - u) * math.log(1.0 / A))
    log_mu = math.log(N - 1) - math.log1p(-float(A) ** (-L)) + float(logsumexp(logpmf))
    return math.exp(log_mu)


def hamming_mu_exponent(N: int, A: int, L: int, M: int) -> float:
    """``ln mu / ln N``, to compare with ``1 - beta Lambda(d) / ln A``."""
    return math.log(hamming_mu(N, A, L, M)) / math.log(N)


_HAMMING_MAX_N = 30_000


def _hamming_generate(params: Hamming, rng) -> GraphWithNames:
    N, A, L, M = params.N, params.A, params.L, params.M
    mu = hamming_mu(N, A, L, M)
    if mu < params.alpha:
        raise ModelInvalidError(f"mu_N = {mu:.4g} < alpha; edge probability would exceed 1")
    if N > _HAMMING_MAX_N:
        raise CapacityError(f"Hamming generation is O(N^2 L); N <= {_HAMMING_MAX_N}")
    names = distinct_names(N, A, L, rng)
    p = params.alpha / mu
    block = max(1, int(2e7 // (N * L)))
    chunks = []
    cols = np.arange(N)
    for s in range(0, N, block):
        e = min(N, s + block)
        dist = (names[s:e, None, :] != names[None, :, :]).sum(axis=2)
        rows = np.arange(s, e)[:, None]
        cand = (cols[None, :] > rows) & (dist <= M)
        r, c = np.nonzero(cand)
        hit = rng.random(r.size) < p
        chunks.append(np.stack([r[hit] + s, c[hit]], 1))
    edges = np.concatenate(chunks) if chunks else np.zeros((0, 2), np.int64)
    return GraphWithNames(A, L, names, edges)


# --- trees -----------------------------------------------------------------------

def sample_tree_parents(N: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Parents for vertices 1..N-1 (0-based) of ``size`` sequential trees.

    Vertex 1 links to 0; vertex k >= 2 links to ``min(k - 1, V)`` with V
    uniform on 0..N-1.
    """
    parents = np.zeros((size, N - 1), dtype=np.int64)
    if N > 2:
        V = rng.integers(0, N, size=(size, N - 2))
        k = np.arange(2, N)
        parents[:, 1:] = np.minimum(k - 1, V)
    return parents


def tree_edges_from_parents(parents: np.ndarray, perm: np.ndarray | None = None) -> np.ndarray:
    N = parents.shape[-1] + 1
    child = np.broadcast_to(np.arange(1, N), parents.shape)
    if perm is not None:
        child = np.take_along_axis(perm, child, axis=-1)
        par = np.take_along_axis(perm, parents, axis=-1)
    else:
        par = parents
    e = np.stack([par, child], axis=-1)
    return np.sort(e, axis=-1)


def _tree_generate(params, rng) -> GraphWithNames:
    N = params.N
    parents = sample_tree_parents(N, 1, rng)
    perm = rng.permutation(N)[None, :] if isinstance(params, TreeUniform) else None
    edges = tree_edges_from_parents(parents, perm)[0]
    edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))]
    names = binary_names(N)
    return GraphWithNames(2, names.shape[1], names, edges)


# --- public operations -----------------------------------------------------------

def generate(params: ModelParams) -> GraphWithNames:
    """Sample one graph-with-names; deterministic given ``params.seed``."""
    params.validate()
    rng = np.random.default_rng(params.seed)
    if isinstance(params, ErBinary):
        names = binary_names(params.N)
        edges = sample_er_edges(params.N, params.alpha / params.N, rng)
        return GraphWithNames(2, names.shape[1], names, edges)
    if isinstance(params, ErNamed):
        names = distinct_names(params.N, params.A, params.L, rng)
        edges = sample_er_edges(params.N, params.alpha / params.N, rng)
        return GraphWithNames(params.A, params.L, names, edges)
    if isinstance(params, SmallWorld):
        return _sw_generate(params, rng)
    if isinstance(params, Hamming):
        return _hamming_generate(params, rng)
    if isinstance(params, (TreeSequential, TreeUniform)):
        return _tree_generate(params, rng)
    raise ValidationError(f"unknown model {params!r}")


def exact_entropy_nats(params: ModelParams) -> float:
    params.validate()
    if isinstance(params, (ErBinary, ErNamed)):
        N = params.N
        edge_part = N * (N - 1) / 2 * bernoulli_entropy(params.alpha / N)
        if isinstance(params, ErBinary):
            return edge_part
        return log_choose(params.A ** params.L, N) + edge_part
    if isinstance(params, SmallWorld):
        return smallworld_exact_entropy(params.n, params.gamma, params.alpha)
    if isinstance(params, Hamming):
        N = params.N
        mu = hamming_mu(N, params.A, params.L, params.M)
        if mu < params.alpha:
            raise ModelInvalidError(f"mu_N = {mu:.4g} < alpha")
        return log_choose(params.A ** params.L, N) + N / 2 * mu * bernoulli_entropy(params.alpha / mu)
    if isinstance(params, TreeSequential):
        N = params.N
        k = np.arange(3, N + 1, dtype=float)
        m = N - k + 2
        terms = (k - 2) / N * math.log(N) + m / N * (math.log(N) - np.log(m))
        return math.fsum(terms)
    if isinstance(params, TreeUniform):
        return (params.N - 2) * math.log(params.N)
    raise ValidationError(f"unknown model {params!r}")


def exact_entropy(params: ModelParams) -> EntropyReport:
    return EntropyReport(exact_entropy_nats(params), params.N)


def rate(model, constants: RateConstants | None = None) -> float:
    """Asymptotic entropy rate for a family.

    ``model`` is either a parameter object or a family tag together with
    ``constants``.
    """
    if not isinstance(model, str):
        c = RateConstants(alpha=getattr(model, "alpha", None), beta=getattr(model, "beta", None),
                          A=getattr(model, "A", None), gamma=getattr(model, "gamma", None),
                          d=getattr(model, "d", None))
        return rate(model.tag, c)
    c = constants or RateConstants()

    def need(*names):
        for nm in names:
            if getattr(c, nm) is None:
                raise ValidationError(f"rate for {model} needs {nm}")

    if model == "er-binary":
        need("alpha")
        return c.alpha / 2
    if model == "er-named":
        need("alpha", "beta")
        return c.beta - 1 + c.alpha / 2
    if model == "smallworld":
        need("alpha", "gamma")
        if c.gamma < 2:
            return c.alpha / 2
        if c.gamma == 2:
            return c.alpha / 4
        return 0.0
    if model == "hamming":
        need("alpha", "beta", "A", "d")
        _check_hamming_constants(c.A, c.beta, c.d)
        lam = large_dev_rate(1 - 1 / c.A, c.d)
        return c.beta - 1 + c.alpha / 2 * (1 - c.beta * lam / math.log(c.A))
    if model == "tree-seq":
        return 0.5
    if model == "tree-uniform":
        return 1.0
    raise ValidationError(f"unknown model tag {model!r}")


# --- zero-rate diagnostics ---------------------------------------------------------

class CyclicOrdering:
    """Vertex i ranks the others as i+1, i+2, ... (mod N)."""

    def __init__(self, N: int):
        self.N = N

    def rank(self, i, j):
        return (np.asarray(j) - np.asarray(i)) % self.N


class TorusDistanceOrdering:
    """Rank by torus Euclidean distance, ties broken by (dx, dy) lexicographically."""

    def __init__(self, n: int):
        self.n = n
        h = (n - 1) // 2
        dx, dy = np.meshgrid(np.arange(-h, h + 1), np.arange(-h, h + 1), indexing="ij")
        dx = dx.ravel()
        dy = dy.ravel()
        order = np.lexsort((dy, dx, dx * dx + dy * dy))
        ranks = np.empty(order.size, dtype=np.int64)
        ranks[order] = np.arange(order.size)  # zero offset gets rank 0
        self._ranks = ranks

    def rank(self, i, j):
        n = self.n
        h = (n - 1) // 2
        ui, uj = np.divmod(np.asarray(i), n)
        vi, vj = np.divmod(np.asarray(j), n)
        dx = (vi - ui + h) % n
        dy = (vj - uj + h) % n
        return self._ranks[dx * n + dy]


class ExplicitOrdering:
    """Orderings given as an (N, N-1) array; row i lists j(i,1), j(i,2), ..."""

    def __init__(self, table):
        t = np.asarray(table, dtype=np.int64)
        N = t.shape[0]
        if t.ndim != 2 or t.shape[1] != N - 1:
            raise ValidationError("ordering table must have shape (N, N-1)")
        ranks = np.zeros((N, N), dtype=np.int64)
        for i in range(N):
            row = t[i]
            expected = np.delete(np.arange(N), i)
            if not np.array_equal(np.sort(row), expected):
                raise ValidationError(f"ordering row {i} is not a permutation of the other vertices")
            ranks[i, row] = np.arange(1, N)
        self._ranks = ranks

    def rank(self, i, j):
        return self._ranks[np.asarray(i), np.asarray(j)]


@dataclass
class EdgeLengthStats:
    lengths: np.ndarray

    def histogram(self) -> dict[int, int]:
        vals, counts = np.unique(self.lengths, return_counts=True)
        return dict(zip(vals.tolist(), counts.tolist()))

    def fraction_longer(self, M: float) -> float:
        if self.lengths.size == 0:
            return 0.0
        return float(np.mean(self.lengths > M))

    def count_longer(self, M: float) -> int:
        return int(np.sum(self.lengths > M))

    @property
    def median(self) -> float:
        return float(np.median(self.lengths)) if self.lengths.size else 0.0


def edge_length_stats(graph: GraphWithNames, ordering, mask: np.ndarray | None = None) -> EdgeLengthStats:
    """Length of each edge (i, j), i < j: the rank l with j = j(i, l).

    ``mask`` optionally restricts to a subset of edges.
    """
    e = graph.edges if mask is None else graph.edges[mask]
    if isinstance(ordering, np.ndarray):
        ordering = ExplicitOrdering(ordering)
    lengths = np.asarray(ordering.rank(e[:, 0], e[:, 1]), dtype=np.int64)
    if lengths.size and (lengths.min() < 1 or lengths.max() > graph.N - 1):
        raise ValidationError("ordering produced ranks outside 1..N-1")
    return EdgeLengthStats(lengths)


@dataclass(frozen=True)
class NameSimilarity:
    total_edge_hamming: int
    per_edge_mean: float
    normalized: float


def name_similarity_stats(graph: GraphWithNames) -> NameSimilarity:
    """Total Hamming distance between endpoint names, summed over edges."""
    e = graph.edges
    if e.shape[0] == 0:
        return NameSimilarity(0, 0.0, 0.0)
    d = (graph.names[e[:, 0]] != graph.names[e[:, 1]]).sum(axis=1)
    total = int(d.sum())
    N = graph.N
    return NameSimilarity(total, total / e.shape[0], total / (N * math.log(N)))
