"""Counting the vertex orderings consistent with a DAG (linear extensions)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import CapacityError, ValidationError
from .graph import Dag

MAX_EXACT_N = 24
_LIMB = 32
_MASK = (1 << _LIMB) - 1
_NLIMBS = 3  # 96 bits > log2(24!)


@dataclass(frozen=True)
class ExtensionCount:
    count: int
    log_count: float
    N: int

    @property
    def factorial_ratio(self) -> float:
        """``log M / log N!``; 1 exactly when the DAG has no edges."""
        lf = log_factorial(self.N)
        if lf <= 0 or self.count == math.factorial(self.N):
            return 1.0
        return self.log_count / lf


def log_factorial(n: int) -> float:
    return math.lgamma(n + 1)


def _check_acyclic(N: int, preds: list[int]) -> None:
    remaining = (1 << N) - 1
    placed = 0
    while remaining:
        ready = [v for v in range(N) if remaining >> v & 1 and preds[v] & ~placed == 0]
        if not ready:
            raise ValidationError("directed graph has a cycle")
        for v in ready:
            placed |= 1 << v
            remaining &= ~(1 << v)


def _components(N: int, edges: np.ndarray) -> list[list[int]]:
    parent = list(range(N))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges.tolist():
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    groups: dict[int, list[int]] = {}
    for v in range(N):
        groups.setdefault(find(v), []).append(v)
    return list(groups.values())


def _normalize_limbs(limbs: np.ndarray) -> np.ndarray:
    for i in range(_NLIMBS - 1):
        carry = limbs[:, i] >> _LIMB
        limbs[:, i] &= _MASK
        limbs[:, i + 1] += carry
    return limbs


def _count_connected(preds: list[int]) -> int:
    """Downset dynamic programme over subsets, vectorised layer by layer.

    Layer t holds every downset of size t with the number of orderings of
    it; each is extended by any vertex whose predecessors are all inside.
    Counts are kept as three 32-bit limbs in uint64 so sums never overflow.
    """
    n = len(preds)
    if n <= 1:
        return 1
    pred = np.array(preds, dtype=np.int64)
    masks = np.zeros(1, dtype=np.int64)
    limbs = np.zeros((1, _NLIMBS), dtype=np.uint64)
    limbs[0, 0] = 1
    for _ in range(n):
        tgt, src_rows = [], []
        for v in range(n):
            bit = np.int64(1 << v)
            ok = ((masks & bit) == 0) & ((masks & pred[v]) == pred[v])
            idx = np.flatnonzero(ok)
            if idx.size:
                tgt.append(masks[idx] | bit)
                src_rows.append(idx)
        tgt = np.concatenate(tgt)
        rows = np.concatenate(src_rows)
        order = np.argsort(tgt, kind="stable")
        tgt = tgt[order]
        vals = limbs[rows[order]]
        starts = np.flatnonzero(np.r_[True, tgt[1:] != tgt[:-1]])
        masks = tgt[starts]
        limbs = _normalize_limbs(np.add.reduceat(vals, starts, axis=0))
    assert masks.size == 1
    return sum(int(limbs[0, i]) << (_LIMB * i) for i in range(_NLIMBS))


def count_linear_extensions(dag: Dag) -> ExtensionCount:
    """Exact number of linear extensions (N <= 24) and its natural log.

    Weakly connected components are counted separately and combined with
    multinomial coefficients.
    """
    N = dag.N
    if N > MAX_EXACT_N:
        raise CapacityError(f"exact counting supports N <= {MAX_EXACT_N}; use the lower bound")
    e = dag.edges
    if e.size and (e.min() < 0 or e.max() >= N):
        raise ValidationError("DAG edge endpoint out of range")
    if e.size and np.any(e[:, 0] == e[:, 1]):
        raise ValidationError("directed graph has a cycle")
    preds = dag.predecessor_masks()
    _check_acyclic(N, preds)

    total = 1
    placed = 0
    for comp in _components(N, e):
        local = {v: i for i, v in enumerate(comp)}
        cpreds = []
        for v in comp:
            m = 0
            for u in range(N):
                if preds[v] >> u & 1:
                    m |= 1 << local[u]
            cpreds.append(m)
        placed += len(comp)
        total *= math.comb(placed, len(comp)) * _count_connected(cpreds)
    return ExtensionCount(total, math.log(total), N)


def brute_force_extensions(dag: Dag) -> int:
    """Enumerate all N! orderings; for tests and tiny inputs only."""
    if dag.N > 10:
        raise CapacityError("brute force is limited to N <= 10")
    e = dag.edges.tolist()
    count = 0
    for perm in permutations(range(dag.N)):
        pos = {v: i for i, v in enumerate(perm)}
        if all(pos[old] < pos[new] for new, old in e):
            count += 1
    return count


def extension_lower_bound(N: int, alpha: float, K: int) -> float:
    """``K * ln((N/K - 2 alpha N / K^2)!)``: interval-partition lower bound on log M.

    Holds whenever each of the K consecutive index blocks contains at most
    ``alpha N / K^2`` internal edges.
    """
    if K < 1 or N < 1:
        raise ValidationError("need N >= 1 and K >= 1")
    m = N / K - 2 * alpha * N / K**2
    if m <= 0:
        return 0.0
    return K * math.lgamma(m + 1)
