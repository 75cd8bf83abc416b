"""Graphs whose vertices carry names over a finite alphabet."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

ALPHABET = "0123456789abcdefghijklmnopqrstuvwxyz"


def name_length(N: int, beta: float, A: int) -> int:
    """Name length ``max(ceil(beta ln N / ln A), ceil(ln N / ln A))``."""
    if N < 2:
        return 1
    base = math.log(N) / math.log(A)
    # guard against ceil(2.0000000000000004)
    L = max(math.ceil(beta * base - 1e-12), math.ceil(base - 1e-12))
    while A**L < N:
        L += 1
    return max(L, 1)


def binary_names(N: int) -> np.ndarray:
    """Vertex i (0-based) gets the base-2 encoding of i, zero-padded."""
    L = max(1, math.ceil(math.log2(N))) if N > 1 else 1
    idx = np.arange(N, dtype=np.int64)
    shifts = np.arange(L - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def names_to_ints(names: np.ndarray, A: int) -> list[int]:
    """Read each name as a base-A integer, most significant letter first."""
    out = []
    for row in names:
        v = 0
        for a in row:
            v = v * A + int(a)
        out.append(v)
    return out


def ints_to_names(values, A: int, L: int) -> np.ndarray:
    out = np.zeros((len(values), L), dtype=np.uint8)
    for r, v in enumerate(values):
        for c in range(L - 1, -1, -1):
            v, out[r, c] = divmod(v, A)
    return out


def _normalize_edges(edges) -> np.ndarray:
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if e.size:
        e = np.sort(e, axis=1)
    return e


@dataclass(eq=False)
class GraphWithNames:
    """N named vertices plus undirected edges ``(u, v)`` with ``u < v``.

    ``names`` is an ``(N, L)`` array of letters in ``range(A)``. When
    ``ordered`` is true a vertex's name is the pair (construction index,
    letters); the index is ``vertex + 1`` and is not stored separately.
    """

    A: int
    L: int
    names: np.ndarray
    edges: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    ordered: bool = False

    def __post_init__(self):
        self.names = np.asarray(self.names, dtype=np.uint8).reshape(-1, self.L)
        self.edges = _normalize_edges(self.edges)

    @property
    def N(self) -> int:
        return self.names.shape[0]

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]

    def name_str(self, v: int) -> str:
        letters = "".join(ALPHABET[a] for a in self.names[v])
        return f"{v + 1}:{letters}" if self.ordered else letters

    def name_strings(self) -> list[str]:
        return [self.name_str(v) for v in range(self.N)]

    def has_distinct_names(self) -> bool:
        if self.ordered:
            return True
        return np.unique(self.names, axis=0).shape[0] == self.N

    def validate(self) -> None:
        if not 2 <= self.A <= len(ALPHABET):
            raise ValidationError(f"alphabet size {self.A} unsupported")
        if self.names.size and self.names.max() >= self.A:
            raise ValidationError("name letter outside the alphabet")
        e = self.edges
        if e.size:
            if e.min() < 0 or e.max() >= self.N:
                raise ValidationError("edge endpoint out of range")
            if np.any(e[:, 0] == e[:, 1]):
                raise ValidationError("self-loop")
            if np.unique(e, axis=0).shape[0] != e.shape[0]:
                raise ValidationError("duplicate edge")
        if not self.has_distinct_names():
            raise ValidationError("vertex names are not distinct")

    def canonical(self):
        """Name-level representation: (sorted names, sorted name-pair edges).

        Two graphs-with-names are the same object iff their canonical forms
        agree; vertex numbering is irrelevant for unordered names.
        """
        labels = [tuple(int(a) for a in row) for row in self.names]
        if self.ordered:
            labels = [(v,) + lab for v, lab in enumerate(labels)]
        pairs = sorted(tuple(sorted((labels[u], labels[v]))) for u, v in self.edges.tolist())
        return tuple(sorted(labels)), tuple(pairs)

    def same_as(self, other: "GraphWithNames") -> bool:
        return (self.A == other.A and self.L == other.L and self.ordered == other.ordered
                and self.N == other.N and self.canonical() == other.canonical())

    def sorted_by_name(self) -> "GraphWithNames":
        """Relabel vertices so names appear in increasing base-A order."""
        order = np.lexsort(self.names.T[::-1])
        inv = np.empty_like(order)
        inv[order] = np.arange(self.N)
        edges = inv[self.edges] if self.edges.size else self.edges
        edges = _normalize_edges(edges)
        if edges.size:
            edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))]
        return GraphWithNames(self.A, self.L, self.names[order], edges, self.ordered)

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.N)


@dataclass(eq=False)
class Dag:
    """Directed acyclic graph with edges ``(new, old)``, ``new > old``."""

    N: int
    edges: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)

    def predecessor_masks(self) -> list[int]:
        """Bitmask per vertex of the vertices that must precede it.

        An edge new -> old forces ``old`` before ``new``; any acyclic edge set
        is accepted, not only index-decreasing ones.
        """
        masks = [0] * self.N
        for new, old in self.edges.tolist():
            masks[new] |= 1 << old
        return masks
