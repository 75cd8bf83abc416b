"""GNV1 text graphs and plain DAG edge lists.

GNV1 layout::

    GNV1
    N=<int> A=<int> L=<int>
    <name>            x N   (letters, or <index>:<letters> for ordered names)
    E=<int>
    <u> <v>           x E   (0-based, u < v)
"""
from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .errors import ParseError
from .graph import ALPHABET, Dag, GraphWithNames

_HEADER = re.compile(r"N=(\d+) A=(\d+) L=(\d+)")
_COUNT = re.compile(r"E=(\d+)")
_LETTER = {c: i for i, c in enumerate(ALPHABET)}


def format_graph(graph: GraphWithNames) -> str:
    graph.validate()
    lines = ["GNV1", f"N={graph.N} A={graph.A} L={graph.L}"]
    lines += graph.name_strings()
    lines.append(f"E={graph.num_edges}")
    lines += [f"{u} {v}" for u, v in graph.edges.tolist()]
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> GraphWithNames:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    pos = 0

    def take(what):
        nonlocal pos
        if pos >= len(lines):
            raise ParseError(f"unexpected end of file, expected {what}", pos + 1)
        pos += 1
        return lines[pos - 1]

    if take("magic") != "GNV1":
        raise ParseError("missing GNV1 magic", 1)
    m = _HEADER.fullmatch(take("header"))
    if not m:
        raise ParseError("malformed header, expected 'N=<int> A=<int> L=<int>'", 2)
    N, A, L = map(int, m.groups())
    if not 2 <= A <= len(ALPHABET):
        raise ParseError(f"alphabet size {A} unsupported", 2)
    if L < 1:
        raise ParseError("name length must be >= 1", 2)

    names = np.zeros((N, L), dtype=np.uint8)
    seen: dict[str, int] = {}
    ordered = None
    for v in range(N):
        raw = take("name")
        line = pos
        idx, sep, letters = raw.rpartition(":")
        is_ordered = bool(sep)
        if ordered is None:
            ordered = is_ordered
        elif ordered != is_ordered:
            raise ParseError("mixed ordered and unordered names", line)
        if is_ordered and idx != str(v + 1):
            raise ParseError(f"ordered name index {idx!r} should be {v + 1}", line)
        if len(letters) != L:
            raise ParseError(f"name {letters!r} does not have length {L}", line)
        try:
            row = [_LETTER[c] for c in letters]
        except KeyError:
            raise ParseError(f"name {letters!r} has a character outside the alphabet", line) from None
        if max(row) >= A:
            raise ParseError(f"name {letters!r} uses a letter outside the alphabet of size {A}", line)
        if letters in seen and not is_ordered:
            raise ParseError(f"duplicate name {letters!r} (first on line {seen[letters]})", line)
        seen.setdefault(letters, line)
        names[v] = row

    m = _COUNT.fullmatch(take("edge count"))
    if not m:
        raise ParseError("malformed edge count, expected 'E=<int>'", pos)
    E = int(m.group(1))
    edges = np.zeros((E, 2), dtype=np.int64)
    seen_edges: dict[tuple[int, int], int] = {}
    for k in range(E):
        raw = take("edge")
        line = pos
        parts = raw.split(" ")
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise ParseError(f"malformed edge line {raw!r}", line)
        u, v = int(parts[0]), int(parts[1])
        if u >= N or v >= N:
            raise ParseError(f"vertex index >= N={N}", line)
        if u >= v:
            raise ParseError("edge must satisfy u < v", line)
        if (u, v) in seen_edges:
            raise ParseError(f"duplicate edge (first on line {seen_edges[(u, v)]})", line)
        seen_edges[(u, v)] = line
        edges[k] = (u, v)
    if pos != len(lines):
        raise ParseError("trailing content after the edge list", pos + 1)
    return GraphWithNames(A, L, names, edges, ordered=bool(ordered))


def write_graph(path, graph: GraphWithNames) -> None:
    Path(path).write_text(format_graph(graph), encoding="ascii", newline="\n")


def read_graph(path) -> GraphWithNames:
    return parse_graph(Path(path).read_text(encoding="ascii"))


def parse_dag(text: str) -> Dag:
    """Edge list of ``n i`` lines (n links to earlier i); optional ``N=<int>`` first.

    Blank lines and ``#`` comments are ignored. Without a header N is one
    more than the largest index.
    """
    N = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("N="):
            if N is not None or edges:
                raise ParseError("N= header must come first", lineno)
            try:
                N = int(line[2:])
            except ValueError:
                raise ParseError("malformed N= header", lineno) from None
            continue
        parts = line.split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise ParseError(f"malformed edge line {raw!r}", lineno)
        n, i = int(parts[0]), int(parts[1])
        if N is not None and max(n, i) >= N:
            raise ParseError(f"vertex index >= N={N}", lineno)
        if n == i:
            raise ParseError("self-loop", lineno)
        edges.append((n, i))
    if N is None:
        N = 1 + max((max(e) for e in edges), default=-1)
    return Dag(N, np.array(edges, dtype=np.int64).reshape(-1, 2))


def read_dag(path) -> Dag:
    return parse_dag(Path(path).read_text(encoding="ascii"))


def write_dag(path, dag: Dag) -> None:
    lines = [f"N={dag.N}"] + [f"{n} {i}" for n, i in dag.edges.tolist()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")
