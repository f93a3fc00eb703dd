"""Undirected simple graphs, their Laplacians, and the edge-list file format.

Nodes are the dense indices ``0..n-1``. Edges are stored canonically as an
``(m, 2)`` integer array with ``i < j`` in each row, rows sorted
lexicographically, so that Laplacian assembly and everything downstream of it
is deterministic.
"""

from __future__ import annotations

import os
from collections.abc import Iterable
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import DuplicateEdge, IndexOutOfRange, ParseError, SelfLoop

__all__ = [
    "Graph",
    "build_graph",
    "laplacian",
    "is_connected",
    "num_components",
    "load_edge_list",
    "save_edge_list",
    "format_edge_list",
    "parse_edge_list",
]


class Graph:
    """Immutable undirected simple graph.

    Use :func:`build_graph` to construct one from raw data; the constructor
    trusts its input to be canonical already.
    """

    __slots__ = ("_n", "_edges")

    def __init__(self, n: int, edges: np.ndarray):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        edges.flags.writeable = False
        self._n = int(n)
        self._edges = edges

    @property
    def n(self) -> int:
        return self._n

    @property
    def edges(self) -> np.ndarray:
        """Read-only ``(m, 2)`` array of canonical edges."""
        return self._edges

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    def degrees(self) -> np.ndarray:
        return np.bincount(self._edges.ravel(), minlength=self._n)

    def adjacency(self) -> sp.csr_array:
        i, j = self._edges[:, 0], self._edges[:, 1]
        data = np.ones(2 * len(i))
        a = sp.coo_array(
            (data, (np.concatenate([i, j]), np.concatenate([j, i]))),
            shape=(self._n, self._n),
        )
        return a.tocsr()

    def laplacian(self) -> sp.csr_array:
        return laplacian(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and np.array_equal(self._edges, other._edges)

    def __hash__(self) -> int:
        return hash((self._n, self._edges.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self._n}, edges={self.num_edges})"


def _canonical(n: int, edges: Iterable, linenos: list[int] | None = None) -> np.ndarray:
    arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                     dtype=np.int64).reshape(-1, 2)
    for row, (a, b) in enumerate(arr):
        line = linenos[row] if linenos is not None else None
        if a < 0 or b < 0 or a >= n or b >= n:
            raise IndexOutOfRange(f"edge ({a}, {b}) has an endpoint outside 0..{n - 1}", line)
        if a == b:
            raise SelfLoop(f"self-loop at node {a}", line)
    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    key = lo * max(n, 1) + hi
    order = np.argsort(key, kind="stable")
    key_sorted = key[order]
    dup = np.flatnonzero(key_sorted[1:] == key_sorted[:-1])
    if len(dup):
        # report the later of the two occurrences, in input order
        first, second = sorted((order[dup[0]], order[dup[0] + 1]))
        line = linenos[second] if linenos is not None else None
        raise DuplicateEdge(f"edge ({lo[second]}, {hi[second]}) appears twice", line)
    return np.column_stack([lo[order], hi[order]])


def build_graph(n: int, edges: Iterable) -> Graph:
    """Validate and canonicalize ``edges`` over ``n`` nodes.

    Raises :class:`IndexOutOfRange`, :class:`SelfLoop` or
    :class:`DuplicateEdge` (``(i, j)`` and ``(j, i)`` count as the same edge).
    """
    if n < 0:
        raise IndexOutOfRange(f"node count must be non-negative, got {n}")
    return Graph(n, _canonical(n, edges))


def laplacian(g: Graph) -> sp.csr_array:
    """``Q = D - A`` as a sparse matrix with exact integer-valued entries."""
    a = g.adjacency()
    d = sp.diags_array(g.degrees().astype(float))
    q = (d - a).tocsr()
    q.sort_indices()
    return q


def num_components(g: Graph) -> int:
    if g.n == 0:
        return 0
    count, _ = connected_components(g.adjacency(), directed=False)
    return int(count)


def is_connected(g: Graph) -> bool:
    """True iff every node is reachable from node 0."""
    if g.n <= 1:
        return True
    return num_components(g) == 1


def parse_edge_list(text: str) -> Graph:
    n_header: int | None = None
    pairs: list[tuple[int, int]] = []
    linenos: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("n="):
            try:
                n_header = int(line[2:])
            except ValueError:
                raise ParseError(f"bad node-count header {line!r}", lineno) from None
            if n_header < 0:
                raise ParseError("node count must be non-negative", lineno)
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ParseError(f"expected two integers, got {line!r}", lineno)
        try:
            a, b = int(fields[0]), int(fields[1])
        except ValueError:
            raise ParseError(f"expected two integers, got {line!r}", lineno) from None
        pairs.append((a, b))
        linenos.append(lineno)
    if n_header is not None:
        n = n_header
    else:
        n = max((max(a, b) for a, b in pairs), default=-1) + 1
    return Graph(n, _canonical(n, pairs, linenos))


def load_edge_list(path: str | os.PathLike) -> Graph:
    """Read a whitespace-separated edge list.

    Lines starting with ``#`` are comments. An optional ``n=<int>`` line fixes
    the node count; otherwise it is one more than the largest index seen.
    """
    return parse_edge_list(Path(path).read_text())


def format_edge_list(g: Graph) -> str:
    lines = [f"n={g.n}"]
    lines.extend(f"{a} {b}" for a, b in g.edges.tolist())
    return "\n".join(lines) + "\n"


def save_edge_list(g: Graph, path: str | os.PathLike) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(format_edge_list(g))
