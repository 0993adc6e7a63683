"""Undirected simple graphs, synthetic topology generators and SNAP edge lists.

Graphs are stored in compressed sparse row form: ``indptr`` and ``indices``
hold each node's sorted neighbor ids.  A :class:`Graph` is immutable once
built, so one instance can be shared by any number of simulation runs.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import BinaryIO, Iterable, TextIO, Union

import numpy as np
import scipy.sparse as sp

__all__ = [
    "EdgeListError",
    "Graph",
    "load_edge_list",
    "read_edge_list",
    "write_edge_list",
    "generate_preferential_attachment",
    "generate_small_world",
    "generate_spatially_clustered",
    "generate_uniform_attachment",
    "influence_weight",
]


class EdgeListError(ValueError):
    """Raised when an edge-list stream cannot be parsed."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected graph without self-loops or parallel edges.

    Parameters
    ----------
    node_count : int
        Number of nodes; ids run from ``0`` to ``node_count - 1``.
    indptr, indices : np.ndarray
        CSR adjacency.  ``indices[indptr[v]:indptr[v + 1]]`` are the sorted
        neighbors of ``v``.
    labels : np.ndarray, optional
        Original node ids for graphs read from a file.
    """

    node_count: int
    indptr: np.ndarray
    indices: np.ndarray
    labels: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[tuple[int, int]],
                   labels: np.ndarray | None = None) -> "Graph":
        """Build a graph from an iterable of ``(u, v)`` pairs.

        Reciprocal duplicates collapse to one edge and self-loops are dropped.
        """
        if node_count < 1:
            raise ValueError("graph needs at least one node")
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= node_count):
            raise ValueError("edge endpoint outside 0..node_count-1")
        arr = arr[arr[:, 0] != arr[:, 1]]
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        und = np.unique(np.stack([lo, hi], axis=1), axis=0) if len(arr) else arr
        rows = np.concatenate([und[:, 0], und[:, 1]])
        cols = np.concatenate([und[:, 1], und[:, 0]])
        mat = sp.csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)),
                            shape=(node_count, node_count))
        mat.sort_indices()
        return cls(node_count, mat.indptr.astype(np.int64),
                   mat.indices.astype(np.int64), labels)

    def __post_init__(self) -> None:
        for name in ("indptr", "indices"):
            getattr(self, name).setflags(write=False)

    @cached_property
    def degree(self) -> np.ndarray:
        deg = np.diff(self.indptr)
        deg.setflags(write=False)
        return deg

    @property
    def edge_count(self) -> int:
        return int(self.indices.size // 2)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def edges(self) -> np.ndarray:
        """Return the ``(m, 2)`` array of edges with ``u < v``, sorted."""
        rows = np.repeat(np.arange(self.node_count), self.degree)
        keep = rows < self.indices
        return np.stack([rows[keep], self.indices[keep]], axis=1)

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Float 0/1 adjacency matrix, used for vectorized signal sums."""
        data = np.ones(self.indices.size, dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr),
                             shape=(self.node_count, self.node_count))

    @cached_property
    def inverse_degree(self) -> np.ndarray:
        """``1/|N(v)|`` per node, with 0 for isolated nodes."""
        deg = self.degree.astype(np.float64)
        out = np.zeros_like(deg)
        np.divide(1.0, deg, out=out, where=deg > 0)
        out.setflags(write=False)
        return out

    def check_invariants(self) -> None:
        """Full scan for symmetry, self-loops and duplicate neighbors."""
        n = self.node_count
        if self.indptr.shape != (n + 1,) or self.indptr[0] != 0:
            raise AssertionError("malformed indptr")
        for v in range(n):
            nb = self.neighbors(v)
            if np.any(nb == v):
                raise AssertionError(f"self-loop at {v}")
            if np.any(np.diff(nb) <= 0):
                raise AssertionError(f"neighbors of {v} unsorted or duplicated")
        edges = set(zip(np.repeat(np.arange(n), self.degree).tolist(),
                        self.indices.tolist()))
        for u, v in edges:
            if (v, u) not in edges:
                raise AssertionError(f"edge {u}-{v} not symmetric")


def influence_weight(g: Graph, target: int) -> float:
    """Weight of one neighbor's influence on ``target``: ``1/|N(target)|``."""
    d = int(g.degree[target])
    if d == 0:
        raise ValueError(f"node {target} is isolated; influence weight undefined")
    return 1.0 / d


# --------------------------------------------------------------------------
# Edge-list I/O
# --------------------------------------------------------------------------

Source = Union[bytes, str, BinaryIO, TextIO]


def _iter_lines(source: Source) -> Iterable[str]:
    if isinstance(source, bytes):
        source = io.StringIO(source.decode("utf-8"))
    elif isinstance(source, str):
        source = io.StringIO(source)
    for raw in source:
        yield raw.decode("utf-8") if isinstance(raw, bytes) else raw


def load_edge_list(source: Source, keep_isolated: bool = False) -> Graph:
    """Parse a SNAP-style edge list.

    Lines starting with ``#`` are comments and blank lines are ignored; every
    other line must hold exactly two non-negative integer ids.  Ids are
    remapped, in increasing order, onto ``0..n-1``.  Nodes that end up with
    no neighbors (only self-loops) are dropped unless ``keep_isolated``.
    """
    pairs: list[tuple[int, int]] = []
    for lineno, line in enumerate(_iter_lines(source), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        tokens = s.split()
        if len(tokens) != 2:
            raise EdgeListError(f"line {lineno}: expected 2 ids, got {len(tokens)} tokens")
        try:
            a, b = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListError(f"line {lineno}: non-integer node id in {s!r}") from None
        if a < 0 or b < 0:
            raise EdgeListError(f"line {lineno}: negative node id in {s!r}")
        pairs.append((a, b))
    if not pairs:
        raise EdgeListError("edge list contains no edges")

    raw = np.asarray(pairs, dtype=np.int64)
    if not keep_isolated:
        raw_nonloop = raw[raw[:, 0] != raw[:, 1]]
        if raw_nonloop.size == 0:
            raise EdgeListError("edge list contains only self-loops")
        labels = np.unique(raw_nonloop)
        raw = raw_nonloop
    else:
        labels = np.unique(raw)
    dense = np.searchsorted(labels, raw)
    return Graph.from_edges(labels.size, map(tuple, dense), labels=labels)


def read_edge_list(path: str | os.PathLike, keep_isolated: bool = False) -> Graph:
    with open(path, "rb") as fh:
        return load_edge_list(fh, keep_isolated=keep_isolated)


def write_edge_list(g: Graph, dest: str | os.PathLike | TextIO,
                    comment: str | None = None) -> None:
    """Write ``g`` as ``u<TAB>v`` lines, one per undirected edge."""
    def _dump(fh: TextIO) -> None:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write(f"# Nodes: {g.node_count} Edges: {g.edge_count}\n")
        for u, v in g.edges():
            fh.write(f"{u}\t{v}\n")

    if hasattr(dest, "write"):
        _dump(dest)  # type: ignore[arg-type]
    else:
        with open(dest, "w") as fh:
            _dump(fh)


# --------------------------------------------------------------------------
# Generators
# --------------------------------------------------------------------------


def generate_preferential_attachment(n: int, rng: np.random.Generator) -> Graph:
    """Growing tree where each new node links to one existing node.

    Starts from the single edge ``0-1``; every later node picks its partner
    with probability proportional to the partner's current degree.
    """
    if n < 2:
        raise ValueError("preferential attachment needs n >= 2")
    # every edge endpoint sits in the urn once, so a uniform draw is degree-weighted
    urn = np.empty(2 * (n - 1), dtype=np.int64)
    urn[:2] = (0, 1)
    size = 2
    edges = [(0, 1)]
    for t in range(2, n):
        target = int(urn[rng.integers(size)])
        edges.append((target, t))
        urn[size:size + 2] = (target, t)
        size += 2
    return Graph.from_edges(n, edges)


def generate_uniform_attachment(n: int, rng: np.random.Generator) -> Graph:
    """Random recursive tree: each new node links to a uniformly chosen node."""
    if n < 2:
        raise ValueError("uniform attachment needs n >= 2")
    edges = [(int(rng.integers(t)), t) for t in range(1, n)]
    return Graph.from_edges(n, edges)


def generate_small_world(n: int, p_rewire: float, rng: np.random.Generator) -> Graph:
    """Watts-Strogatz style ring with links to the next two nodes.

    Each lattice edge ``(i, i+d)`` is rewired with probability ``p_rewire`` by
    replacing ``i+d`` with a uniform random node; candidates that would make a
    self-loop or duplicate edge are redrawn.  The edge count stays ``2n``.
    """
    if n < 5:
        raise ValueError("small world lattice needs n >= 5")
    if not 0.0 <= p_rewire <= 1.0:
        raise ValueError("p_rewire must lie in [0, 1]")
    adj: list[set[int]] = [set() for _ in range(n)]
    lattice = [(i, (i + d) % n) for d in (1, 2) for i in range(n)]
    for u, v in lattice:
        adj[u].add(v)
        adj[v].add(u)
    for u, v in lattice:
        if rng.random() >= p_rewire or len(adj[u]) >= n - 1:
            continue
        while True:
            w = int(rng.integers(n))
            if w != u and w not in adj[u]:
                break
        adj[u].discard(v)
        adj[v].discard(u)
        adj[u].add(w)
        adj[w].add(u)
    edges = [(u, v) for u in range(n) for v in adj[u] if u < v]
    return Graph.from_edges(n, edges)


def generate_spatially_clustered(n: int, avg_degree: float,
                                 rng: np.random.Generator) -> Graph:
    """Spatially clustered network on the unit square.

    Nodes are placed uniformly at random.  Until the graph holds
    ``round(n * avg_degree / 2)`` edges, a uniformly chosen node links to its
    nearest not-yet-linked node (distance ties go to the lower id).
    """
    if avg_degree < 0 or avg_degree > n - 1:
        raise ValueError(f"avg_degree {avg_degree} infeasible for n={n}")
    target = int(round(n * avg_degree / 2.0))
    pos = rng.random((n, 2))
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    order = np.argsort(dist, axis=1, kind="stable")[:, : n - 1]
    cursor = np.zeros(n, dtype=np.int64)
    adj: list[set[int]] = [set() for _ in range(n)]
    m = 0
    while m < target:
        v = int(rng.integers(n))
        row = order[v]
        c = cursor[v]
        while c < n - 1 and int(row[c]) in adj[v]:
            c += 1
        cursor[v] = c
        if c == n - 1:
            continue
        u = int(row[c])
        adj[v].add(u)
        adj[u].add(v)
        m += 1
    edges = [(u, v) for u in range(n) for v in adj[u] if u < v]
    return Graph.from_edges(n, edges)
