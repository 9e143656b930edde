"""Immutable CSR graph, edge-list ingestion, and transition-operator construction.

The graph is stored as a symmetric adjacency in compressed sparse row form
(offsets + sorted neighbor lists).  Self-loops are stripped and duplicate
edges merged on construction, so every ``Graph`` instance satisfies the
simple-undirected invariants by construction.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

UNIFORM = "uniform"
INVERSE_DEGREE = "inverse-degree"
INVERSE_LOG_DEGREE = "inverse-log-degree"
WEIGHT_SCHEMES = (UNIFORM, INVERSE_DEGREE, INVERSE_LOG_DEGREE)

_MAGIC = b"LWGRAPH\x00"
_FORMAT_VERSION = 1


class EdgeListError(ValueError):
    """Malformed edge-list input (carries the offending line number)."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph in CSR form.

    ``csr_neighbors[csr_offsets[i]:csr_offsets[i+1]]`` is the sorted
    neighbor list of node ``i``; ``degrees[i]`` equals its length.
    """

    node_count: int
    csr_offsets: np.ndarray
    csr_neighbors: np.ndarray
    degrees: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.degrees is None:
            object.__setattr__(self, "degrees", np.diff(self.csr_offsets))
        for name in ("csr_offsets", "csr_neighbors", "degrees"):
            arr = getattr(self, name)
            arr.setflags(write=False)

    @classmethod
    def from_edges(cls, edges, node_count: int | None = None) -> "Graph":
        """Build a graph from an iterable of (u, v) pairs.

        Pairs are symmetrized and deduplicated; self-loops are dropped.
        ``node_count`` defaults to ``1 + max node id``.
        """
        pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if pairs.size and pairs.min() < 0:
            raise ValueError("negative node id in edge list")
        if node_count is None:
            if pairs.size == 0:
                raise ValueError("empty edge list and no explicit node count")
            node_count = int(pairs.max()) + 1
        elif pairs.size and pairs.max() >= node_count:
            raise ValueError("node id exceeds declared node count")

        pairs = pairs[pairs[:, 0] != pairs[:, 1]]  # strip self-loops
        if pairs.size:
            both = np.vstack([pairs, pairs[:, ::-1]])
            both = np.unique(both, axis=0)
            offsets = np.zeros(node_count + 1, dtype=np.int64)
            counts = np.bincount(both[:, 0], minlength=node_count)
            np.cumsum(counts, out=offsets[1:])
            neighbors = both[:, 1].copy()
        else:
            offsets = np.zeros(node_count + 1, dtype=np.int64)
            neighbors = np.zeros(0, dtype=np.int64)
        return cls(node_count, offsets, neighbors)

    def neighbors(self, u: int) -> np.ndarray:
        return self.csr_neighbors[self.csr_offsets[u]:self.csr_offsets[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        idx = np.searchsorted(row, v)
        return idx < row.size and row[idx] == v

    @property
    def edge_count(self) -> int:
        """Number of undirected edges."""
        return self.csr_neighbors.size // 2

    def edge_array(self) -> np.ndarray:
        """All edges as an (m, 2) array with u < v."""
        rows = np.repeat(np.arange(self.node_count), self.degrees)
        mask = rows < self.csr_neighbors
        return np.column_stack([rows[mask], self.csr_neighbors[mask]])

    def adjacency(self) -> sp.csr_matrix:
        """Binary adjacency as a scipy CSR matrix (float64 values)."""
        data = np.ones(self.csr_neighbors.size, dtype=np.float64)
        return sp.csr_matrix(
            (data, self.csr_neighbors.copy(), self.csr_offsets.copy()),
            shape=(self.node_count, self.node_count),
        )

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and np.array_equal(self.csr_offsets, other.csr_offsets)
            and np.array_equal(self.csr_neighbors, other.csr_neighbors)
        )

    def __hash__(self):
        return hash((self.node_count, self.csr_neighbors.tobytes()))


@dataclass(frozen=True)
class SplitSet:
    """Train / validation / test edge partition (unordered pairs, u != v)."""

    train_edges: np.ndarray
    valid_edges: np.ndarray
    test_edges: np.ndarray

    def __post_init__(self):
        for name in ("train_edges", "valid_edges", "test_edges"):
            arr = np.asarray(getattr(self, name), dtype=np.int64).reshape(-1, 2)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        seen: set[tuple[int, int]] = set()
        for name in ("train_edges", "valid_edges", "test_edges"):
            for u, v in getattr(self, name):
                key = (min(u, v), max(u, v))
                if key in seen:
                    raise ValueError(f"edge {key} appears in more than one split")
                seen.add(key)

    def validate_ids(self, node_count: int) -> None:
        for name in ("train_edges", "valid_edges", "test_edges"):
            arr = getattr(self, name)
            if arr.size and (arr.min() < 0 or arr.max() >= node_count):
                raise ValueError(f"{name} contains node ids outside [0, {node_count})")


@dataclass(frozen=True)
class TransitionOperator:
    """Scheme-weighted normalized adjacency W_ij / sqrt(s_i s_j).

    ``s`` holds the row sums of the weighted adjacency; isolated rows
    (s_i == 0) are all-zero by convention.  The matrix is symmetric for
    the uniform scheme; the reweighted schemes are column-weighted and
    generally asymmetric.
    """

    matrix: sp.csr_matrix
    scheme: str
    row_weights: np.ndarray

    @property
    def node_count(self) -> int:
        return self.matrix.shape[0]

    def apply(self, psi: np.ndarray) -> np.ndarray:
        return self.matrix @ psi

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    @property
    def is_symmetric(self) -> bool:
        return self.scheme == UNIFORM


def parse_edge_lines(lines, comment_prefix: str = "#", delimiter: str | None = None,
                     one_indexed: bool = False):
    """Yield (u, v) pairs from edge-list text lines, validating as it goes."""
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith(comment_prefix):
            continue
        tokens = line.split(delimiter) if delimiter else line.replace(",", " ").split()
        if len(tokens) < 2:
            raise EdgeListError("expected two integer tokens", lineno)
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListError(f"non-integer token in {tokens[:2]}", lineno) from None
        if one_indexed:
            u, v = u - 1, v - 1
        if u < 0 or v < 0:
            raise EdgeListError(f"negative node id ({u}, {v})", lineno)
        yield u, v


def load_edge_list(stream, comment_prefix: str = "#", delimiter: str | None = None,
                   one_indexed: bool = False, node_count: int | None = None) -> Graph:
    """Parse an edge-list text stream into a Graph.

    ``stream`` yields text lines (an open file works).  A third column of
    edge weights, if present, is ignored; adjacency is binary.
    """
    edges = list(parse_edge_lines(stream, comment_prefix, delimiter, one_indexed))
    if not edges and node_count is None:
        raise EdgeListError("empty graph: no edges and no explicit node count")
    return Graph.from_edges(edges, node_count=node_count)


def load_pairs(stream, **options) -> np.ndarray:
    """Parse a split file (same format as an edge list) into an (m, 2) array."""
    pairs = list(parse_edge_lines(stream, **options))
    return np.asarray(pairs, dtype=np.int64).reshape(-1, 2)


def relabel_edges(pairs) -> tuple[np.ndarray, dict[int, int]]:
    """Map arbitrary integer node ids to dense 0-based ids.

    Returns the relabeled (m, 2) array and the original-to-dense id map,
    which should be persisted alongside any relabeled graph.
    """
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    unique_ids = np.unique(pairs)
    idmap = {int(old): new for new, old in enumerate(unique_ids)}
    dense = np.searchsorted(unique_ids, pairs)
    return dense, idmap


def merge_validation_edges(graph: Graph, splits: SplitSet) -> Graph:
    """Return a new graph over train + validation edges (collab-style merge)."""
    splits.validate_ids(graph.node_count)
    merged = np.vstack([graph.edge_array().reshape(-1, 2), splits.valid_edges])
    return Graph.from_edges(merged, node_count=graph.node_count)


def build_transition_operator(graph: Graph, scheme: str = UNIFORM) -> TransitionOperator:
    """Build the normalized transition operator for the given weight scheme.

    uniform:            W = A
    inverse-degree:     W[j, k] = A[j, k] / d_k
    inverse-log-degree: W[j, k] = A[j, k] / ln(d_k), zero weight when d_k <= 1

    Entries are W_ij / sqrt(s_i s_j) with s the row sums of W; isolated
    rows stay all-zero.
    """
    if scheme not in WEIGHT_SCHEMES:
        raise ValueError(f"unknown weight scheme {scheme!r}")
    adj = graph.adjacency()
    deg = graph.degrees.astype(np.float64)
    if scheme == UNIFORM:
        weights = adj
    else:
        col = graph.csr_neighbors
        if scheme == INVERSE_DEGREE:
            data = 1.0 / deg[col]
        else:
            # nodes with d <= 1 get zero weight (ln d would be <= 0)
            logd = np.zeros_like(deg)
            np.log(deg, out=logd, where=deg > 1)
            data = np.zeros(col.size, dtype=np.float64)
            ok = logd[col] > 0.0
            data[ok] = 1.0 / logd[col][ok]
        weights = sp.csr_matrix(
            (data, graph.csr_neighbors.copy(), graph.csr_offsets.copy()),
            shape=(graph.node_count, graph.node_count),
        )
    s = np.asarray(weights.sum(axis=1)).ravel()
    inv_sqrt = np.zeros_like(s)
    np.divide(1.0, np.sqrt(s, where=s > 0), out=inv_sqrt, where=s > 0)
    scale = sp.diags(inv_sqrt)
    matrix = (scale @ weights @ scale).tocsr()
    matrix.sort_indices()
    return TransitionOperator(matrix=matrix, scheme=scheme, row_weights=s)


def save_graph(graph: Graph, path) -> None:
    """Serialize CSR arrays with a 16-byte magic/version header.

    Layout: 8-byte magic ``LWGRAPH\\0``, uint32 version, uint32 reserved,
    then uint64 node count, uint64 neighbor-array length, followed by the
    offsets (int64 little-endian, N+1 entries) and neighbors (int64).
    """
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _FORMAT_VERSION, 0))
        fh.write(struct.pack("<QQ", graph.node_count, graph.csr_neighbors.size))
        fh.write(graph.csr_offsets.astype("<i8").tobytes())
        fh.write(graph.csr_neighbors.astype("<i8").tobytes())


def load_graph(path) -> Graph:
    """Inverse of :func:`save_graph`."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a serialized graph (bad magic)")
        version, _ = struct.unpack("<II", fh.read(8))
        if version != _FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported format version {version}")
        n, nnz = struct.unpack("<QQ", fh.read(16))
        offsets = np.frombuffer(fh.read(8 * (n + 1)), dtype="<i8").astype(np.int64)
        neighbors = np.frombuffer(fh.read(8 * nnz), dtype="<i8").astype(np.int64)
    return Graph(int(n), offsets, neighbors)
