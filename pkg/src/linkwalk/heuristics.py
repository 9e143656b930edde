"""Classical link-prediction baselines over the immutable CSR graph.

All scorers are pure functions of (graph, j, t); BFS uses per-call
scratch, so unrestricted parallel calls are safe.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np

from .graph import Graph

HEURISTIC_KINDS = ("cn", "aa", "ra", "katz", "shortest-path")


def common_neighbors(graph: Graph, j: int, t: int) -> np.ndarray:
    return np.intersect1d(graph.neighbors(j), graph.neighbors(t), assume_unique=True)


def cn_score(graph: Graph, j: int, t: int) -> float:
    """Number of common neighbors."""
    return float(common_neighbors(graph, j, t).size)


def aa_score(graph: Graph, j: int, t: int) -> float:
    """Sum of 1/ln(d) over common neighbors with degree >= 2."""
    total = 0.0
    for k in common_neighbors(graph, j, t):
        d = int(graph.degrees[k])
        if d >= 2:
            total += 1.0 / math.log(d)
    return total


def ra_score(graph: Graph, j: int, t: int) -> float:
    """Sum of 1/d over common neighbors."""
    common = common_neighbors(graph, j, t)
    if common.size == 0:
        return 0.0
    return float(np.sum(1.0 / graph.degrees[common]))


def katz_score(graph: Graph, j: int, t: int, beta: float = 0.1, max_len: int = 5) -> float:
    """Truncated Katz index: sum over l <= max_len of beta^l * (A^l)[j, t].

    Computed by iterated sparse matvec from e_j; A^l is never materialized.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    adj = graph.adjacency()
    vec = np.zeros(graph.node_count, dtype=np.float64)
    vec[j] = 1.0
    total = 0.0
    damp = 1.0
    for _ in range(max_len):
        vec = adj @ vec
        damp *= beta
        total += damp * vec[t]
        if not math.isfinite(total):
            raise OverflowError("Katz accumulation overflowed; reduce beta or max_len")
    return float(total)


def bfs_distance(graph: Graph, j: int, t: int, exclude_edge: bool = False) -> int:
    """BFS hop distance from j to t, or -1 when unreachable.

    With ``exclude_edge`` the direct edge (j, t) is skipped in both
    directions, as if removed from the graph.
    """
    if j == t:
        return 0
    dist = np.full(graph.node_count, -1, dtype=np.int64)
    dist[j] = 0
    queue = deque([j])
    while queue:
        u = queue.popleft()
        du = dist[u]
        for v in graph.neighbors(u):
            if exclude_edge and ((u == j and v == t) or (u == t and v == j)):
                continue
            if dist[v] < 0:
                dist[v] = du + 1
                if v == t:
                    return int(dist[v])
                queue.append(v)
    return -1


def shortest_path_score(graph: Graph, j: int, t: int) -> float:
    """1/dist with the scored edge itself excluded; 0 when disconnected."""
    d = bfs_distance(graph, j, t, exclude_edge=True)
    return 1.0 / d if d > 0 else 0.0


def make_heuristic_scorer(graph: Graph, kind: str, beta: float = 0.1, max_len: int = 5):
    """Return a batch scorer (pairs -> score array) for the named heuristic."""
    if kind == "cn":
        fn = lambda j, t: cn_score(graph, j, t)
    elif kind == "aa":
        fn = lambda j, t: aa_score(graph, j, t)
    elif kind == "ra":
        fn = lambda j, t: ra_score(graph, j, t)
    elif kind == "katz":
        fn = lambda j, t: katz_score(graph, j, t, beta=beta, max_len=max_len)
    elif kind == "shortest-path":
        fn = lambda j, t: shortest_path_score(graph, j, t)
    else:
        raise ValueError(f"unknown heuristic {kind!r}")
    return lambda pairs: np.array([fn(j, t) for j, t in pairs], dtype=np.float64)
