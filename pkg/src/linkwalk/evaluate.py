"""Negative sampling, rank computation, and MRR / Hits@K aggregation.

Negatives are sampled once per positive (frozen) so that every scorer in
a comparison run ranks against identical candidate sets.  All sampling is
driven by a single integer seed; per-query streams are derived from it,
so reports are reproducible byte-for-byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph
from .heuristics import cn_score, shortest_path_score

TIE_AVERAGE = "average"
TIE_OPTIMISTIC = "optimistic"
TIE_PESSIMISTIC = "pessimistic"
TIE_POLICIES = (TIE_AVERAGE, TIE_OPTIMISTIC, TIE_PESSIMISTIC)

_REJECTION_BUDGET = 200


@dataclass(frozen=True)
class NegativePolicy:
    variant: str  # uniform | corruption | hard
    count: int = 100  # per side for corruption; total otherwise (-1: full set)
    seed: int = 0
    heuristic_mix: tuple[tuple[str, float], ...] = (("cn", 0.5), ("shortest-path", 0.5))

    def as_dict(self) -> dict:
        d = {"variant": self.variant, "count": self.count, "seed": self.seed}
        if self.variant == "hard":
            d["heuristic_mix"] = {k: v for k, v in self.heuristic_mix}
        return d


@dataclass(frozen=True)
class RankedQuery:
    positive: tuple[int, int]
    positive_score: float
    negative_scores: np.ndarray
    rank: int


@dataclass(frozen=True)
class EvalReport:
    mrr: float
    hits: dict[int, float]
    per_query: list[RankedQuery]
    policy: NegativePolicy
    scorer_id: str
    seed: int

    def as_dict(self) -> dict:
        return {
            "scorer": self.scorer_id,
            "policy": self.policy.as_dict(),
            "seed": self.seed,
            "metrics": {
                "mrr": self.mrr,
                "hits": {str(k): v for k, v in sorted(self.hits.items())},
            },
            "queries": [
                {
                    "u": int(q.positive[0]),
                    "a": int(q.positive[1]),
                    "pos_score": q.positive_score,
                    "rank": q.rank,
                    "n_negs": int(q.negative_scores.size),
                }
                for q in self.per_query
            ],
        }


def _canonical(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


def sample_uniform_negatives(graph_full: Graph, count: int, seed: int) -> list[tuple[int, int]]:
    """Distinct unordered non-edge pairs via seeded rejection sampling."""
    n = graph_full.node_count
    rng = np.random.Generator(np.random.PCG64(seed))
    chosen: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    attempts_left = _REJECTION_BUDGET * max(count, 1)
    while len(chosen) < count:
        if attempts_left <= 0:
            raise RuntimeError(
                f"could not find {count} non-edges within the retry budget "
                f"(found {len(chosen)}); graph too dense?"
            )
        attempts_left -= 1
        u, v = int(rng.integers(n)), int(rng.integers(n))
        if u == v:
            continue
        key = _canonical(u, v)
        if key in seen or graph_full.has_edge(u, v):
            continue
        seen.add(key)
        chosen.append(key)
    return chosen


def corruption_candidates(positive: tuple[int, int], graph_full: Graph) -> tuple[list, list]:
    """Valid corruptions of each endpoint: non-edges, non-self, not the positive."""
    u, a = positive
    pos_key = _canonical(u, a)
    left, right = [], []
    for x in range(graph_full.node_count):
        if x != a and x != u and not graph_full.has_edge(x, a):
            if _canonical(x, a) != pos_key:
                left.append((x, a))
        if x != u and x != a and not graph_full.has_edge(u, x):
            if _canonical(u, x) != pos_key:
                right.append((u, x))
    return left, right


def corruption_negatives(positive: tuple[int, int], graph_full: Graph,
                         count_per_side: int, seed: int) -> list[tuple[int, int]]:
    """Sample up to count_per_side corruptions of each endpoint (-1: full set)."""
    left, right = corruption_candidates(positive, graph_full)
    if count_per_side < 0:
        return left + right
    if count_per_side == 0:
        return []
    rng = np.random.Generator(np.random.PCG64(seed))
    out: list[tuple[int, int]] = []
    for side in (left, right):
        if len(side) <= count_per_side:
            out.extend(side)
        else:
            idx = rng.choice(len(side), size=count_per_side, replace=False)
            out.extend(side[i] for i in sorted(idx))
    return out


def _minmax(values: np.ndarray) -> np.ndarray:
    lo, hi = values.min(), values.max()
    if hi - lo <= 0:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def hard_negatives(positive: tuple[int, int], graph_full: Graph, count: int,
                   heuristic_mix=(("cn", 0.5), ("shortest-path", 0.5)),
                   seed: int = 0) -> list[tuple[int, int]]:
    """Top corruption candidates by a mix of min-max-normalized heuristics.

    Candidates that look most like real edges (high common-neighbor count,
    short alternative paths) rank first; the seed only breaks score ties.
    """
    left, right = corruption_candidates(positive, graph_full)
    candidates = left + right
    if not candidates:
        return []
    mix = np.zeros(len(candidates), dtype=np.float64)
    total_weight = 0.0
    for kind, weight in heuristic_mix:
        if kind == "cn":
            raw = np.array([cn_score(graph_full, j, t) for j, t in candidates])
        elif kind == "shortest-path":
            raw = np.array([shortest_path_score(graph_full, j, t) for j, t in candidates])
        else:
            raise ValueError(f"unsupported heuristic in mix: {kind!r}")
        mix += weight * _minmax(raw)
        total_weight += weight
    if total_weight > 0:
        mix /= total_weight
    rng = np.random.Generator(np.random.PCG64(seed))
    jitter = rng.random(len(candidates))
    order = np.lexsort((jitter, -mix))  # descending mix, seeded tie-break
    return [candidates[i] for i in order[:count]]


def sample_negatives(positive: tuple[int, int], graph_full: Graph,
                     policy: NegativePolicy, seed: int) -> list[tuple[int, int]]:
    """Dispatch one query's frozen negative set for the given policy."""
    if policy.variant == "uniform":
        negs = sample_uniform_negatives(graph_full, policy.count, seed)
        pos_key = _canonical(*positive)
        return [p for p in negs if p != pos_key]
    if policy.variant == "corruption":
        return corruption_negatives(positive, graph_full, policy.count, seed)
    if policy.variant == "hard":
        return hard_negatives(positive, graph_full, policy.count,
                              heuristic_mix=policy.heuristic_mix, seed=seed)
    raise ValueError(f"unknown negative policy {policy.variant!r}")


def compute_rank(positive_score: float, negative_scores, tie_policy: str = TIE_AVERAGE) -> int:
    """Rank of the positive among its negatives under the given tie policy."""
    negative_scores = np.asarray(negative_scores, dtype=np.float64)
    if not np.isfinite(positive_score) or not np.isfinite(negative_scores).all():
        raise ValueError("non-finite score in rank computation")
    greater = int(np.sum(negative_scores > positive_score))
    equal = int(np.sum(negative_scores == positive_score))
    if tie_policy == TIE_AVERAGE:
        return 1 + greater + equal // 2
    if tie_policy == TIE_OPTIMISTIC:
        return 1 + greater
    if tie_policy == TIE_PESSIMISTIC:
        return 1 + greater + equal
    raise ValueError(f"unknown tie policy {tie_policy!r}")


def aggregate(ranks, k_list=(10, 50)) -> tuple[float, dict[int, float]]:
    """MRR and Hits@K over a list of ranks."""
    ranks = np.asarray(ranks, dtype=np.float64)
    if ranks.size == 0:
        raise ValueError("cannot aggregate an empty rank list")
    mrr = float(np.mean(1.0 / ranks))
    hits = {int(k): float(np.mean(ranks <= k)) for k in k_list}
    return mrr, hits


def frozen_negative_sets(test_edges, graph_full: Graph,
                         policy: NegativePolicy) -> list[list[tuple[int, int]]]:
    """Per-positive negative sets, derived deterministically from the policy seed."""
    root = np.random.SeedSequence(policy.seed)
    children = root.spawn(len(test_edges))
    return [
        sample_negatives(tuple(map(int, pos)), graph_full, policy,
                         seed=int(child.generate_state(1)[0]))
        for pos, child in zip(test_edges, children)
    ]


def run_evaluation(scorer, scorer_id: str, test_edges, negative_sets,
                   policy: NegativePolicy, k_list=(10, 50),
                   tie_policy: str = TIE_AVERAGE, max_workers: int = 1) -> EvalReport:
    """Score every test edge against its frozen negatives and aggregate.

    ``scorer`` maps a list of (source, target) pairs to an array of scores;
    all pairs of a query are scored in one call so batched scorers can
    share their per-source caches.  With ``max_workers`` > 1 queries are
    scored concurrently; results stay in query order, so reports are
    identical at any parallelism degree.
    """
    def score_query(item):
        pos, negs = item
        pos = tuple(map(int, pos))
        batch = [pos] + list(negs)
        scores = np.asarray(scorer(batch), dtype=np.float64)
        return pos, float(scores[0]), scores[1:]

    items = list(zip(test_edges, negative_sets))
    if max_workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            scored = list(pool.map(score_query, items))
    else:
        scored = [score_query(item) for item in items]

    queries: list[RankedQuery] = []
    ranks: list[int] = []
    for pos, pos_score, neg_scores in scored:
        rank = compute_rank(pos_score, neg_scores, tie_policy)
        queries.append(RankedQuery(pos, pos_score, neg_scores, rank))
        ranks.append(rank)
    mrr, hits = aggregate(ranks, k_list)
    return EvalReport(mrr=mrr, hits=hits, per_query=queries, policy=policy,
                      scorer_id=scorer_id, seed=policy.seed)
