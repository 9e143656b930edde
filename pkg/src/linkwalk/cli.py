"""Command-line entry point: ingest, score, eval, ablate, verify.

Runs are driven by an optional TOML config file plus flag overrides
(flags win).  Every output file embeds the tool version, a hash of the
effective configuration, and the seed, so identical inputs reproduce
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .graph import (
    EdgeListError,
    Graph,
    SplitSet,
    WEIGHT_SCHEMES,
    build_transition_operator,
    load_edge_list,
    load_graph,
    load_pairs,
    merge_validation_edges,
    relabel_edges,
    save_graph,
)
from .heuristics import HEURISTIC_KINDS, make_heuristic_scorer
from .evaluate import (
    NegativePolicy,
    TIE_POLICIES,
    frozen_negative_sets,
    run_evaluation,
)
from .spectral import eigendecompose, path_sum_amplitude, unification_check
from .walk import BATCHED, NAIVE, WalkConfig, evolve, score_pairs

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2

# per-dataset walk depths; unknown datasets fall back to k=2 with a warning
DATASET_STEPS = {"cora": 2, "citeseer": 4, "pubmed": 3, "collab": 2, "ddi": 2}

PATH_SUM_TOL = 1e-9
IDENTITY_TOL = 1e-10


class UsageError(Exception):
    pass


def _load_toml(path: str) -> dict:
    try:
        import tomllib  # py >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _effective_config(args: argparse.Namespace, keys: list[str]) -> dict:
    """Merge the config file (if any) with CLI flags; flags win."""
    cfg = {}
    if getattr(args, "config", None):
        cfg.update(_load_toml(args.config))
    for key in keys:
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            cfg[key] = value
    return cfg


def _config_hash(cfg: dict) -> str:
    # output destinations are not part of the run's semantics
    canonical = json.dumps(
        {k: v for k, v in cfg.items() if k not in ("out", "pairs_out")},
        sort_keys=True, default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _provenance(cfg: dict) -> dict:
    return {
        "tool_version": __version__,
        "config_hash": _config_hash(cfg),
        "seed": cfg.get("seed", 0),
    }


def _open_edges(path: str) -> Graph:
    if not os.path.exists(path):
        raise UsageError(f"edge file not found: {path}")
    if path.endswith(".bin"):
        return load_graph(path)
    with open(path, "rt", encoding="utf-8") as fh:
        return load_edge_list(fh)


def _load_split_files(cfg: dict, node_count: int) -> SplitSet:
    def read(key):
        path = cfg.get(key)
        if path is None:
            raise UsageError(f"missing split file option: {key}")
        if not os.path.exists(path):
            raise UsageError(f"split file not found: {path}")
        with open(path, "rt", encoding="utf-8") as fh:
            return load_pairs(fh)

    splits = SplitSet(read("train"), read("valid"), read("test"))
    splits.validate_ids(node_count)
    return splits


def make_random_splits(graph: Graph, ratios=(0.85, 0.05, 0.10), seed: int = 0) -> SplitSet:
    """Random edge partition into train/valid/test with the given ratios."""
    edges = graph.edge_array()
    rng = np.random.Generator(np.random.PCG64(seed))
    order = rng.permutation(edges.shape[0])
    n_train = int(round(ratios[0] * edges.shape[0]))
    n_valid = int(round(ratios[1] * edges.shape[0]))
    return SplitSet(
        edges[order[:n_train]],
        edges[order[n_train:n_train + n_valid]],
        edges[order[n_train + n_valid:]],
    )


def resolve_steps(cfg: dict) -> int:
    if cfg.get("k") is not None:
        k = int(cfg["k"])
        if not 1 <= k <= 32:
            raise UsageError(f"walk depth k={k} outside the supported range [1, 32]")
        return k
    dataset = cfg.get("dataset")
    if dataset is not None:
        name = str(dataset).lower()
        for key, steps in DATASET_STEPS.items():
            if key in name:
                return steps
        print(f"warning: unknown dataset {dataset!r}, defaulting to k=2", file=sys.stderr)
    return 2


def make_scorer(graph: Graph, cfg: dict):
    """Build a (pairs -> scores) callable from the scorer settings."""
    kind = cfg.get("scorer", "quantum")
    if kind == "quantum":
        scheme = cfg.get("scheme", "uniform")
        if scheme not in WEIGHT_SCHEMES:
            raise UsageError(f"unknown weight scheme {scheme!r}")
        walk_cfg = WalkConfig(
            steps=resolve_steps(cfg),
            oracle_enabled=bool(cfg.get("oracle", True)),
            scheme=scheme,
            scoring_mode=cfg.get("scoring_mode", BATCHED),
            normalize=bool(cfg.get("normalize", False)),
        )
        op = build_transition_operator(graph, scheme)
        scorer_id = (f"quantum(k={walk_cfg.steps},oracle={walk_cfg.oracle_enabled},"
                     f"scheme={walk_cfg.scheme})")
        return lambda pairs: score_pairs(op, pairs, walk_cfg), scorer_id
    if kind in HEURISTIC_KINDS:
        beta = float(cfg.get("katz_beta", 0.1))
        max_len = int(cfg.get("katz_max_len", 5))
        return make_heuristic_scorer(graph, kind, beta=beta, max_len=max_len), kind
    raise UsageError(f"unknown scorer {kind!r}")


def _write_scores(path: str, pairs, scores, provenance: dict, as_json: bool) -> None:
    if as_json:
        payload = dict(provenance)
        payload["scores"] = {
            f"{int(u)},{int(v)}": float(s) for (u, v), s in zip(pairs, scores)
        }
        with open(path, "wt", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return
    with open(path, "wt", encoding="utf-8") as fh:
        for key, value in sorted(provenance.items()):
            fh.write(f"# {key}={value}\n")
        fh.write("source,target,score\n")
        for (u, v), s in zip(pairs, scores):
            fh.write(f"{int(u)},{int(v)},{s:.17g}\n")


def cmd_ingest(args) -> int:
    cfg = _effective_config(args, ["edges", "out", "one-indexed", "relabel", "idmap"])
    if not os.path.exists(cfg["edges"]):
        raise UsageError(f"edge file not found: {cfg['edges']}")
    with open(cfg["edges"], "rt", encoding="utf-8") as fh:
        if cfg.get("relabel"):
            pairs = load_pairs(fh, one_indexed=bool(cfg.get("one-indexed", False)))
            dense, idmap = relabel_edges(pairs)
            graph = Graph.from_edges(dense)
            idmap_path = cfg.get("idmap") or str(cfg["out"]) + ".idmap.json"
            with open(idmap_path, "wt", encoding="utf-8") as mfh:
                json.dump({str(k): v for k, v in idmap.items()}, mfh, sort_keys=True)
                mfh.write("\n")
        else:
            graph = load_edge_list(fh, one_indexed=bool(cfg.get("one-indexed", False)))
    save_graph(graph, cfg["out"])
    print(f"wrote {cfg['out']}: {graph.node_count} nodes, {graph.edge_count} edges")
    return EXIT_OK


def cmd_score(args) -> int:
    keys = ["edges", "pairs", "out", "scorer", "k", "oracle", "scheme", "normalize",
            "katz_beta", "katz_max_len", "seed", "dataset", "format"]
    cfg = _effective_config(args, keys)
    graph = _open_edges(cfg["edges"])
    if not os.path.exists(cfg["pairs"]):
        raise UsageError(f"pairs file not found: {cfg['pairs']}")
    with open(cfg["pairs"], "rt", encoding="utf-8") as fh:
        pairs = [tuple(p) for p in load_pairs(fh)]
    scorer, _ = make_scorer(graph, cfg)
    scores = scorer(pairs)
    _write_scores(cfg["out"], pairs, scores, _provenance(cfg),
                  as_json=cfg.get("format") == "json")
    return EXIT_OK


def _prepare_eval(cfg: dict):
    graph_full_src = _open_edges(cfg["edges"])
    seed = int(cfg.get("seed", 0))
    if cfg.get("train"):
        splits = _load_split_files(cfg, graph_full_src.node_count)
    else:
        ratios = cfg.get("split_ratios", (0.85, 0.05, 0.10))
        splits = make_random_splits(graph_full_src, tuple(ratios), seed=seed)
    graph_train = Graph.from_edges(splits.train_edges, node_count=graph_full_src.node_count)
    if cfg.get("merge_valid", False):
        graph_train = merge_validation_edges(graph_train, splits)
    all_edges = np.vstack([splits.train_edges, splits.valid_edges, splits.test_edges])
    graph_full = Graph.from_edges(all_edges, node_count=graph_full_src.node_count)
    policy = NegativePolicy(
        variant=cfg.get("policy", "uniform"),
        count=int(cfg.get("negatives", 100)),
        seed=seed,
    )
    negative_sets = frozen_negative_sets(splits.test_edges, graph_full, policy)
    return graph_train, splits, graph_full, policy, negative_sets


def _thread_count(cfg: dict) -> int:
    env = os.environ.get("QWALK_THREADS")
    if env is not None:
        return max(1, int(env))
    if cfg.get("threads") is not None:
        return max(1, int(cfg["threads"]))
    return 1


def _eval_once(cfg: dict, graph_train, splits, policy, negative_sets):
    scorer, scorer_id = make_scorer(graph_train, cfg)
    k_list = tuple(int(k) for k in cfg.get("hits_k", (10, 50)))
    tie = cfg.get("tie_policy", "average")
    if tie not in TIE_POLICIES:
        raise UsageError(f"unknown tie policy {tie!r}")
    return run_evaluation(scorer, scorer_id, splits.test_edges, negative_sets,
                          policy, k_list=k_list, tie_policy=tie,
                          max_workers=_thread_count(cfg))


def _write_report(path: str, report, cfg: dict) -> None:
    payload = dict(_provenance(cfg))
    payload.update(report.as_dict())
    with open(path, "wt", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


EVAL_KEYS = ["edges", "train", "valid", "test", "out", "scorer", "k", "oracle",
             "scheme", "normalize", "katz_beta", "katz_max_len", "seed", "dataset",
             "policy", "negatives", "tie_policy", "merge_valid", "hits_k", "threads",
             "summary_out"]


def cmd_eval(args) -> int:
    cfg = _effective_config(args, EVAL_KEYS)
    graph_train, splits, _, policy, negative_sets = _prepare_eval(cfg)
    report = _eval_once(cfg, graph_train, splits, policy, negative_sets)
    _write_report(cfg["out"], report, cfg)
    summary_out = cfg.get("summary_out")
    if summary_out:
        header = "scorer,policy,seed,mrr," + ",".join(
            f"hits@{k}" for k in sorted(report.hits))
        line = (f"{report.scorer_id},{policy.variant},{report.seed},{report.mrr:.17g},"
                + ",".join(f"{report.hits[k]:.17g}" for k in sorted(report.hits)))
        new_file = not os.path.exists(summary_out)
        with open(summary_out, "at", encoding="utf-8") as fh:
            if new_file:
                fh.write(header + "\n")
            fh.write(line + "\n")
    print(f"{report.scorer_id}: MRR={report.mrr:.4f} "
          + " ".join(f"Hits@{k}={v:.4f}" for k, v in sorted(report.hits.items())))
    return EXIT_OK


def cmd_ablate(args) -> int:
    cfg = _effective_config(args, EVAL_KEYS + ["k_min", "k_max", "pairs_out"])
    graph_train, splits, _, policy, negative_sets = _prepare_eval(cfg)
    k_min, k_max = int(cfg.get("k_min", 1)), int(cfg.get("k_max", 10))
    rows = []
    for k in range(k_min, k_max + 1):
        for oracle in (True, False):
            run_cfg = dict(cfg, scorer="quantum", k=k, oracle=oracle)
            report = _eval_once(run_cfg, graph_train, splits, policy, negative_sets)
            rows.append((k, oracle, report.mrr, report.hits))
    with open(cfg["out"], "wt", encoding="utf-8") as fh:
        for key, value in sorted(_provenance(cfg).items()):
            fh.write(f"# {key}={value}\n")
        k_list = sorted(rows[0][3])
        fh.write("k,oracle,mrr," + ",".join(f"hits@{k}" for k in k_list) + "\n")
        for k, oracle, mrr, hits in rows:
            hit_cols = ",".join(f"{hits[kk]:.17g}" for kk in k_list)
            fh.write(f"{k},{str(oracle).lower()},{mrr:.17g},{hit_cols}\n")

    # per-pair target probabilities with/without the oracle at the base k
    pairs_out = cfg.get("pairs_out")
    if pairs_out:
        scheme = cfg.get("scheme", "uniform")
        op = build_transition_operator(graph_train, scheme)
        base_k = resolve_steps(cfg)
        with open(pairs_out, "wt", encoding="utf-8") as fh:
            for key, value in sorted(_provenance(cfg).items()):
                fh.write(f"# {key}={value}\n")
            fh.write("source,target,k,prob_with_oracle,prob_without_oracle\n")
            for u, v in splits.test_edges:
                u, v = int(u), int(v)
                with_o = float(evolve(op, u, v, WalkConfig(steps=base_k, oracle_enabled=True,
                                                           scheme=scheme))[v]) ** 2
                without_o = float(evolve(op, u, v, WalkConfig(steps=base_k, oracle_enabled=False,
                                                              scheme=scheme))[v]) ** 2
                fh.write(f"{u},{v},{base_k},{with_o:.17g},{without_o:.17g}\n")
    return EXIT_OK


def verification_catalog() -> dict[str, Graph]:
    """Small named graphs used by the verification suite."""
    def cycle(n):
        return [(i, (i + 1) % n) for i in range(n)]

    return {
        "path5": Graph.from_edges([(i, i + 1) for i in range(4)]),
        "cycle6": Graph.from_edges(cycle(6)),
        "star5": Graph.from_edges([(0, i) for i in range(1, 5)]),
        "complete5": Graph.from_edges([(i, j) for i in range(5) for j in range(i + 1, 5)]),
        "barbell6": Graph.from_edges([(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]),
    }


def run_verification(corrupt: bool = False) -> dict:
    """Path-sum and identity residuals over the graph catalog, plus gap data."""
    from .walk import score_pair

    results = []
    overall_ok = True
    for name, graph in verification_catalog().items():
        op = build_transition_operator(graph, "uniform")
        report = eigendecompose(op)
        max_path_residual = 0.0
        max_identity_residual = 0.0
        n = graph.node_count
        for j in range(n):
            for t in range(n):
                res = unification_check(graph, j, t)["identity_residual"]
                max_identity_residual = max(max_identity_residual, res)
                for k in range(1, 4):
                    amp = path_sum_amplitude(graph, "uniform", j, t, k)
                    score = score_pair(op, j, t, WalkConfig(steps=k, scoring_mode=NAIVE))
                    if corrupt:
                        score += 1e-3  # test hook: force a residual violation
                    max_path_residual = max(max_path_residual, abs(amp * amp - score))
        ok = max_path_residual <= PATH_SUM_TOL and max_identity_residual <= IDENTITY_TOL
        overall_ok = overall_ok and ok
        results.append({
            "graph": name,
            "scheme": "uniform",
            "gap": float(report.gap),
            "lambda_min": float(report.lambda_min),
            "bound_assumption_ok": bool(report.bound_assumption_ok),
            "identity_max_residual": float(max_identity_residual),
            "path_sum_max_residual": float(max_path_residual),
            "ok": bool(ok),
        })
    return {"ok": bool(overall_ok), "checks": results}


def cmd_verify(args) -> int:
    cfg = _effective_config(args, ["out", "seed"])
    outcome = run_verification(corrupt=bool(getattr(args, "corrupt", False)))
    payload = dict(_provenance(cfg))
    payload.update(outcome)
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if cfg.get("out"):
        with open(cfg["out"], "wt", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if outcome["ok"] else EXIT_VERIFY_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linkwalk",
                                     description="Quantum-walk link prediction toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="TOML config file; flags override its keys")
        p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("ingest", help="parse an edge list into the binary graph format")
    add_common(p)
    p.add_argument("--edges")
    p.add_argument("--out")
    p.add_argument("--one-indexed", action="store_true", default=None)
    p.add_argument("--relabel", action="store_true", default=None,
                   help="map arbitrary node ids to dense 0-based ids")
    p.add_argument("--idmap", help="where to write the id map (with --relabel)")
    p.set_defaults(func=cmd_ingest)

    def add_scorer_flags(p):
        p.add_argument("--scorer", choices=("quantum",) + HEURISTIC_KINDS)
        p.add_argument("--k", type=int)
        p.add_argument("--oracle", action=argparse.BooleanOptionalAction, default=None)
        p.add_argument("--scheme", choices=WEIGHT_SCHEMES)
        p.add_argument("--normalize", action="store_true", default=None)
        p.add_argument("--katz-beta", type=float, dest="katz_beta")
        p.add_argument("--katz-max-len", type=int, dest="katz_max_len")
        p.add_argument("--dataset")

    p = sub.add_parser("score", help="score explicit node pairs")
    add_common(p)
    p.add_argument("--edges")
    p.add_argument("--pairs")
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))
    add_scorer_flags(p)
    p.set_defaults(func=cmd_score)

    def add_eval_flags(p):
        p.add_argument("--edges")
        p.add_argument("--train")
        p.add_argument("--valid")
        p.add_argument("--test")
        p.add_argument("--out")
        p.add_argument("--policy", choices=("uniform", "corruption", "hard"))
        p.add_argument("--negatives", type=int)
        p.add_argument("--tie-policy", choices=TIE_POLICIES, dest="tie_policy")
        p.add_argument("--merge-valid", action="store_true", default=None, dest="merge_valid")
        p.add_argument("--threads", type=int, help="scoring fan-out degree "
                       "(QWALK_THREADS env overrides)")
        add_scorer_flags(p)

    p = sub.add_parser("eval", help="full link-prediction evaluation")
    add_common(p)
    add_eval_flags(p)
    p.add_argument("--summary-out", dest="summary_out",
                   help="append a one-line CSV summary for cross-scorer tables")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="sweep walk depth and oracle on/off")
    add_common(p)
    add_eval_flags(p)
    p.add_argument("--k-min", type=int, dest="k_min")
    p.add_argument("--k-max", type=int, dest="k_max")
    p.add_argument("--pairs-out", dest="pairs_out")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("verify", help="run the theory verification suite")
    add_common(p)
    p.add_argument("--out")
    p.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, EdgeListError, FileNotFoundError, KeyError) as exc:
        detail = str(exc) if not isinstance(exc, KeyError) else f"missing option {exc}"
        print(f"error: {detail}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
