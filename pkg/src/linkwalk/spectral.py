"""Dense-linear-algebra checks of the walk's spectral and path-sum structure.

Everything here operates on small graphs: full eigendecompositions, the
brute-force path-sum amplitude, the k=2 unification identity against the
classical heuristics, and spectral-gap noise envelopes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import (
    INVERSE_DEGREE,
    INVERSE_LOG_DEGREE,
    UNIFORM,
    Graph,
    TransitionOperator,
    build_transition_operator,
)
from .heuristics import aa_score, ra_score
from .walk import WalkConfig, apply_oracle, apply_transition, init_state

DENSE_CAP = 2048
GAP_DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class SpectralReport:
    """Eigendecomposition of the normalized adjacency, eigenvalues descending.

    ``mu`` holds the step-operator eigenvalues 2*lambda - 1; ``gap`` is
    1 - lambda_2.  ``bound_assumption_ok`` records whether every
    non-principal eigenvalue satisfies |2*lambda - 1| <= |1 - 2*gap|, the
    precondition under which the (1 - 2*gap)^m noise envelope is valid.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, aligned with eigenvalues
    mu: np.ndarray
    gap: float
    lambda_min: float
    bound_assumption_ok: bool
    degenerate: bool  # top eigenvalue (numerically) repeated: gap ~ 0


def eigendecompose(op: TransitionOperator, cap: int = DENSE_CAP) -> SpectralReport:
    """Full symmetric eigendecomposition of the transition subspace matrix."""
    n = op.node_count
    if n > cap:
        raise ValueError(f"graph has {n} nodes, over the dense cap {cap}")
    dense = op.dense()
    if not np.allclose(dense, dense.T, atol=1e-12):
        raise ValueError("eigendecompose requires a symmetric operator (uniform scheme)")
    vals, vecs = np.linalg.eigh(dense)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    gap = float(1.0 - vals[1]) if n > 1 else 1.0
    mu = 2.0 * vals - 1.0
    degenerate = n > 1 and abs(gap) <= GAP_DEGENERATE_TOL
    if n > 1:
        # the envelope |1 - 2*gap|^m bounds the noise decay only when no
        # non-principal eigenvalue beats it in magnitude; lambda_min = -1
        # (bipartite components) makes the step operator reach -3 and is
        # flagged inapplicable
        within_envelope = bool(np.all(np.abs(mu[1:]) <= abs(1.0 - 2.0 * gap) + 1e-12))
        ok = within_envelope and float(vals[-1]) > -1.0 + 1e-9
    else:
        ok = True
    return SpectralReport(
        eigenvalues=vals,
        eigenvectors=vecs,
        mu=mu,
        gap=gap,
        lambda_min=float(vals[-1]),
        bound_assumption_ok=ok,
        degenerate=degenerate,
    )


def project_coefficients(report: SpectralReport, psi: np.ndarray) -> np.ndarray:
    """Coefficients of psi in the eigenbasis (c_i = <v_i | psi>)."""
    if psi.shape != (report.eigenvectors.shape[0],):
        raise ValueError("state length does not match eigenbasis dimension")
    return report.eigenvectors.T @ psi


def classical_noise_bound(report: SpectralReport) -> float:
    """Saturation level (1 - gap)/gap of damped classical path sums."""
    if report.gap <= GAP_DEGENERATE_TOL:
        raise ValueError("spectral gap is degenerate (<= 0); bound diverges")
    return (1.0 - report.gap) / report.gap


def noise_norm_trajectory(op: TransitionOperator, report: SpectralReport,
                          j: int, t: int | None, k: int,
                          oracle_enabled: bool = False) -> np.ndarray:
    """Norm of the non-principal component along the walk, steps 0..k."""
    if report.degenerate:
        raise ValueError("degenerate top eigenvalue; noise subspace ill-defined")
    v1 = report.eigenvectors[:, 0]
    psi = init_state(op.node_count, j)
    out = np.empty(k + 1, dtype=np.float64)

    def noise_norm(vec):
        return float(np.linalg.norm(vec - v1 * (v1 @ vec)))

    out[0] = noise_norm(psi)
    for m in range(1, k + 1):
        psi = apply_transition(op, psi)
        if oracle_enabled:
            psi = apply_oracle(psi, t)
        out[m] = noise_norm(psi)
    return out


def noise_envelope(report: SpectralReport, steps: int) -> np.ndarray:
    """Worst-case per-step decay factors |1 - 2*gap|^m for m = 0..steps."""
    base = abs(1.0 - 2.0 * report.gap)
    return base ** np.arange(steps + 1, dtype=np.float64)


def transition_entry(graph: Graph, op: TransitionOperator, u: int, v: int) -> float:
    """Single entry of the reflection operator: 2*P[u, v] - delta_uv."""
    return 2.0 * op.matrix[u, v] - (1.0 if u == v else 0.0)


def path_sum_amplitude(graph: Graph, scheme: str, j: int, t: int, k: int,
                       oracle_enabled: bool = True) -> float:
    """Brute-force amplitude: sum over all k-step node sequences j -> t.

    Each sequence u_1 = j, ..., u_{k+1} = t contributes the product of the
    per-step factors 2*P[u_l+1, u_l] - delta, with a sign flip for every
    post-transition visit to the target.  "Stay" steps enter through the
    -delta term, so sequences range over all nodes, not just neighbors.
    """
    if graph.node_count > 10 or k > 5:
        raise ValueError("brute-force enumeration guarded to N <= 10, k <= 5")
    op = build_transition_operator(graph, scheme)
    step = 2.0 * op.dense() - np.eye(graph.node_count)  # step[u', u]: u -> u'

    total = 0.0
    nodes = range(graph.node_count)

    def walk(u: int, depth: int, acc: float):
        nonlocal total
        if depth == k:
            if u == t:
                total += acc
            return
        remaining = k - depth
        for nxt in nodes:
            factor = step[nxt, u]
            if factor == 0.0:
                continue
            if oracle_enabled and nxt == t:
                factor = -factor
            if remaining == 1 and nxt != t:
                continue
            walk(nxt, depth + 1, acc * factor)

    walk(j, 0, 1.0)
    return total


def degree_normalized_cn(graph: Graph, j: int, t: int) -> float:
    """Common-neighbor sum weighted by 1/(d_k * sqrt(d_j d_t)).

    This is exactly (P^2)[j, t] for non-adjacent j != t under the uniform
    scheme, so the two-step oracle-free amplitude equals four times it.
    """
    common = np.intersect1d(graph.neighbors(j), graph.neighbors(t), assume_unique=True)
    if common.size == 0:
        return 0.0
    d = graph.degrees.astype(np.float64)
    return float(np.sum(1.0 / (d[common] * np.sqrt(d[j] * d[t]))))


def unification_check(graph: Graph, j: int, t: int, scheme: str = UNIFORM) -> dict:
    """Both sides of the two-step oracle-free identity, plus the matched heuristic.

    Identity: amplitude after two reflection steps equals
    4*(P^2)[t, j] - 4*P[t, j] + delta_jt.
    """
    op = build_transition_operator(graph, scheme)
    cfg = WalkConfig(steps=2, oracle_enabled=False, scheme=scheme)
    psi = init_state(op.node_count, j)
    psi = apply_transition(op, apply_transition(op, psi))
    lhs = float(psi[t])

    p_ej = op.apply(init_state(op.node_count, j))
    p2_ej = op.apply(p_ej)
    rhs = 4.0 * float(p2_ej[t]) - 4.0 * float(p_ej[t]) + (1.0 if j == t else 0.0)

    if scheme == UNIFORM:
        heuristic = degree_normalized_cn(graph, j, t)
    elif scheme == INVERSE_DEGREE:
        heuristic = ra_score(graph, j, t)
    elif scheme == INVERSE_LOG_DEGREE:
        heuristic = aa_score(graph, j, t)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    return {
        "quantum_amp": lhs,
        "heuristic_value": heuristic,
        "identity_residual": abs(lhs - rhs),
    }
