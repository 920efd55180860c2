"""Centrality rankings over a propagation graph.

Three measures are supported:

* closeness: outward influence, summing (1/hops) * influence along shortest
  paths to every reachable node;
* eigenvector: power iteration on the out-degree-normalized, influence-
  weighted transition matrix;
* alpha (Katz): C = (I - alpha * A^T)^-1 beta, with alpha a configurable
  fraction of 1/spectral_radius(A^T).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Mapping

import numpy as np

from .errors import EmptyGraph, SingularSystem, UnknownNode
from .propagation import PropagationGraph

MEASURES = ("closeness", "eigenvector", "alpha")


@dataclass(frozen=True)
class CentralityConfig:
    alpha_fraction: float = 0.9  # alpha = alpha_fraction / spectral radius
    tolerance: float = 1e-8
    max_iters: int = 1000
    katz_mode: str = "direct_solve"  # or "iterative_series"

    def __post_init__(self):
        if not 0.0 <= self.alpha_fraction < 1.0:
            raise ValueError("alpha_fraction must lie in [0, 1)")


@dataclass(frozen=True)
class CentralityScores:
    measure: str
    scores: Dict[str, float]
    converged: bool = True
    iterations: int = 0


def _require_nonempty(fp: PropagationGraph):
    if not fp.node_weights:
        raise EmptyGraph("propagation graph has no nodes")


def shortest_paths(fp: PropagationGraph, source: str) -> dict:
    """BFS hop distances from ``source`` plus, per target, the product of
    edge weights along the lexicographically smallest shortest path.

    Returns {node: (distance, path_weight_product)}; unreachable nodes are
    absent. The source maps to (0, 1.0).
    """
    if source not in fp.node_weights:
        raise UnknownNode(f"node {source!r} not in propagation graph")
    dist = {source: 0}
    # lexicographically smallest shortest path to each node, as a tuple
    best_path = {source: (source,)}
    frontier = [source]
    while frontier:
        nxt = []
        for u in sorted(frontier):
            for v in fp.successors(u):
                if v not in dist:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        for v in nxt:
            candidates = [
                best_path[u] + (v,)
                for u in fp.predecessors(v)
                if u in best_path and dist[u] == dist[v] - 1
            ]
            best_path[v] = min(candidates)
        frontier = nxt
    out = {}
    for v, d in dist.items():
        prod = 1.0
        path = best_path[v]
        for a, b in zip(path, path[1:]):
            prod *= fp.edges[(a, b)]
        out[v] = (d, prod)
    return out


def closeness_rank(fp: PropagationGraph) -> CentralityScores:
    """Impact-weighted closeness: for each node, sum over reachable targets
    of (1/distance) times the direct edge weight (adjacent targets) or the
    shortest-path weight product (distant targets)."""
    _require_nonempty(fp)
    scores = {}
    for n in fp.node_weights:
        paths = shortest_paths(fp, n)
        total = 0.0
        for target, (d, prod) in paths.items():
            if target == n:
                continue
            w = fp.edges.get((n, target))
            total += (1.0 / d) * (w if w is not None else prod)
        scores[n] = total
    return CentralityScores(measure="closeness", scores=scores)


def _node_order(fp: PropagationGraph):
    return sorted(fp.node_weights)


def _adjacency(fp: PropagationGraph, order=None) -> np.ndarray:
    order = order or _node_order(fp)
    idx = {n: i for i, n in enumerate(order)}
    a = np.zeros((len(order), len(order)))
    for (u, v), w in fp.edges.items():
        a[idx[u], idx[v]] = w
    return a


def transition_matrix(fp: PropagationGraph, order=None) -> np.ndarray:
    """Out-degree-normalized, influence-weighted transition matrix, with
    dangling rows redistributed uniformly."""
    order = order or _node_order(fp)
    n = len(order)
    m = _adjacency(fp, order)
    for i, node in enumerate(order):
        deg = fp.out_degree(node)
        if deg == 0:
            m[i, :] = 1.0 / n
        else:
            m[i, :] /= deg
    return m


def eigenvector_rank(
    fp: PropagationGraph, config: CentralityConfig = CentralityConfig()
) -> CentralityScores:
    """Power iteration from the uniform vector on the transition matrix,
    L1-renormalized each step; scores sum to 1."""
    _require_nonempty(fp)
    order = _node_order(fp)
    n = len(order)
    m = transition_matrix(fp, order)
    x = np.full(n, 1.0 / n)
    converged = False
    iterations = 0
    for _ in range(config.max_iters):
        iterations += 1
        y = m.T @ x
        total = y.sum()
        if total <= 0.0:
            # all influence drained away; fall back to uniform
            y = np.full(n, 1.0 / n)
            total = 1.0
        y /= total
        if np.abs(y - x).sum() < config.tolerance:
            x = y
            converged = True
            break
        x = y
    scores = {node: float(x[i]) for i, node in enumerate(order)}
    return CentralityScores(
        measure="eigenvector", scores=scores, converged=converged, iterations=iterations
    )


def spectral_radius(
    fp: PropagationGraph, config: CentralityConfig = CentralityConfig()
) -> float:
    """Largest-magnitude eigenvalue of the transposed weighted adjacency,
    estimated by power iteration; 0 for edgeless (or otherwise nilpotent)
    graphs."""
    _require_nonempty(fp)
    if not fp.edges:
        return 0.0
    order = _node_order(fp)
    at = _adjacency(fp, order).T
    n = len(order)
    x = np.full(n, 1.0 / np.sqrt(n))
    lam = 0.0
    for _ in range(config.max_iters):
        y = at @ x
        norm = np.linalg.norm(y)
        if norm < 1e-300:
            return 0.0  # nilpotent: iterate annihilated
        new_lam = norm
        x = y / norm
        if abs(new_lam - lam) < config.tolerance:
            return float(new_lam)
        lam = new_lam
    return float(lam)


def alpha_rank(
    fp: PropagationGraph,
    beta: Mapping[str, float],
    config: CentralityConfig = CentralityConfig(),
) -> CentralityScores:
    """Katz/alpha centrality: C = alpha * A^T C + beta, solved either
    directly or by iterating the series to ``tolerance``. alpha is
    ``alpha_fraction / spectral_radius`` (0 when the radius is 0, in which
    case C = beta exactly)."""
    _require_nonempty(fp)
    order = _node_order(fp)
    for n in order:
        if n not in beta:
            raise UnknownNode(f"beta missing for node {n!r}")
    b = np.array([float(beta[n]) for n in order])
    lam = spectral_radius(fp, config)
    alpha = config.alpha_fraction / lam if lam > 0 else 0.0
    if alpha == 0.0:
        return CentralityScores(measure="alpha", scores={n: float(beta[n]) for n in order})
    at = _adjacency(fp, order).T
    n = len(order)
    if config.katz_mode == "iterative_series":
        c = b.copy()
        converged = False
        iterations = 0
        for _ in range(config.max_iters):
            iterations += 1
            c_new = alpha * (at @ c) + b
            if np.abs(c_new - c).max() < config.tolerance:
                c = c_new
                converged = True
                break
            c = c_new
        return CentralityScores(
            measure="alpha",
            scores={node: float(c[i]) for i, node in enumerate(order)},
            converged=converged,
            iterations=iterations,
        )
    system = np.eye(n) - alpha * at
    try:
        c = np.linalg.solve(system, b)
    except np.linalg.LinAlgError:
        raise SingularSystem(
            f"(I - alpha*A^T) numerically singular at alpha={alpha!r}"
        )
    return CentralityScores(
        measure="alpha", scores={node: float(c[i]) for i, node in enumerate(order)}
    )


def rank(
    fp: PropagationGraph,
    measure: str,
    beta: Mapping[str, float] = None,
    config: CentralityConfig = CentralityConfig(),
) -> CentralityScores:
    """Dispatch to one of the three measures."""
    if measure == "closeness":
        return closeness_rank(fp)
    if measure == "eigenvector":
        return eigenvector_rank(fp, config)
    if measure == "alpha":
        if beta is None:
            beta = dict(fp.node_weights)
        return alpha_rank(fp, beta, config)
    raise ValueError(f"unknown measure {measure!r}")


def scores_to_csv(scores: CentralityScores) -> str:
    """CSV export, descending score, ties by ascending fault id."""
    lines = ["fault,score"]
    for fid, s in sorted(scores.scores.items(), key=lambda kv: (-kv[1], kv[0])):
        lines.append(f"{fid},{s!r}")
    return "\n".join(lines) + "\n"
