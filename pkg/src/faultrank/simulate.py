"""Simulation harness: synthetic catalogs/graphs, percolation ground truth,
and the accuracy sweep comparing the three centrality measures across
selection thresholds."""
from __future__ import annotations

import hashlib
import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from .centrality import MEASURES, CentralityConfig, rank
from .errors import GenerationFailed, InvalidInput, UnknownTrigger
from .localization import map_to_components, select_vulnerable_faults
from .model import (
    Component,
    Fault,
    FaultCatalog,
    FaultGraph,
    ImpactFactors,
    build_catalog,
    build_fault_graph,
)
from .propagation import PropagationConfig, build_propagation_graph, propagate_weights

DEFAULT_MODULE_MIX = {"VM": 0.3, "Proxy": 0.2, "Runtime": 0.3, "Database": 0.2}

# component granularity for generated catalogs
FAULTS_PER_COMPONENT = 8

# bridge edges per component, expressed as ring steps: a step of 1 bridges
# to the next component, 2 to the one after
BRIDGE_PLAN = (1, 2, 1, 2, 1, 2)

# exact percolation enumerates 2^edges subsets; beyond this it falls back
# to Monte-Carlo regardless of node count
EXACT_EDGE_LIMIT = 20


def _mix_seed(*parts) -> int:
    """Stable 63-bit seed derived from heterogeneous parts."""
    digest = hashlib.blake2b(
        ":".join(str(p) for p in parts).encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big") >> 1


@dataclass(frozen=True)
class ScenarioSpec:
    n_faults: int = 100
    module_mix: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_MODULE_MIX))
    edge_density: float = 3.0  # expected out-degree
    ifv_distribution: Tuple[float, float] = (0.1, 1.0)  # uniform bounds
    prob_distribution: Tuple[float, float] = (0.05, 0.35)  # uniform bounds
    seed: int = 0

    def __post_init__(self):
        if self.n_faults < 2:
            raise InvalidInput("n_faults must be >= 2")
        if abs(sum(self.module_mix.values()) - 1.0) > 1e-9:
            raise InvalidInput("module_mix proportions must sum to 1")


def _apportion(n: int, mix: Dict[str, float]) -> Dict[str, int]:
    """Largest-remainder apportionment of n faults across kinds."""
    kinds = sorted(mix)
    quotas = {k: n * mix[k] for k in kinds}
    counts = {k: int(quotas[k]) for k in kinds}
    leftover = n - sum(counts.values())
    by_remainder = sorted(kinds, key=lambda k: (-(quotas[k] - counts[k]), k))
    for k in by_remainder[:leftover]:
        counts[k] += 1
    return counts


def _weakly_connected(node_ids, edge_set) -> bool:
    idx = {u: i for i, u in enumerate(node_ids)}
    parent = list(range(len(node_ids)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in edge_set:
        ru, rv = find(idx[u]), find(idx[v])
        if ru != rv:
            parent[ru] = rv
    return len({find(i) for i in range(len(node_ids))}) == 1


def generate_scenario(spec: ScenarioSpec, max_retries: int = 200):
    """Build a random weakly-connected catalog + fault graph and pick a
    trigger among the non-sink nodes. Deterministic in ``spec.seed``.

    Returns (catalog, graph, trigger_fault_id).
    """
    rng = random.Random(spec.seed)
    counts = _apportion(spec.n_faults, spec.module_mix)

    components = []
    faults = []
    for kind in sorted(counts):
        k_faults = counts[kind]
        if k_faults == 0:
            continue
        n_comp = max(1, round(k_faults / FAULTS_PER_COMPONENT))
        comp_ids = [f"C.{kind.lower()}{j}" for j in range(n_comp)]
        components.extend(
            Component(id=cid, name=f"{kind} module {j}", kind=kind)
            for j, cid in enumerate(comp_ids)
        )
        for i in range(k_faults):
            fid = f"log.fault.{kind.lower()}.steps.t{i:03d}"
            faults.append(
                Fault(
                    id=fid,
                    component=comp_ids[i % n_comp],
                    independent_probability=rng.uniform(*spec.prob_distribution),
                )
            )
    catalog = build_catalog(components, faults)
    node_ids = sorted(f.id for f in faults)
    n = len(node_ids)

    # Fault influence is modular: faults trigger faults of their own
    # component freely, while influence crosses component boundaries only
    # over a few bridge edges to the next components on a ring. The per-node
    # edge budget (edge_density) is spent on bridges first, intra-component
    # edges for the rest, which makes fault propagation decay with
    # component distance instead of flooding the whole graph.
    comp_order = sorted(c.id for c in components)
    members = {cid: sorted(f.id for f in faults if f.component == cid) for cid in comp_order}
    n_comp = len(comp_order)

    edge_idx = None
    for _ in range(max_retries):
        candidate = set()
        for pos, cid in enumerate(comp_order):
            pool = members[cid]
            k = len(pool)
            budget = max(0, round(spec.edge_density * k))
            n_bridges = min(len(BRIDGE_PLAN), budget) if n_comp > 1 else 0
            for b in range(n_bridges):
                target_comp = comp_order[(pos + BRIDGE_PLAN[b]) % n_comp]
                u = rng.choice(pool)
                v = rng.choice(members[target_comp])
                candidate.add((u, v))
            intra_budget = min(budget - n_bridges, k * (k - 1))
            placed = 0
            tries = 0
            while placed < intra_budget and tries < 30 * (intra_budget + 1):
                tries += 1
                u = rng.choice(pool)
                v = rng.choice(pool)
                if u != v and (u, v) not in candidate:
                    candidate.add((u, v))
                    placed += 1
        if candidate and _weakly_connected(node_ids, candidate):
            edge_idx = candidate
            break
    if edge_idx is None:
        raise GenerationFailed(
            f"no weakly connected graph after {max_retries} retries"
        )

    edges = {}
    for u, v in sorted(edge_idx):
        edges[(u, v)] = rng.uniform(*spec.ifv_distribution)
    graph = build_fault_graph(
        catalog,
        {f.id: f.independent_probability for f in faults},
        ImpactFactors(edges),
    )
    non_sinks = sorted(u for u in node_ids if graph.out_degree(u) > 0)
    trigger = rng.choice(non_sinks)
    return catalog, graph, trigger


@dataclass(frozen=True)
class GroundTruth:
    trigger: str
    occurrence_probabilities: Dict[str, float]
    vulnerable_faults: frozenset
    vulnerable_components: frozenset
    truth_cutoff: float
    mode: str  # "exact" or "mc"
    trials: int = 0


def _percolation_exact(graph: FaultGraph, trigger: str, reachable) -> Dict[str, float]:
    nodes = sorted(reachable)
    idx = {node: i for i, node in enumerate(nodes)}
    edge_list = sorted(
        (e, w) for e, w in graph.edges.items() if e[0] in reachable and e[1] in reachable
    )
    m = len(edge_list)
    probs = np.zeros(len(nodes))
    src = [idx[u] for (u, _), _ in edge_list]
    dst = [idx[v] for (_, v), _ in edge_list]
    p = [w for _, w in edge_list]
    t = idx[trigger]
    for mask in range(1 << m):
        weight = 1.0
        adj = [[] for _ in nodes]
        for e in range(m):
            if mask >> e & 1:
                weight *= p[e]
                adj[src[e]].append(dst[e])
            else:
                weight *= 1.0 - p[e]
        if weight == 0.0:
            continue
        seen = {t}
        stack = [t]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        for i in seen:
            probs[i] += weight
    return {node: float(probs[i]) for node, i in idx.items()}


def _percolation_mc(
    graph: FaultGraph, trigger: str, reachable, trials: int, seed: int
) -> Dict[str, float]:
    nodes = sorted(reachable)
    idx = {node: i for i, node in enumerate(nodes)}
    edge_list = sorted(
        (e, w) for e, w in graph.edges.items() if e[0] in reachable and e[1] in reachable
    )
    rng = np.random.default_rng(seed)
    m = len(edge_list)
    fired = rng.random((trials, m)) < np.array([w for _, w in edge_list])
    reached = np.zeros((trials, len(nodes)), dtype=bool)
    reached[:, idx[trigger]] = True
    src = np.array([idx[u] for (u, _), _ in edge_list], dtype=int)
    dst = np.array([idx[v] for (_, v), _ in edge_list], dtype=int)
    changed = True
    while changed:
        changed = False
        for e in range(m):
            add = reached[:, src[e]] & fired[:, e] & ~reached[:, dst[e]]
            if add.any():
                reached[:, dst[e]] |= add
                changed = True
    freq = reached.mean(axis=0)
    return {node: float(freq[i]) for node, i in idx.items()}


def ground_truth(
    graph: FaultGraph,
    trigger: str,
    truth_cutoff: float = 0.5,
    trials: int = 100_000,
    seed: int = 0,
    mode: str = "auto",
) -> GroundTruth:
    """Occurrence probabilities under independent-edge percolation from the
    trigger: each edge fires with probability equal to its impact factor and
    a fault occurs when reachable over fired edges.

    Small instances (<= 15 nodes and <= EXACT_EDGE_LIMIT relevant edges) are
    enumerated exactly; larger ones are sampled with ``trials`` Monte-Carlo
    draws. Unreachable faults have occurrence probability 0.
    """
    if trigger not in graph.node_weights:
        raise UnknownTrigger(f"trigger fault {trigger!r} not in graph")
    reachable = graph.reachable_from(trigger)
    n_edges = sum(1 for (u, v) in graph.edges if u in reachable and v in reachable)
    if mode == "auto":
        mode = (
            "exact"
            if len(graph.node_weights) <= 15 and n_edges <= EXACT_EDGE_LIMIT
            else "mc"
        )
    if mode == "exact":
        if n_edges > EXACT_EDGE_LIMIT:
            raise InvalidInput(
                f"exact percolation limited to {EXACT_EDGE_LIMIT} edges, got {n_edges}"
            )
        probs = _percolation_exact(graph, trigger, reachable)
        used_trials = 0
    elif mode == "mc":
        probs = _percolation_mc(graph, trigger, reachable, trials, seed)
        used_trials = trials
    else:
        raise InvalidInput(f"unknown ground-truth mode {mode!r}")
    occurrence = {node: probs.get(node, 0.0) for node in graph.node_weights}
    vulnerable = frozenset(
        node for node, prob in occurrence.items() if prob >= truth_cutoff
    )
    vulnerable_components = frozenset(
        graph.catalog.component_of(fid) for fid in vulnerable
    )
    return GroundTruth(
        trigger=trigger,
        occurrence_probabilities=occurrence,
        vulnerable_faults=vulnerable,
        vulnerable_components=vulnerable_components,
        truth_cutoff=truth_cutoff,
        mode=mode,
        trials=used_trials,
    )


@dataclass(frozen=True)
class SweepGrid:
    n_faults: Tuple[int, ...] = (85, 90, 95, 100, 105, 110)
    thresholds: Tuple[float, ...] = (0.6, 0.7, 0.8)
    measures: Tuple[str, ...] = MEASURES
    seeds: Tuple[int, ...] = tuple(range(30))

    def __post_init__(self):
        if not (self.n_faults and self.thresholds and self.measures and self.seeds):
            raise InvalidInput("sweep grid must be non-empty on every axis")


@dataclass(frozen=True)
class CellResult:
    measure: str
    threshold: float
    n_faults: int
    seed: int
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def accuracy(self) -> float:
        total = self.tp + self.fp + self.fn + self.tn
        return (self.tp + self.tn) / total

    def to_dict(self) -> dict:
        return {
            "measure": self.measure,
            "threshold": self.threshold,
            "n_faults": self.n_faults,
            "seed": self.seed,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
            "accuracy": self.accuracy,
        }


@dataclass(frozen=True)
class AccuracyReport:
    cells: Tuple[CellResult, ...]
    truth_cutoff: float
    gt_trials: int

    def mean_accuracy(self, measure: str, threshold: Optional[float] = None) -> float:
        vals = [
            c.accuracy
            for c in self.cells
            if c.measure == measure and (threshold is None or c.threshold == threshold)
        ]
        return float(np.mean(vals))

    def aggregates(self) -> list:
        out = []
        for measure in sorted({c.measure for c in self.cells}):
            for threshold in sorted({c.threshold for c in self.cells}):
                vals = [
                    c.accuracy
                    for c in self.cells
                    if c.measure == measure and c.threshold == threshold
                ]
                if vals:
                    out.append(
                        {
                            "measure": measure,
                            "threshold": threshold,
                            "mean_accuracy": float(np.mean(vals)),
                            "stddev_accuracy": float(np.std(vals)),
                            "cells": len(vals),
                        }
                    )
        return out

    def to_dict(self) -> dict:
        return {
            "truth_cutoff": self.truth_cutoff,
            "gt_trials": self.gt_trials,
            "cells": [c.to_dict() for c in self.cells],
            "aggregates": self.aggregates(),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kwargs)

    def to_csv(self) -> str:
        lines = ["measure,threshold,n_faults,seed,tp,fp,fn,tn,accuracy"]
        for c in self.cells:
            lines.append(
                f"{c.measure},{c.threshold!r},{c.n_faults},{c.seed},"
                f"{c.tp},{c.fp},{c.fn},{c.tn},{c.accuracy!r}"
            )
        return "\n".join(lines) + "\n"


def _confusion(predicted: set, truth: set, all_components) -> Tuple[int, int, int, int]:
    tp = len(predicted & truth)
    fp = len(predicted - truth)
    fn = len(truth - predicted)
    tn = len(set(all_components) - predicted - truth)
    return tp, fp, fn, tn


def _sweep_scenario(args):
    """All cells for one (n_faults, seed) scenario; runs propagation and each
    centrality once and reuses them across thresholds."""
    (n, seed, grid, spec, prop_config, cent_config, truth_cutoff, gt_trials) = args
    scenario_spec = replace(spec, n_faults=n, seed=_mix_seed("scenario", seed, n))
    catalog, graph, trigger = generate_scenario(scenario_spec)
    gt = ground_truth(
        graph,
        trigger,
        truth_cutoff=truth_cutoff,
        trials=gt_trials,
        seed=_mix_seed("mc", seed, n),
        mode="mc",
    )
    all_components = [c.id for c in catalog.components]
    result = propagate_weights(graph, trigger, prop_config)
    fp_graph = build_propagation_graph(result.graph, trigger)
    cells = []
    for measure in grid.measures:
        scores = rank(fp_graph, measure, beta=dict(fp_graph.node_weights), config=cent_config)
        for threshold in grid.thresholds:
            selected = select_vulnerable_faults(scores, threshold)
            predicted = {c.id for c in map_to_components(selected, catalog)}
            tp, fpos, fn, tn = _confusion(predicted, set(gt.vulnerable_components), all_components)
            cells.append(
                CellResult(
                    measure=measure,
                    threshold=threshold,
                    n_faults=n,
                    seed=seed,
                    tp=tp,
                    fp=fpos,
                    fn=fn,
                    tn=tn,
                )
            )
    return cells


def run_sweep(
    grid: SweepGrid = SweepGrid(),
    spec: ScenarioSpec = ScenarioSpec(),
    prop_config: PropagationConfig = PropagationConfig(),
    cent_config: CentralityConfig = CentralityConfig(),
    truth_cutoff: float = 0.5,
    gt_trials: int = 4000,
    parallel: bool = False,
    workers: int = 4,
) -> AccuracyReport:
    """Accuracy sweep over the grid. Every scenario is self-seeded from
    (seed, n_faults), so serial and parallel execution produce identical
    reports."""
    tasks = [
        (n, seed, grid, spec, prop_config, cent_config, truth_cutoff, gt_trials)
        for seed in grid.seeds
        for n in grid.n_faults
    ]
    if parallel:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_scenario = list(pool.map(_sweep_scenario, tasks))
    else:
        per_scenario = [_sweep_scenario(t) for t in tasks]
    cells = tuple(c for group in per_scenario for c in group)
    return AccuracyReport(cells=cells, truth_cutoff=truth_cutoff, gt_trials=gt_trials)


def false_positive_profile(report: AccuracyReport) -> Dict[str, float]:
    """Mean false-positive count per measure across all sweep cells."""
    if not report.cells:
        raise InvalidInput("empty report")
    out = {}
    for measure in sorted({c.measure for c in report.cells}):
        vals = [c.fp for c in report.cells if c.measure == measure]
        out[measure] = float(np.mean(vals))
    return out
