"""Trigger detection from golden signals and probability propagation over
the fault graph.

Propagation applies, per traversed edge (f1 -> f2):

    new edge weight = P(f1) * ifv(f1, f2) + Z
    new P(f2)       = P(f1) * ifv(f1, f2)

with Z = 0 on edges between different strongly connected components and
Z = cycle_epsilon inside an SCC, where the update is iterated to a fixed
point (bounded by max_iters). Propagation always starts from the graph's
base probabilities, so re-running with the same trigger is a no-op.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from .errors import EmptyGraph, UnknownComponent, UnknownFault, UnknownTrigger
from .model import FaultCatalog, FaultGraph

GOLDEN_SIGNALS = ("traffic", "latency", "saturation", "errors")


@dataclass(frozen=True)
class SignalSample:
    """One monitoring observation for a component; signal values are assumed
    pre-normalized to [0, 1]."""

    component: str
    traffic: float = 0.0
    latency: float = 0.0
    saturation: float = 0.0
    errors: float = 0.0
    observed_fault: Optional[str] = None

    def signal(self, name: str) -> float:
        return getattr(self, name)


@dataclass(frozen=True)
class SignalThresholds:
    traffic: float = 0.9
    latency: float = 0.9
    saturation: float = 0.9
    errors: float = 0.9

    def for_signal(self, name: str) -> float:
        return getattr(self, name)


@dataclass(frozen=True)
class TriggerEvent:
    fault: str
    crossed_signals: frozenset


@dataclass(frozen=True)
class UnattributedCrossing:
    """A threshold crossing with no fault recorded; diagnostic only."""

    component: str
    crossed_signals: frozenset


@dataclass(frozen=True)
class PropagationConfig:
    cycle_epsilon: float = 0.01
    tolerance: float = 1e-6
    max_iters: int = 100
    combine: str = "literal"  # or "noisy-or"


@dataclass(frozen=True)
class PropagationResult:
    graph: FaultGraph
    converged: bool
    iterations: int


def detect_triggers(samples, thresholds: SignalThresholds, catalog: FaultCatalog):
    """Return (triggers, unattributed crossings).

    A sample triggers when any signal strictly exceeds its threshold and the
    sample carries an observed fault; crossings without a fault are returned
    separately as diagnostics.
    """
    triggers = []
    unattributed = []
    for s in samples:
        if s.component not in catalog.component_by_id:
            raise UnknownComponent(f"sample references unknown component {s.component!r}")
        crossed = frozenset(
            sig for sig in GOLDEN_SIGNALS if s.signal(sig) > thresholds.for_signal(sig)
        )
        if not crossed:
            continue
        if s.observed_fault is None:
            unattributed.append(UnattributedCrossing(s.component, crossed))
            continue
        if s.observed_fault not in catalog.fault_by_id:
            raise UnknownFault(f"sample records unknown fault {s.observed_fault!r}")
        triggers.append(TriggerEvent(fault=s.observed_fault, crossed_signals=crossed))
    return triggers, unattributed


def _trigger_id(trigger) -> str:
    return trigger.fault if isinstance(trigger, TriggerEvent) else trigger


def _tarjan_sccs(nodes, succ):
    """Strongly connected components (iterative Tarjan), as a list of sets."""
    index = {}
    lowlink = {}
    on_stack = set()
    stack = []
    sccs = []
    counter = [0]

    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = lowlink[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = lowlink[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                elif w in on_stack:
                    lowlink[node] = min(lowlink[node], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
            if lowlink[node] == index[node]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == node:
                        break
                sccs.append(comp)
    return sccs


def propagate_weights(
    graph: FaultGraph,
    trigger: Union[TriggerEvent, str],
    config: PropagationConfig = PropagationConfig(),
) -> PropagationResult:
    """Push occurrence probabilities outward from the trigger.

    SCCs of the subgraph reachable from the trigger are processed in
    topological order of the condensation; edges inside an SCC iterate with
    the cycle constant until the max node-weight delta drops below
    ``tolerance`` (or ``max_iters`` is hit, flagged via ``converged=False``).
    Final weights are clamped to [0, 1] and the trigger node is pinned to
    1.0 (it has occurred).
    """
    t = _trigger_id(trigger)
    if t not in graph.node_weights:
        raise UnknownTrigger(f"trigger fault {t!r} not in graph")

    reachable = graph.reachable_from(t)
    working = dict(graph.base_probs)
    new_edges = dict(graph.edges)

    def succ_in(u):
        return [v for v in graph.successors(u) if v in reachable]

    sccs = _tarjan_sccs(sorted(reachable), succ_in)
    scc_of = {}
    for i, comp in enumerate(sccs):
        for n in comp:
            scc_of[n] = i

    # Kahn topological order over the condensation, ties by smallest member id.
    n_scc = len(sccs)
    scc_succ = [set() for _ in range(n_scc)]
    indeg = [0] * n_scc
    for u in reachable:
        for v in succ_in(u):
            a, b = scc_of[u], scc_of[v]
            if a != b and b not in scc_succ[a]:
                scc_succ[a].add(b)
                indeg[b] += 1
    key = [min(c) for c in sccs]
    heap = [(key[i], i) for i in range(n_scc) if indeg[i] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, i = heapq.heappop(heap)
        order.append(i)
        for j in sorted(scc_succ[i]):
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(heap, (key[j], j))

    def apply_node_update(v, influence):
        if v == t:
            return  # the trigger has occurred; in-edges cannot revise it
        if config.combine == "noisy-or":
            working[v] = 1.0 - (1.0 - graph.base_probs[v]) * (1.0 - influence)
        else:
            working[v] = influence

    converged = True
    iterations = 0
    for i in order:
        members = sorted(sccs[i])
        internal = [
            (u, v) for u in members for v in succ_in(u) if scc_of[v] == i
        ]
        if internal:
            for _ in range(config.max_iters):
                iterations += 1
                delta = 0.0
                for (u, v) in internal:
                    influence = working[u] * graph.base_ifv[(u, v)]
                    new_edges[(u, v)] = influence + config.cycle_epsilon
                    old = working[v]
                    apply_node_update(v, influence)
                    delta = max(delta, abs(working[v] - old))
                if delta < config.tolerance:
                    break
            else:
                converged = False
        # cross-SCC edges: single pass, Z = 0
        for u in members:
            for v in succ_in(u):
                if scc_of[v] == i:
                    continue
                influence = working[u] * graph.edges[(u, v)]
                new_edges[(u, v)] = influence
                apply_node_update(v, influence)

    clamp = lambda x: min(1.0, max(0.0, x))
    node_weights = dict(graph.node_weights)
    for n in reachable:
        node_weights[n] = clamp(working[n])
    node_weights[t] = 1.0
    new_edges = {e: clamp(w) for e, w in new_edges.items()}

    out = FaultGraph(
        graph.catalog,
        node_weights,
        new_edges,
        base_probs=graph.base_probs,
        base_ifv=graph.base_ifv,
    )
    return PropagationResult(graph=out, converged=converged, iterations=iterations)


class PropagationGraph:
    """Trigger-rooted induced subgraph of a fault graph; the root carries
    weight 1.0."""

    def __init__(self, root: str, node_weights: dict, edges: dict, catalog: FaultCatalog):
        self.root = root
        self.node_weights = dict(node_weights)
        self.edges = dict(edges)
        self.catalog = catalog
        from collections import defaultdict

        self._succ = defaultdict(list)
        self._pred = defaultdict(list)
        for (u, v) in self.edges:
            self._succ[u].append(v)
            self._pred[v].append(u)
        for u in self._succ:
            self._succ[u].sort()
        for v in self._pred:
            self._pred[v].sort()

    @property
    def nodes(self):
        return self.node_weights.keys()

    def successors(self, u):
        return self._succ.get(u, [])

    def predecessors(self, v):
        return self._pred.get(v, [])

    def out_degree(self, u):
        return len(self._succ.get(u, []))

    def __repr__(self):
        return (
            f"PropagationGraph(root={self.root!r}, {len(self.node_weights)} nodes, "
            f"{len(self.edges)} edges)"
        )


def build_propagation_graph(
    graph: FaultGraph, trigger: Union[TriggerEvent, str]
) -> PropagationGraph:
    """Induced subgraph on the set forward-reachable from the trigger.

    Node weights are the graph's (typically post-propagation) occurrence
    probabilities with the root pinned to 1.0; edge weights are the impact
    factors, which is what the centrality measures take as the degree of
    influence between faults.
    """
    t = _trigger_id(trigger)
    if t not in graph.node_weights:
        raise UnknownTrigger(f"trigger fault {t!r} not in graph")
    reachable = graph.reachable_from(t)
    nodes = {n: graph.node_weights[n] for n in reachable}
    nodes[t] = 1.0
    edges = {
        (u, v): graph.base_ifv[(u, v)]
        for (u, v) in graph.edges
        if u in reachable and v in reachable
    }
    return PropagationGraph(root=t, node_weights=nodes, edges=edges, catalog=graph.catalog)
