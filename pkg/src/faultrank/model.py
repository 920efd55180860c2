"""Component/fault domain model, log-based estimators, and fault-graph
construction.

A fault graph is a directed graph whose nodes are faults (weighted by their
occurrence probability) and whose edges carry impact factors: how strongly
the occurrence of the source fault pushes the target fault into occurring.
"""
from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Union

from .errors import (
    DanglingComponentRef,
    DanglingEdge,
    DuplicateId,
    EmptyCatalog,
    InvalidInput,
    MissingProbability,
    UnknownFault,
    UnknownNode,
)

KNOWN_KINDS = ("VM", "Proxy", "Runtime", "Database", "Network", "Storage")


@dataclass(frozen=True)
class Component:
    """A cloud module that can raise faults (VM, proxy, runtime, ...)."""

    id: str
    name: str
    kind: str = "Other"


@dataclass(frozen=True)
class Fault:
    """A single fault, owned by exactly one component.

    ``independent_probability`` is the chance of the fault arising on its
    own, without being triggered by any other fault.
    """

    id: str
    component: str
    independent_probability: float = 0.0


@dataclass(frozen=True)
class FaultLogRecord:
    """One observed fault occurrence. Records sharing an ``incident`` id are
    treated as co-occurring; ``timestamp`` orders records within an incident."""

    timestamp: Union[int, str]
    incident: str
    fault: str


class FaultCatalog:
    """Validated, immutable set of components and their faults."""

    def __init__(self, components: Iterable[Component], faults: Iterable[Fault]):
        self.components = tuple(components)
        self.faults = tuple(faults)
        self.component_by_id = {c.id: c for c in self.components}
        self.fault_by_id = {f.id: f for f in self.faults}
        self.faults_of = defaultdict(tuple)
        grouped = defaultdict(list)
        for f in self.faults:
            grouped[f.component].append(f.id)
        self.faults_of = {cid: tuple(fids) for cid, fids in grouped.items()}

    def component_of(self, fault_id: str) -> str:
        if fault_id not in self.fault_by_id:
            raise UnknownFault(f"fault {fault_id!r} not in catalog")
        return self.fault_by_id[fault_id].component

    def __repr__(self):
        return f"FaultCatalog({len(self.components)} components, {len(self.faults)} faults)"


def build_catalog(components: Iterable[Component], faults: Iterable[Fault]) -> FaultCatalog:
    """Validate and freeze a catalog.

    Raises EmptyCatalog when there are no faults, DuplicateId on repeated
    component or fault ids, DanglingComponentRef when a fault names an
    unknown component.
    """
    components = list(components)
    faults = list(faults)
    if not faults:
        raise EmptyCatalog("catalog must contain at least one fault")
    seen_c = set()
    for c in components:
        if not c.id:
            raise InvalidInput("component id must be non-empty")
        if c.id in seen_c:
            raise DuplicateId(f"duplicate component id {c.id!r}")
        seen_c.add(c.id)
    seen_f = set()
    for f in faults:
        if not f.id:
            raise InvalidInput("fault id must be non-empty")
        if f.id in seen_f:
            raise DuplicateId(f"duplicate fault id {f.id!r}")
        seen_f.add(f.id)
        if f.component not in seen_c:
            raise DanglingComponentRef(
                f"fault {f.id!r} references unknown component {f.component!r}"
            )
        if not 0.0 <= f.independent_probability <= 1.0:
            raise InvalidInput(
                f"fault {f.id!r} probability {f.independent_probability} outside [0,1]"
            )
    return FaultCatalog(components, faults)


def estimate_independent_probabilities(
    log: Iterable[FaultLogRecord], catalog: FaultCatalog
) -> dict:
    """Per-fault occurrence probability: fraction of incidents the fault
    appears in. Faults never observed (and the empty-log case) fall back to
    the uniform default 1/|faults|."""
    incidents = defaultdict(set)
    for rec in log:
        if rec.fault not in catalog.fault_by_id:
            raise UnknownFault(f"log references unknown fault {rec.fault!r}")
        incidents[rec.incident].add(rec.fault)
    n_incidents = len(incidents)
    default = 1.0 / len(catalog.faults)
    if n_incidents == 0:
        return {f.id: default for f in catalog.faults}
    counts = defaultdict(int)
    for members in incidents.values():
        for fid in members:
            counts[fid] += 1
    return {
        f.id: (counts[f.id] / n_incidents if f.id in counts else default)
        for f in catalog.faults
    }


class ImpactFactors:
    """Directed (source, target) -> impact factor map, values in [0, 1],
    no self-loops."""

    def __init__(self, values: Mapping[tuple, float]):
        for (src, tgt), v in values.items():
            if src == tgt:
                raise InvalidInput(f"self-loop impact factor on {src!r}")
            if not 0.0 <= v <= 1.0:
                raise InvalidInput(f"impact factor {src!r}->{tgt!r} = {v} outside [0,1]")
        self.values = dict(values)

    def items(self):
        return self.values.items()

    def get(self, src, tgt, default=None):
        return self.values.get((src, tgt), default)

    def __len__(self):
        return len(self.values)

    def __contains__(self, pair):
        return pair in self.values

    def __getitem__(self, pair):
        return self.values[pair]


def estimate_impact_factors(
    log: Iterable[FaultLogRecord], catalog: FaultCatalog
) -> ImpactFactors:
    """Estimate edge impact factors from ordered co-occurrence.

    raw(a->b) = #incidents where a occurs strictly before b, divided by
    #incidents containing a. Each source row is then normalized by its max so
    the strongest influence per source is 1.0. Zero raw count means no edge;
    self-pairs are dropped.
    """
    first_seen = defaultdict(dict)  # incident -> fault -> earliest timestamp
    for rec in log:
        if rec.fault not in catalog.fault_by_id:
            raise UnknownFault(f"log references unknown fault {rec.fault!r}")
        inc = first_seen[rec.incident]
        if rec.fault not in inc or rec.timestamp < inc[rec.fault]:
            inc[rec.fault] = rec.timestamp
    incidents_with = defaultdict(int)
    ordered_pair = defaultdict(int)
    for inc in first_seen.values():
        for fid in inc:
            incidents_with[fid] += 1
        for a, ta in inc.items():
            for b, tb in inc.items():
                if a != b and ta < tb:
                    ordered_pair[(a, b)] += 1
    raw = {
        pair: cnt / incidents_with[pair[0]] for pair, cnt in ordered_pair.items()
    }
    row_max = defaultdict(float)
    for (a, _), v in raw.items():
        row_max[a] = max(row_max[a], v)
    return ImpactFactors(
        {pair: v / row_max[pair[0]] for pair, v in raw.items()}
    )


class FaultGraph:
    """Immutable directed fault graph.

    ``node_weights`` are current occurrence probabilities; ``base_probs``
    keeps the initial (pre-propagation) probabilities so that weight
    propagation is a pure, repeatable function of the original inputs.
    """

    def __init__(
        self,
        catalog: FaultCatalog,
        node_weights: Mapping[str, float],
        edges: Mapping[tuple, float],
        base_probs: Optional[Mapping[str, float]] = None,
        base_ifv: Optional[Mapping[tuple, float]] = None,
    ):
        self.catalog = catalog
        self.node_weights = dict(node_weights)
        self.edges = dict(edges)
        self.base_probs = dict(base_probs) if base_probs is not None else dict(node_weights)
        # original impact factors; edge weights diverge from these after
        # propagation but the influence structure itself does not change
        self.base_ifv = dict(base_ifv) if base_ifv is not None else dict(edges)
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

    def reachable_from(self, source: str) -> set:
        """Forward-reachable node set, including the source."""
        if source not in self.node_weights:
            raise UnknownNode(f"node {source!r} not in graph")
        seen = {source}
        stack = [source]
        while stack:
            u = stack.pop()
            for v in self._succ.get(u, []):
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return seen

    def __repr__(self):
        return f"FaultGraph({len(self.node_weights)} nodes, {len(self.edges)} edges)"


def build_fault_graph(
    catalog: FaultCatalog,
    probs: Mapping[str, float],
    ifv: ImpactFactors,
) -> FaultGraph:
    """Assemble the fault graph: node weights from ``probs``, edge weights
    from ``ifv``. Every catalog fault must have a probability; every edge
    endpoint must be a catalog fault."""
    for f in catalog.faults:
        if f.id not in probs:
            raise MissingProbability(f"no probability for fault {f.id!r}")
    for (src, tgt) in ifv.values:
        if src not in catalog.fault_by_id or tgt not in catalog.fault_by_id:
            raise DanglingEdge(f"edge {src!r}->{tgt!r} references unknown fault")
    weights = {f.id: float(probs[f.id]) for f in catalog.faults}
    return FaultGraph(catalog, weights, dict(ifv.values))


# ---------------------------------------------------------------------------
# File formats


def catalog_from_dict(data: dict) -> FaultCatalog:
    try:
        components = [
            Component(id=c["id"], name=c.get("name", c["id"]), kind=c.get("kind", "Other"))
            for c in data.get("components", [])
        ]
        faults = [
            Fault(
                id=f["id"],
                component=f["component"],
                independent_probability=float(f.get("p", 0.0)),
            )
            for f in data.get("faults", [])
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed catalog: {exc}")
    return build_catalog(components, faults)


def catalog_to_dict(catalog: FaultCatalog) -> dict:
    return {
        "components": [
            {"id": c.id, "name": c.name, "kind": c.kind} for c in catalog.components
        ],
        "faults": [
            {"id": f.id, "component": f.component, "p": f.independent_probability}
            for f in catalog.faults
        ],
    }


def load_catalog(path) -> FaultCatalog:
    with open(path) as fh:
        return catalog_from_dict(json.load(fh))


def load_fault_log(path) -> list:
    """CSV with header ``timestamp,incident,fault``."""
    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            ts = row["timestamp"]
            try:
                ts = int(ts)
            except ValueError:
                pass  # ISO-8601 strings order lexicographically
            records.append(FaultLogRecord(timestamp=ts, incident=row["incident"], fault=row["fault"]))
    return records


def load_impact_factors(path) -> ImpactFactors:
    """CSV with header ``source,target,ifv``."""
    values = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            values[(row["source"], row["target"])] = float(row["ifv"])
    return ImpactFactors(values)


def graph_to_dict(graph: FaultGraph, trigger: Optional[str] = None) -> dict:
    out = {
        "catalog": catalog_to_dict(graph.catalog),
        "nodes": {fid: graph.node_weights[fid] for fid in sorted(graph.node_weights)},
        "edges": [
            {"source": u, "target": v, "weight": graph.edges[(u, v)]}
            for (u, v) in sorted(graph.edges)
        ],
    }
    if trigger is not None:
        out["trigger"] = trigger
    return out


def graph_from_dict(data: dict) -> FaultGraph:
    catalog = catalog_from_dict(data["catalog"])
    probs = {fid: float(w) for fid, w in data["nodes"].items()}
    ifv = ImpactFactors(
        {(e["source"], e["target"]): float(e["weight"]) for e in data["edges"]}
    )
    return build_fault_graph(catalog, probs, ifv)


def load_graph(path) -> FaultGraph:
    with open(path) as fh:
        return graph_from_dict(json.load(fh))
