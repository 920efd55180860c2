"""End-to-end fault localization: propagate from a trigger, rank with a
centrality measure, threshold the max-normalized scores, and map the
selected faults back to the components that raise them."""
from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from typing import List, Tuple, Union

from .centrality import CentralityConfig, CentralityScores, rank
from .errors import InvalidInput, UnknownFault
from .model import FaultCatalog, FaultGraph
from .propagation import (
    PropagationConfig,
    TriggerEvent,
    build_propagation_graph,
    propagate_weights,
)


@dataclass(frozen=True)
class SelectedFault:
    id: str
    score: float
    norm: float


@dataclass(frozen=True)
class ImplicatedComponent:
    id: str
    score: float  # best normalized score among the component's selected faults


@dataclass(frozen=True)
class LocalizationReport:
    trigger: str
    measure: str
    threshold: float
    faults: List[SelectedFault]
    components: List[ImplicatedComponent]
    config: dict

    def to_dict(self) -> dict:
        return {
            "trigger": self.trigger,
            "measure": self.measure,
            "threshold": self.threshold,
            "faults": [asdict(f) for f in self.faults],
            "components": [asdict(c) for c in self.components],
            "config": self.config,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "LocalizationReport":
        return cls(
            trigger=data["trigger"],
            measure=data["measure"],
            threshold=data["threshold"],
            faults=[SelectedFault(**f) for f in data["faults"]],
            components=[ImplicatedComponent(**c) for c in data["components"]],
            config=data["config"],
        )

    @classmethod
    def from_json(cls, text: str) -> "LocalizationReport":
        return cls.from_dict(json.loads(text))


def select_vulnerable_faults(
    scores: CentralityScores, threshold: float
) -> List[SelectedFault]:
    """Max-normalize the scores and keep faults at or above the threshold.

    A zero max leaves every normalized score at 0, so nothing is selected
    unless the threshold itself is 0 (then everything is). Result is sorted
    descending by score, ties by ascending fault id.
    """
    if not 0.0 <= threshold <= 1.0:
        raise InvalidInput(f"threshold {threshold} outside [0,1]")
    if not scores.scores:
        raise InvalidInput("empty score map")
    top = max(scores.scores.values())
    selected = []
    for fid, s in scores.scores.items():
        norm = s / top if top > 0 else 0.0
        if norm >= threshold:
            selected.append(SelectedFault(id=fid, score=s, norm=norm))
    selected.sort(key=lambda f: (-f.norm, f.id))
    return selected


def map_to_components(
    faults: List[SelectedFault], catalog: FaultCatalog
) -> List[ImplicatedComponent]:
    """Distinct components of the selected faults, scored by the best
    normalized score among each component's selected faults."""
    best = {}
    for f in faults:
        cid = catalog.component_of(f.id)
        if cid not in best or f.norm > best[cid]:
            best[cid] = f.norm
    out = [ImplicatedComponent(id=cid, score=s) for cid, s in best.items()]
    out.sort(key=lambda c: (-c.score, c.id))
    return out


def localize(
    graph: FaultGraph,
    trigger: Union[TriggerEvent, str],
    measure: str,
    threshold: float,
    prop_config: PropagationConfig = PropagationConfig(),
    cent_config: CentralityConfig = CentralityConfig(),
) -> LocalizationReport:
    """Run the full pipeline for one trigger and one measure."""
    result = propagate_weights(graph, trigger, prop_config)
    fp = build_propagation_graph(result.graph, trigger)
    scores = rank(fp, measure, beta=dict(fp.node_weights), config=cent_config)
    selected = select_vulnerable_faults(scores, threshold)
    components = map_to_components(selected, graph.catalog)
    trigger_id = trigger.fault if isinstance(trigger, TriggerEvent) else trigger
    config = {
        "propagation": {
            "cycle_epsilon": prop_config.cycle_epsilon,
            "tolerance": prop_config.tolerance,
            "max_iters": prop_config.max_iters,
            "combine": prop_config.combine,
            "converged": result.converged,
        },
        "centrality": {
            "alpha_fraction": cent_config.alpha_fraction,
            "tolerance": cent_config.tolerance,
            "max_iters": cent_config.max_iters,
            "katz_mode": cent_config.katz_mode,
            "converged": scores.converged,
        },
    }
    return LocalizationReport(
        trigger=trigger_id,
        measure=measure,
        threshold=threshold,
        faults=selected,
        components=components,
        config=config,
    )
