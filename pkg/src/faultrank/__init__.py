"""faultrank: centrality-based fault localization for distributed systems.

Models faults as a weighted directed graph, propagates occurrence
probabilities from a triggered fault, ranks candidates with closeness,
eigenvector, or alpha (Katz) centrality, and maps high-ranked faults back
to the components that raise them. Ships a simulation harness for accuracy
sweeps against a percolation ground truth.
"""

from .centrality import (
    CentralityConfig,
    CentralityScores,
    alpha_rank,
    closeness_rank,
    eigenvector_rank,
    rank,
    shortest_paths,
    spectral_radius,
)
from .errors import FaultRankError
from .localization import (
    LocalizationReport,
    localize,
    map_to_components,
    select_vulnerable_faults,
)
from .model import (
    Component,
    Fault,
    FaultCatalog,
    FaultGraph,
    FaultLogRecord,
    ImpactFactors,
    build_catalog,
    build_fault_graph,
    estimate_impact_factors,
    estimate_independent_probabilities,
)
from .propagation import (
    PropagationConfig,
    PropagationGraph,
    SignalSample,
    SignalThresholds,
    TriggerEvent,
    build_propagation_graph,
    detect_triggers,
    propagate_weights,
)
from .simulate import (
    AccuracyReport,
    GroundTruth,
    ScenarioSpec,
    SweepGrid,
    false_positive_profile,
    generate_scenario,
    ground_truth,
    run_sweep,
)

__version__ = "0.1.0"
