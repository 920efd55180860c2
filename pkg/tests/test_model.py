"""Tests for the domain model, log estimators, and fault-graph assembly."""
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from faultrank.errors import (
    DanglingComponentRef,
    DanglingEdge,
    DuplicateId,
    EmptyCatalog,
    InvalidInput,
    MissingProbability,
    UnknownFault,
)
from faultrank.model import (
    Component,
    Fault,
    FaultLogRecord,
    ImpactFactors,
    build_catalog,
    build_fault_graph,
    catalog_from_dict,
    catalog_to_dict,
    estimate_impact_factors,
    estimate_independent_probabilities,
    graph_from_dict,
    graph_to_dict,
)


def make_catalog(n_components=2, faults_per=2):
    comps = [Component(id=f"C{k}", name=f"comp {k}") for k in range(1, n_components + 1)]
    faults = [
        Fault(id=f"f{k}{i}", component=f"C{k}", independent_probability=0.1)
        for k in range(1, n_components + 1)
        for i in range(1, faults_per + 1)
    ]
    return build_catalog(comps, faults)


class TestBuildCatalog:
    def test_single_component_single_fault(self):
        cat = build_catalog(
            [Component(id="C1", name="vm", kind="VM")],
            [Fault(id="f11", component="C1", independent_probability=0.179)],
        )
        assert len(cat.components) == 1
        assert len(cat.faults) == 1
        assert cat.fault_by_id["f11"].independent_probability == 0.179
        assert cat.component_of("f11") == "C1"

    def test_empty_inputs_rejected(self):
        with pytest.raises(EmptyCatalog):
            build_catalog([], [])

    def test_fault_on_unknown_component_rejected(self):
        with pytest.raises(DanglingComponentRef):
            build_catalog(
                [Component(id="C1", name="c1")],
                [Fault(id="f", component="C9")],
            )

    def test_duplicate_fault_id_rejected(self):
        with pytest.raises(DuplicateId):
            build_catalog(
                [Component(id="C1", name="c1")],
                [Fault(id="f", component="C1"), Fault(id="f", component="C1")],
            )

    def test_duplicate_component_id_rejected(self):
        with pytest.raises(DuplicateId):
            build_catalog(
                [Component(id="C1", name="a"), Component(id="C1", name="b")],
                [Fault(id="f", component="C1")],
            )

    def test_probability_out_of_range_rejected(self):
        with pytest.raises(InvalidInput):
            build_catalog(
                [Component(id="C1", name="c1")],
                [Fault(id="f", component="C1", independent_probability=1.5)],
            )

    def test_one_to_many_component_fault_mapping(self):
        cat = make_catalog(n_components=2, faults_per=3)
        assert set(cat.faults_of["C1"]) == {"f11", "f12", "f13"}
        assert set(cat.faults_of["C2"]) == {"f21", "f22", "f23"}


class TestEstimateIndependentProbabilities:
    def test_fraction_of_incidents(self):
        # f11 appears in 3 of 10 incidents (counted by hand below)
        cat = make_catalog()
        log = []
        for i in range(10):
            log.append(FaultLogRecord(timestamp=i * 10, incident=f"inc{i}", fault="f21"))
        for i in (0, 4, 7):
            log.append(FaultLogRecord(timestamp=i * 10 + 1, incident=f"inc{i}", fault="f11"))
        probs = estimate_independent_probabilities(log, cat)
        assert probs["f11"] == pytest.approx(0.3)
        assert probs["f21"] == pytest.approx(1.0)

    def test_empty_log_gives_uniform_default(self):
        cat = make_catalog(n_components=2, faults_per=2)  # 4 faults
        probs = estimate_independent_probabilities([], cat)
        assert probs == {fid: 0.25 for fid in cat.fault_by_id}

    def test_unseen_fault_gets_uniform_default(self):
        cat = make_catalog(n_components=2, faults_per=2)
        log = [FaultLogRecord(timestamp=0, incident="a", fault="f11")]
        probs = estimate_independent_probabilities(log, cat)
        assert probs["f11"] == 1.0
        assert probs["f22"] == 0.25

    def test_duplicate_records_in_one_incident_count_once(self):
        cat = make_catalog()
        log = [
            FaultLogRecord(timestamp=0, incident="a", fault="f11"),
            FaultLogRecord(timestamp=5, incident="a", fault="f11"),
            FaultLogRecord(timestamp=0, incident="b", fault="f21"),
        ]
        probs = estimate_independent_probabilities(log, cat)
        assert probs["f11"] == pytest.approx(0.5)

    def test_unknown_fault_rejected(self):
        cat = make_catalog()
        with pytest.raises(UnknownFault):
            estimate_independent_probabilities(
                [FaultLogRecord(timestamp=0, incident="a", fault="nope")], cat
            )

    @given(st.permutations(list(range(12))))
    @settings(max_examples=30, deadline=None)
    def test_record_order_does_not_matter(self, perm):
        cat = make_catalog()
        base = [
            FaultLogRecord(timestamp=t, incident=f"inc{t % 4}", fault=fid)
            for t, fid in enumerate(["f11", "f12", "f21", "f22"] * 3)
        ]
        reference = estimate_independent_probabilities(base, cat)
        shuffled = [base[i] for i in perm]
        assert estimate_independent_probabilities(shuffled, cat) == reference


class TestEstimateImpactFactors:
    def test_sole_successor_normalizes_to_one(self):
        # a precedes b in 4 of 8 incidents containing a: raw 0.5, then the
        # row max (also 0.5) normalizes it to 1.0
        cat = make_catalog()
        log = []
        for i in range(8):
            log.append(FaultLogRecord(timestamp=0, incident=f"inc{i}", fault="f11"))
        for i in range(4):
            log.append(FaultLogRecord(timestamp=1, incident=f"inc{i}", fault="f12"))
        ifv = estimate_impact_factors(log, cat)
        assert ifv[("f11", "f12")] == pytest.approx(1.0)

    def test_never_cooccurring_pair_has_no_edge(self):
        cat = make_catalog()
        log = [
            FaultLogRecord(timestamp=0, incident="a", fault="f11"),
            FaultLogRecord(timestamp=0, incident="b", fault="f22"),
        ]
        ifv = estimate_impact_factors(log, cat)
        assert ("f11", "f22") not in ifv
        assert len(ifv) == 0

    def test_row_normalization_preserves_ratios(self):
        # from a: b follows in 2 of 4 incidents (raw 0.5), c in 1 of 4
        # (raw 0.25) -> normalized 1.0 and 0.5
        cat = make_catalog(n_components=1, faults_per=3)
        a, b, c = "f11", "f12", "f13"
        log = []
        for i in range(4):
            log.append(FaultLogRecord(timestamp=0, incident=f"inc{i}", fault=a))
        for i in range(2):
            log.append(FaultLogRecord(timestamp=1, incident=f"inc{i}", fault=b))
        log.append(FaultLogRecord(timestamp=2, incident="inc3", fault=c))
        ifv = estimate_impact_factors(log, cat)
        assert ifv[(a, b)] == pytest.approx(1.0)
        assert ifv[(a, c)] == pytest.approx(0.5)

    def test_direction_follows_timestamps(self):
        cat = make_catalog()
        log = [
            FaultLogRecord(timestamp=0, incident="a", fault="f11"),
            FaultLogRecord(timestamp=1, incident="a", fault="f21"),
        ]
        ifv = estimate_impact_factors(log, cat)
        assert ("f11", "f21") in ifv
        assert ("f21", "f11") not in ifv

    def test_simultaneous_records_create_no_edge(self):
        cat = make_catalog()
        log = [
            FaultLogRecord(timestamp=5, incident="a", fault="f11"),
            FaultLogRecord(timestamp=5, incident="a", fault="f21"),
        ]
        assert len(estimate_impact_factors(log, cat)) == 0

    def test_no_self_loops(self):
        cat = make_catalog()
        log = [
            FaultLogRecord(timestamp=0, incident="a", fault="f11"),
            FaultLogRecord(timestamp=1, incident="a", fault="f11"),
        ]
        ifv = estimate_impact_factors(log, cat)
        assert ("f11", "f11") not in ifv

    @given(st.data())
    @settings(max_examples=40, deadline=None)
    def test_row_max_is_one_and_values_in_unit_interval(self, data):
        cat = make_catalog(n_components=2, faults_per=2)
        fids = sorted(cat.fault_by_id)
        n_records = data.draw(st.integers(min_value=2, max_value=25))
        log = [
            FaultLogRecord(
                timestamp=data.draw(st.integers(0, 50)),
                incident=f"inc{data.draw(st.integers(0, 5))}",
                fault=data.draw(st.sampled_from(fids)),
            )
            for _ in range(n_records)
        ]
        ifv = estimate_impact_factors(log, cat)
        rows = {}
        for (src, _), v in ifv.items():
            assert 0.0 < v <= 1.0
            rows[src] = max(rows.get(src, 0.0), v)
        for top in rows.values():
            assert top == pytest.approx(1.0)


class TestBuildFaultGraph:
    def test_two_node_one_edge_graph(self):
        cat = build_catalog(
            [Component(id="C1", name="c1"), Component(id="C2", name="c2")],
            [
                Fault(id="f1i", component="C1", independent_probability=0.179),
                Fault(id="f2j", component="C2", independent_probability=0.232),
            ],
        )
        g = build_fault_graph(
            cat,
            {"f1i": 0.179, "f2j": 0.232},
            ImpactFactors({("f2j", "f1i"): 0.34}),
        )
        assert g.node_weights == {"f1i": 0.179, "f2j": 0.232}
        assert g.edges == {("f2j", "f1i"): 0.34}

    def test_empty_ifv_gives_edgeless_graph(self):
        cat = make_catalog()
        g = build_fault_graph(cat, {fid: 0.1 for fid in cat.fault_by_id}, ImpactFactors({}))
        assert len(g.edges) == 0
        assert set(g.nodes) == set(cat.fault_by_id)

    def test_edge_to_unknown_fault_rejected(self):
        cat = make_catalog()
        with pytest.raises(DanglingEdge):
            build_fault_graph(
                cat,
                {fid: 0.1 for fid in cat.fault_by_id},
                ImpactFactors({("f11", "ghost"): 0.5}),
            )

    def test_missing_probability_rejected(self):
        cat = make_catalog()
        with pytest.raises(MissingProbability):
            build_fault_graph(cat, {"f11": 0.1}, ImpactFactors({}))

    def test_deterministic_construction(self):
        cat = make_catalog()
        probs = {fid: 0.2 for fid in cat.fault_by_id}
        ifv = ImpactFactors({("f11", "f21"): 0.5, ("f21", "f22"): 0.25})
        g1 = build_fault_graph(cat, probs, ifv)
        g2 = build_fault_graph(cat, probs, ifv)
        assert g1.node_weights == g2.node_weights
        assert g1.edges == g2.edges

    def test_impact_factors_reject_self_loop_and_range(self):
        with pytest.raises(InvalidInput):
            ImpactFactors({("a", "a"): 0.5})
        with pytest.raises(InvalidInput):
            ImpactFactors({("a", "b"): 1.5})

    def test_reachable_from(self):
        cat = make_catalog(n_components=1, faults_per=5)
        fids = sorted(cat.fault_by_id)  # f11..f15
        edges = {(fids[0], fids[1]): 0.5, (fids[1], fids[2]): 0.5, (fids[3], fids[4]): 0.5}
        g = build_fault_graph(cat, {f: 0.1 for f in fids}, ImpactFactors(edges))
        assert g.reachable_from(fids[0]) == {fids[0], fids[1], fids[2]}


class TestSerialization:
    def test_catalog_round_trip(self):
        cat = make_catalog()
        again = catalog_from_dict(catalog_to_dict(cat))
        assert catalog_to_dict(again) == catalog_to_dict(cat)

    def test_graph_round_trip(self):
        cat = make_catalog()
        g = build_fault_graph(
            cat,
            {fid: 0.25 for fid in cat.fault_by_id},
            ImpactFactors({("f11", "f21"): 0.75}),
        )
        again = graph_from_dict(json.loads(json.dumps(graph_to_dict(g))))
        assert again.node_weights == g.node_weights
        assert again.edges == g.edges

    def test_graph_dict_carries_optional_trigger(self):
        cat = make_catalog()
        g = build_fault_graph(cat, {fid: 0.25 for fid in cat.fault_by_id}, ImpactFactors({}))
        assert "trigger" not in graph_to_dict(g)
        assert graph_to_dict(g, trigger="f11")["trigger"] == "f11"
