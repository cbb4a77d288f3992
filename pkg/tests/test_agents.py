"""Agent states, the anomaly indicator, and the monitoring pipeline."""

import random

import pytest

from innoscore.agents import (
    AnomalyRecord,
    Thresholds,
    indicator,
    measure_batch,
    monitor_scores,
    run_agents,
)
from innoscore.errors import EmptyBatch, EmptyGroup
from innoscore.evidence import SourceProfile, combine_dempster, default_labels, make_frame
from innoscore.metrics import (
    Indicator,
    MeasurementBatch,
    QueryMeasurement,
    contributions_to_mass,
    score_object,
)
from innoscore.pattern import Query, SearchPattern, Term, TermClass
from innoscore.sources import (
    SyntheticObject,
    SyntheticSpec,
    build_index,
    synthetic_source,
)


def score_from(hits, freqs, r0=100, f0=50.0):
    qs = tuple(
        QueryMeasurement(f"q{i}", r, f) for i, (r, f) in enumerate(zip(hits, freqs))
    )
    return score_object(MeasurementBatch("s", 2010, qs, r0, f0))


class TestIndicator:
    def test_nov_crossing(self):
        score = score_from([0, 0, 5], [25.0, 25.0, 25.0])
        assert score.nov > 0.7
        assert indicator(score, Thresholds(nov_star=0.7, rel_star=0.99)) == 0

    def test_below_both(self):
        score = score_from([60], [20.0])
        assert score.nov < 0.7 and score.rel < 0.7
        assert indicator(score, Thresholds()) == 1

    def test_exact_threshold_not_a_crossing(self):
        score = score_from([100], [50.0])  # nov == 0.0, rel == 1.0
        th = Thresholds(nov_star=0.0, rel_star=1.0)
        assert score.nov == th.nov_star and score.rel == th.rel_star
        assert indicator(score, th) == 1

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            Thresholds(nov_star=1.2)


def quiet_score():
    # nov ~ 0.66, rel ~ 0.48: below default thresholds; contributions
    # spread over intervals {2}, {3}, {4} so fusion never fully conflicts
    return score_from([50, 30, 0], [18.0, 18.0, 18.0])


def loud_score():
    # nov = 1.0: crosses the default 0.7; evidence concentrated on {4}
    return score_from([0, 0], [10.0, 10.0])


class TestMonitorScores:
    def frame(self):
        return make_frame(4, default_labels(4))

    def test_quiet_run_has_empty_registry(self):
        report = monitor_scores(
            [(SourceProfile("a"), quiet_score()), (SourceProfile("b"), quiet_score())],
            self.frame(),
            Thresholds(),
            period=2010,
        )
        assert report.anomalies == ()
        assert all(agent.F == 1 for agent in report.agents)

    def test_loud_source_registered(self):
        report = monitor_scores(
            [(SourceProfile("a"), quiet_score()), (SourceProfile("b"), loud_score())],
            self.frame(),
            Thresholds(),
            period=2010,
        )
        assert [a.F for a in report.agents] == [1, 0]
        assert report.anomalies == (
            AnomalyRecord("b", "nov", 1.0, 0.7, 2010),
        )

    def test_biconditional(self):
        rng = random.Random(99)
        frame = self.frame()
        for _ in range(300):
            entries = []
            for i in range(rng.randint(1, 4)):
                hits = [rng.randint(0, 100) for _ in range(rng.randint(1, 6))]
                # a baseline-level query keeps every mass overlapping on {1}
                hits.append(100)
                freqs = [rng.uniform(0.0, 60.0) for _ in range(len(hits))]
                entries.append((SourceProfile(f"s{i}"), score_from(hits, freqs)))
            th = Thresholds(rng.uniform(0.2, 0.95), rng.uniform(0.2, 0.95))
            report = monitor_scores(entries, frame, th, period=2010)
            assert bool(report.anomalies) == any(a.F == 0 for a in report.agents)

    def test_single_source_mass_passes_through(self):
        frame = self.frame()
        score = quiet_score()
        report = monitor_scores(
            [(SourceProfile("a"), score)], frame, Thresholds(), period=2010
        )
        expected = contributions_to_mass(score.per_query_nov, frame)
        assert report.combined_mass == expected
        assert report.conflict_per_step == ()

    def test_two_identical_sources_self_combine(self):
        frame = self.frame()
        score = quiet_score()
        own = contributions_to_mass(score.per_query_nov, frame)
        report = monitor_scores(
            [(SourceProfile("a"), score), (SourceProfile("b"), score)],
            frame,
            Thresholds(),
            period=2010,
        )
        assert report.combined_mass == combine_dempster(own, own)

    def test_rel_evidence_stream(self):
        frame = self.frame()
        score = quiet_score()
        report = monitor_scores(
            [(SourceProfile("a"), score)],
            frame,
            Thresholds(),
            period=2010,
            kind=Indicator.REL,
        )
        assert report.combined_mass == contributions_to_mass(score.per_query_rel, frame)

    def test_source_order_does_not_change_registry_or_summary(self):
        frame = self.frame()
        entries = [
            (SourceProfile("a"), quiet_score()),
            (SourceProfile("b"), loud_score()),
            (SourceProfile("c"), score_from([25, 10], [30.0, 5.0])),
        ]
        fwd = monitor_scores(entries, frame, Thresholds(), period=2010)
        rev = monitor_scores(entries[::-1], frame, Thresholds(), period=2010)
        assert fwd.anomalies == rev.anomalies
        for (b1, p1), (b2, p2) in zip(
            fwd.combined_summary.singletons, rev.combined_summary.singletons
        ):
            assert b1 == pytest.approx(b2, abs=1e-9)
            assert p1 == pytest.approx(p2, abs=1e-9)

    def test_empty_group(self):
        with pytest.raises(EmptyGroup):
            monitor_scores([], self.frame(), Thresholds(), period=2010)


def synthetic_setup(seed=1):
    novel = SyntheticObject("newthing", ("quantum", "valve"), novel=True)
    spec = SyntheticSpec(
        marker="device",
        planted_objects=(novel,),
        vocab=("alpha", "beta", "gamma", "delta", "epsilon"),
        docs_per_year=16,
        years=8,
        seed=seed,
    )
    corpus, log = synthetic_source(spec)
    source = build_index(corpus, SourceProfile("synthetic"), log)
    pattern = SearchPattern(
        name="newthing",
        marker="device",
        terms=(
            Term("quantum", TermClass.STRUCTURE),
            Term("valve", TermClass.STRUCTURE),
        ),
    )
    queries = [
        Query("device", ("quantum",)),
        Query("device", ("valve",)),
        Query("device", ("quantum", "valve")),
    ]
    return pattern, source, queries


class TestRunAgents:
    def test_planted_novel_object_registers(self):
        pattern, source, queries = synthetic_setup()
        frame = make_frame(4, default_labels(4))
        # early period: the novel object has almost no coverage -> nov high
        report = run_agents(
            pattern, [source], queries, frame, Thresholds(), period=2001
        )
        assert report.anomalies != ()
        assert any(a.F == 0 for a in report.agents)

    def test_measure_batch_shape(self):
        pattern, source, queries = synthetic_setup()
        batch = measure_batch(source, pattern, queries, period=2003)
        assert batch.source_id == "synthetic"
        assert len(batch.queries) == 3
        assert batch.marker_hits >= max(batch.hits)

    def test_requires_sources_and_queries(self):
        pattern, source, queries = synthetic_setup()
        frame = make_frame(4, default_labels(4))
        with pytest.raises(EmptyGroup):
            run_agents(pattern, [], queries, frame, Thresholds(), period=2001)
        with pytest.raises(EmptyBatch):
            run_agents(pattern, [source], [], frame, Thresholds(), period=2001)

    def test_single_source_combined_equals_own_mass(self):
        pattern, source, queries = synthetic_setup()
        frame = make_frame(4, default_labels(4))
        report = run_agents(
            pattern, [source], queries, frame, Thresholds(), period=2004
        )
        own = contributions_to_mass(report.agents[0].score.per_query_nov, frame)
        assert report.combined_mass == own
