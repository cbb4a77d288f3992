"""Per-source search agents, the anomalous-state indicator, and the
registry of innovation candidates.

One agent wraps one search source.  An agent enters an anomalous state
(indicator F = 0) when its object score strictly crosses a characteristic
threshold, which flags an innovation candidate; the registry records
every crossing.  By construction the registry is non-empty exactly when
some agent has F = 0.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyBatch, EmptyGroup, InnoscoreError, SourceError
from .evidence import (
    BeliefSummary,
    Frame,
    MassFunction,
    SourceProfile,
    belief_summary,
    combine_group_trace,
)
from .metrics import (
    Indicator,
    InnovationScore,
    MeasurementBatch,
    QueryMeasurement,
    contributions_to_mass,
    score_object,
)
from .pattern import Query, SearchPattern, marker_query
from .sources import SourceAdapter


@dataclass(frozen=True)
class Thresholds:
    """Characteristic values; a score strictly above one raises an anomaly."""

    nov_star: float = 0.7
    rel_star: float = 0.7

    def __post_init__(self):
        for name, value in (("nov_star", self.nov_star), ("rel_star", self.rel_star)):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value!r}")


def indicator(score: InnovationScore, th: Thresholds) -> int:
    """0 (anomaly: innovation candidate) iff nov or rel strictly crosses."""
    crossed = score.nov > th.nov_star or score.rel > th.rel_star
    return 0 if crossed else 1


@dataclass(frozen=True)
class AgentState:
    agent_id: str
    score: InnovationScore
    summary: BeliefSummary
    F: int


@dataclass(frozen=True)
class AnomalyRecord:
    """One threshold crossing; value strictly exceeds its threshold."""

    agent_id: str
    trigger: str  # "nov" or "rel"
    value: float
    threshold: float
    period: int


@dataclass(frozen=True)
class RunReport:
    period: int
    kind: Indicator
    agents: tuple[AgentState, ...]
    anomalies: tuple[AnomalyRecord, ...]
    combined_mass: MassFunction
    combined_summary: BeliefSummary
    conflict_per_step: tuple[float, ...]


def _anomalies_for(
    agent_id: str, score: InnovationScore, th: Thresholds, period: int
) -> list[AnomalyRecord]:
    records = []
    if score.nov > th.nov_star:
        records.append(AnomalyRecord(agent_id, "nov", score.nov, th.nov_star, period))
    if score.rel > th.rel_star:
        records.append(AnomalyRecord(agent_id, "rel", score.rel, th.rel_star, period))
    return records


def monitor_scores(
    scored: Sequence[tuple[SourceProfile, InnovationScore]],
    frame: Frame,
    th: Thresholds,
    period: int,
    kind: Indicator = Indicator.NOV,
    epsilon: float | None = None,
) -> RunReport:
    """Evidence fusion and anomaly registration over already-scored sources.

    Per source: the chosen indicator's per-query contributions become a
    mass function on ``frame`` and the indicator function is evaluated;
    masses are then discounted by source reliability and folded with
    Dempster's rule.  The registry is ordered by (period, agent_id).
    """
    if not scored:
        raise EmptyGroup("no scored sources to monitor")
    kind = Indicator(kind)
    agents = []
    anomalies = []
    masses = []
    for profile, score in scored:
        contribs = score.contributions(kind)
        if not contribs:
            raise EmptyBatch(f"source {profile.id!r} has no per-query contributions")
        mass = contributions_to_mass(contribs, frame, epsilon)
        flag = indicator(score, th)
        agents.append(
            AgentState(
                agent_id=profile.id,
                score=score,
                summary=belief_summary(mass),
                F=flag,
            )
        )
        anomalies.extend(_anomalies_for(profile.id, score, th, period))
        masses.append((mass, profile))
    combined, conflicts = combine_group_trace(masses)
    anomalies.sort(key=lambda a: (a.period, a.agent_id, a.trigger))
    return RunReport(
        period=period,
        kind=kind,
        agents=tuple(agents),
        anomalies=tuple(anomalies),
        combined_mass=combined,
        combined_summary=belief_summary(combined),
        conflict_per_step=conflicts,
    )


def measure_batch(
    source: SourceAdapter,
    pattern: SearchPattern,
    queries: Sequence[Query],
    period: int,
) -> MeasurementBatch:
    """Execute the query multiset on one source for one period.

    Hit counts are cumulative up to the period's end (which makes the
    multi-year novelty series meaningful); frequencies are per period.
    """
    until = dt.date(period, 12, 31)
    base = marker_query(pattern)
    try:
        marker_hits = source.count(base, until)
        marker_frequency = source.frequency(base, period)
        measurements = tuple(
            QueryMeasurement(
                query_id=f"q{i:03d}",
                hits=source.count(q, until),
                frequency=source.frequency(q, period),
            )
            for i, q in enumerate(queries)
        )
    except InnoscoreError:
        raise
    except Exception as exc:
        raise SourceError(f"source {source.profile.id!r} failed: {exc}") from exc
    return MeasurementBatch(
        source_id=source.profile.id,
        period=period,
        queries=measurements,
        marker_hits=marker_hits,
        marker_frequency=marker_frequency,
    )


def run_agents(
    pattern: SearchPattern,
    sources: Sequence[SourceAdapter],
    queries: Sequence[Query],
    frame: Frame,
    th: Thresholds,
    period: int,
    kind: Indicator = Indicator.NOV,
    epsilon: float | None = None,
) -> RunReport:
    """Full per-source pipeline: measure, score, bin, flag, then fuse.

    ``queries`` is the effective multiset (repeat a query to weight it).
    """
    if not sources:
        raise EmptyGroup("no sources given")
    if not queries:
        raise EmptyBatch("no queries given")
    scored = []
    for source in sources:
        batch = measure_batch(source, pattern, queries, period)
        scored.append((source.profile, score_object(batch)))
    return monitor_scores(scored, frame, th, period, kind, epsilon)
