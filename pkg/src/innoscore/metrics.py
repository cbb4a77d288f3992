"""Innovation indicators: technological novelty and demand.

Novelty falls as the archetype's queries match more documents relative
to the marker-only baseline R0; demand rises as users run analogous
queries more often relative to the marker-only frequency F0:

    nov_raw = 1 - (1/S) * sum(1 - exp(1 - R_k / R0))     in [1, e]
    rel_raw =     (1/S) * sum(1 - exp(1 - F_k / F0))     in [1 - e, 0]

(ranges hold when measurements stay below their baselines).  The raw
values are mapped affinely onto [0, 1] and clamped; per-query terms are
binned onto a grouping-interval frame as Dempster-Shafer evidence.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateSeries, EmptyBatch, MarkerNotFound
from .evidence import Frame, MassFunction, make_mass

_E_MINUS_1 = math.e - 1.0


class Indicator(str, Enum):
    NOV = "nov"
    REL = "rel"


def _clamp01(value: float) -> float:
    return min(1.0, max(0.0, value))


def novelty_raw(hits: Sequence[int], marker_hits: int) -> float:
    """Raw novelty from per-query hit counts against the marker baseline."""
    if marker_hits < 1:
        raise MarkerNotFound(f"marker hit count must be >= 1, got {marker_hits}")
    if len(hits) == 0:
        raise EmptyBatch("no query hit counts")
    if any(r < 0 for r in hits):
        raise ValueError("negative hit count")
    mean = math.fsum(1.0 - math.exp(1.0 - r / marker_hits) for r in hits) / len(hits)
    return 1.0 - mean


def demand_raw(frequencies: Sequence[float], marker_frequency: float) -> float:
    """Raw demand from per-query frequencies against the marker baseline."""
    if marker_frequency <= 0:
        raise MarkerNotFound(
            f"marker frequency must be positive, got {marker_frequency}"
        )
    if len(frequencies) == 0:
        raise EmptyBatch("no query frequencies")
    if any(f < 0 for f in frequencies):
        raise ValueError("negative frequency")
    return math.fsum(
        1.0 - math.exp(1.0 - f / marker_frequency) for f in frequencies
    ) / len(frequencies)


def normalize_score(raw: float, kind: Indicator) -> float:
    """Affine map of a raw indicator onto [0, 1], clamped.

    Novelty maps [1, e] and demand [1-e, 0] onto the unit interval, so
    out-of-range raw values (measurements above the baseline) saturate.
    """
    if Indicator(kind) is Indicator.NOV:
        return _clamp01((raw - 1.0) / _E_MINUS_1)
    return _clamp01((raw + _E_MINUS_1) / _E_MINUS_1)


def per_query_contribution(x: float, x0: float, kind: Indicator) -> float:
    """Normalized single-query term feeding the evidence binning.

    Novelty contribution (exp(1 - x/x0) - 1)/(e - 1) decreases in x;
    the demand contribution is its complement and increases in x.
    """
    if x0 <= 0:
        raise MarkerNotFound(f"marker baseline must be positive, got {x0}")
    if x < 0:
        raise ValueError(f"measurement must be non-negative, got {x}")
    nov_term = (math.exp(1.0 - x / x0) - 1.0) / _E_MINUS_1
    if Indicator(kind) is Indicator.NOV:
        return _clamp01(nov_term)
    return _clamp01(1.0 - nov_term)


@dataclass(frozen=True)
class QueryMeasurement:
    query_id: str
    hits: int
    frequency: float


@dataclass(frozen=True)
class MeasurementBatch:
    """Per-query hits and frequencies from one source for one period."""

    source_id: str
    period: int
    queries: tuple[QueryMeasurement, ...]
    marker_hits: int
    marker_frequency: float

    def __post_init__(self):
        object.__setattr__(self, "queries", tuple(self.queries))
        if not self.queries:
            raise EmptyBatch(f"batch {self.source_id}/{self.period} has no queries")
        if self.marker_hits < 1:
            raise MarkerNotFound(
                f"batch {self.source_id}/{self.period}: marker hit count "
                f"{self.marker_hits} < 1"
            )
        if self.marker_frequency <= 0:
            raise MarkerNotFound(
                f"batch {self.source_id}/{self.period}: marker frequency "
                f"{self.marker_frequency} <= 0"
            )

    @property
    def hits(self) -> tuple[int, ...]:
        return tuple(q.hits for q in self.queries)

    @property
    def frequencies(self) -> tuple[float, ...]:
        return tuple(q.frequency for q in self.queries)


@dataclass(frozen=True)
class InnovationScore:
    """Raw and normalized indicator values plus per-query contributions."""

    nov_raw: float
    rel_raw: float
    nov: float
    rel: float
    per_query_nov: tuple[float, ...]
    per_query_rel: tuple[float, ...]

    def contributions(self, kind: Indicator) -> tuple[float, ...]:
        return self.per_query_nov if Indicator(kind) is Indicator.NOV else self.per_query_rel


def score_object(batch: MeasurementBatch) -> InnovationScore:
    """Full indicator computation for one measurement batch."""
    nov_raw_v = novelty_raw(batch.hits, batch.marker_hits)
    rel_raw_v = demand_raw(batch.frequencies, batch.marker_frequency)
    return InnovationScore(
        nov_raw=nov_raw_v,
        rel_raw=rel_raw_v,
        nov=normalize_score(nov_raw_v, Indicator.NOV),
        rel=normalize_score(rel_raw_v, Indicator.REL),
        per_query_nov=tuple(
            per_query_contribution(r, batch.marker_hits, Indicator.NOV)
            for r in batch.hits
        ),
        per_query_rel=tuple(
            per_query_contribution(f, batch.marker_frequency, Indicator.REL)
            for f in batch.frequencies
        ),
    )


def contributions_to_mass(
    contribs: Sequence[float], frame: Frame, epsilon: float | None = None
) -> MassFunction:
    """Bin [0, 1] contributions onto the frame as relative frequencies.

    A value within ``epsilon`` (default: interval width / 10) of an
    interior boundary is ambiguous and lands on the union of the two
    adjacent intervals, producing a non-singleton focal element.
    """
    if len(contribs) == 0:
        raise EmptyBatch("no contributions to bin")
    if any(not 0.0 <= c <= 1.0 for c in contribs):
        raise ValueError("contributions must lie in [0, 1]")
    eps = frame.width / 10.0 if epsilon is None else float(epsilon)
    counts: dict[frozenset, int] = {}
    for value in contribs:
        focal = None
        for j in range(1, frame.k):  # interior boundaries only
            boundary = frame.bounds[j][0]
            if abs(value - boundary) <= eps:
                focal = frozenset({j, j + 1})
                break
        if focal is None:
            focal = frozenset({frame.interval_of(value)})
        counts[focal] = counts.get(focal, 0) + 1
    total = len(contribs)
    return make_mass(frame, ((s, c / total) for s, c in counts.items()))


@dataclass(frozen=True)
class TrendLine:
    slope: float
    intercept: float
    n: int


def trend_fit(series: Sequence[tuple[float, float]]) -> TrendLine:
    """Ordinary least-squares line through (period_index, score) points."""
    if len(series) < 2:
        raise DegenerateSeries(f"need >= 2 points, got {len(series)}")
    x = np.asarray([p for p, _ in series], dtype=float)
    y = np.asarray([v for _, v in series], dtype=float)
    dx = x - x.mean()
    sxx = float(np.dot(dx, dx))
    if sxx == 0.0:
        raise DegenerateSeries("all period indices are equal")
    slope = float(np.dot(dx, y - y.mean()) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    return TrendLine(slope=slope, intercept=intercept, n=len(series))


# --- measurement CSV and scores JSON ---------------------------------------

MARKER_ROW_ID = "__marker__"
_CSV_HEADER = ["source", "period", "query_id", "R", "F"]


def write_measurements_csv(
    batches: Iterable[MeasurementBatch], path: str | Path
) -> None:
    """CSV rows source,period,query_id,R,F with one marker row per batch."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        for b in batches:
            writer.writerow(
                [b.source_id, b.period, MARKER_ROW_ID, b.marker_hits, b.marker_frequency]
            )
            for q in b.queries:
                writer.writerow([b.source_id, b.period, q.query_id, q.hits, q.frequency])


def read_measurements_csv(path: str | Path) -> list[MeasurementBatch]:
    grouped: dict[tuple[str, int], dict] = {}
    order: list[tuple[str, int]] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != _CSV_HEADER:
            raise ValueError(
                f"{path}: expected header {','.join(_CSV_HEADER)}, "
                f"got {reader.fieldnames}"
            )
        for row in reader:
            key = (row["source"], int(row["period"]))
            if key not in grouped:
                grouped[key] = {"marker": None, "queries": []}
                order.append(key)
            if row["query_id"] == MARKER_ROW_ID:
                grouped[key]["marker"] = (int(row["R"]), float(row["F"]))
            else:
                grouped[key]["queries"].append(
                    QueryMeasurement(row["query_id"], int(row["R"]), float(row["F"]))
                )
    batches = []
    for source, period in order:
        entry = grouped[(source, period)]
        if entry["marker"] is None:
            raise MarkerNotFound(f"{path}: no {MARKER_ROW_ID} row for {source}/{period}")
        r0, f0 = entry["marker"]
        batches.append(
            MeasurementBatch(
                source_id=source,
                period=period,
                queries=tuple(entry["queries"]),
                marker_hits=r0,
                marker_frequency=f0,
            )
        )
    return batches


def score_row(batch: MeasurementBatch, score: InnovationScore) -> dict:
    """Score JSON row; per-query contributions ride along so evidence can
    be rebuilt from the file alone."""
    return {
        "source": batch.source_id,
        "period": batch.period,
        "nov": score.nov,
        "rel": score.rel,
        "nov_raw": score.nov_raw,
        "rel_raw": score.rel_raw,
        "per_query_nov": list(score.per_query_nov),
        "per_query_rel": list(score.per_query_rel),
    }


def write_scores_json(rows: Sequence[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(list(rows), fh, indent=2)
        fh.write("\n")


def read_scores_json(path: str | Path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        rows = json.load(fh)
    if not isinstance(rows, list):
        raise ValueError(f"{path}: scores file must hold a JSON array")
    return rows
