"""Command-line pipeline: evolve -> score -> combine -> trend (+ demo).

Subcommands operate on a JSON run configuration and write plot-ready
JSON/CSV files into the output directory.  Exit codes are part of the
contract: 0 ok, 2 configuration error, 3 source failure, 4 marker not
found, 5 total conflict, 6 degenerate trend series.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from . import schemas
from .agents import RunReport, Thresholds, measure_batch, monitor_scores
from .errors import (
    ConfigError,
    DegenerateSeries,
    InnoscoreError,
    MarkerNotFound,
    SourceError,
    TotalConflict,
)
from .evidence import Frame, SourceProfile, default_labels, make_frame, mass_to_dict
from .genome import (
    GAConfig,
    evolve,
    evolved_query_to_dict,
    queries_from_list,
    report_to_dict,
)
from .metrics import (
    Indicator,
    InnovationScore,
    score_object,
    score_row,
    trend_fit,
    write_measurements_csv,
    write_scores_json,
)
from .pattern import SearchPattern, load_pattern
from .sources import OfflineCorpusSource, build_index, load_corpus, load_query_log

EXIT_CONFIG = 2
EXIT_SOURCE = 3
EXIT_MARKER = 4
EXIT_CONFLICT = 5
EXIT_TREND = 6

DEFAULT_SEED = 20190001


@dataclass(frozen=True)
class SourceConfig:
    id: str
    corpus: Path
    query_log: Path | None
    alpha: float = 1.0


@dataclass(frozen=True)
class RunConfig:
    pattern_path: Path
    sources: tuple[SourceConfig, ...]
    out_dir: Path
    seed: int
    ga: GAConfig
    frame: Frame
    thresholds: Thresholds
    periods: tuple[int, ...]
    evidence: Indicator = Indicator.NOV
    epsilon: float | None = None


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise ConfigError(f"{where}: missing required field {key!r}")
    return obj[key]


def _resolve(base: Path, value: str) -> Path:
    path = Path(value)
    return path if path.is_absolute() else base / path


def load_config(
    path: str | Path,
    seed_override: int | None = None,
    out_override: str | None = None,
) -> RunConfig:
    """Parse and fail-fast validate a run configuration file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    try:
        obj = json.loads(path.read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"config file {path}: {exc}") from exc
    base = path.parent
    where = str(path)

    pattern_path = _resolve(base, _require(obj, "pattern", where))
    if not pattern_path.is_file():
        raise ConfigError(f"{where}: pattern file {pattern_path} does not exist")

    raw_sources = _require(obj, "sources", where)
    if not raw_sources:
        raise ConfigError(f"{where}: field 'sources' must list at least one source")
    sources = []
    for i, entry in enumerate(raw_sources):
        sid = entry.get("id", f"source{i}")
        corpus = _resolve(base, _require(entry, "corpus", f"{where} sources[{i}]"))
        if not corpus.exists():
            raise ConfigError(f"{where}: corpus {corpus} for source {sid!r} missing")
        log = entry.get("query_log")
        log_path = _resolve(base, log) if log else None
        if log_path is not None and not log_path.is_file():
            raise ConfigError(
                f"{where}: query log {log_path} for source {sid!r} missing"
            )
        sources.append(
            SourceConfig(
                id=sid,
                corpus=corpus,
                query_log=log_path,
                alpha=float(entry.get("alpha", 1.0)),
            )
        )

    try:
        frame_cfg = obj.get("frame", {})
        k = int(frame_cfg.get("k", 4))
        labels = frame_cfg.get("labels") or default_labels(k)
        frame = make_frame(k, labels)

        th_cfg = obj.get("thresholds", {})
        thresholds = Thresholds(
            nov_star=float(th_cfg.get("nov", 0.7)),
            rel_star=float(th_cfg.get("rel", 0.7)),
        )

        periods_cfg = _require(obj, "periods", where)
        if isinstance(periods_cfg, dict):
            periods = tuple(
                range(int(periods_cfg["start"]), int(periods_cfg["end"]) + 1)
            )
        else:
            periods = tuple(int(p) for p in periods_cfg)
        if not periods:
            raise ConfigError(f"{where}: empty period range")

        seed = int(obj.get("seed", DEFAULT_SEED))
        if seed_override is not None:
            seed = seed_override
        ga = GAConfig(**obj.get("ga", {}), rng_seed=seed)
        evidence = Indicator(obj.get("evidence", "nov"))
        epsilon = obj.get("epsilon")
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError, InnoscoreError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc

    out_dir = Path(out_override) if out_override else _resolve(
        base, obj.get("out", "out")
    )
    return RunConfig(
        pattern_path=pattern_path,
        sources=tuple(sources),
        out_dir=out_dir,
        seed=seed,
        ga=ga,
        frame=frame,
        thresholds=thresholds,
        periods=periods,
        evidence=evidence,
        epsilon=float(epsilon) if epsilon is not None else None,
    )


def load_runtime(
    cfg: RunConfig,
) -> tuple[SearchPattern, list[OfflineCorpusSource]]:
    """Parse the pattern and build every source before any computation."""
    try:
        pattern = load_pattern(cfg.pattern_path)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"pattern file {cfg.pattern_path}: {exc}") from exc
    sources = []
    for sc in cfg.sources:
        corpus = load_corpus(sc.corpus)
        log = load_query_log(sc.query_log) if sc.query_log else ()
        sources.append(
            build_index(corpus, SourceProfile(sc.id, sc.alpha), log)
        )
    return pattern, sources


def _write_json(obj, path: Path, schema_kind: str) -> None:
    schemas.validate(schema_kind, obj)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def cmd_evolve(cfg: RunConfig) -> int:
    """Evolve the effective query multiset against the first source."""
    pattern, sources = load_runtime(cfg)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    report = evolve(pattern, sources[0], cfg.ga)
    queries = [evolved_query_to_dict(eq) for eq in report.best_queries]
    _write_json(queries, cfg.out_dir / "queries.json", "queries")
    _write_json(report_to_dict(report), cfg.out_dir / "evolution.json", "evolution")
    best = report.best_queries[0]
    print(
        f"evolve: {report.evaluations} evaluations, "
        f"{len(report.generations)} generations, "
        f"best fitness {best.fitness:.4f} for '{best.query.text()}'"
    )
    return 0


def _load_queries(path: Path):
    if not path.is_file():
        raise ConfigError(f"queries file {path} does not exist (run 'evolve' first)")
    entries = queries_from_list(json.loads(path.read_text("utf-8")))
    # multiset semantics: every occurrence counts in the batch
    expanded = []
    for eq in entries:
        expanded.extend([eq.query] * eq.count)
    return expanded


def cmd_score(cfg: RunConfig, queries_path: Path) -> int:
    """Measure every (source, period) and write batches plus scores."""
    pattern, sources = load_runtime(cfg)
    queries = _load_queries(queries_path)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    batches = []
    rows = []
    for source in sources:
        for period in cfg.periods:
            batch = measure_batch(source, pattern, queries, period)
            batches.append(batch)
            rows.append(score_row(batch, score_object(batch)))
    write_measurements_csv(batches, cfg.out_dir / "measurements.csv")
    schemas.validate("scores", rows)
    write_scores_json(rows, cfg.out_dir / "scores.json")
    print(
        f"score: {len(rows)} (source, period) batches over "
        f"{len(sources)} sources and {len(cfg.periods)} periods"
    )
    return 0


def _load_scores(path: Path) -> list[dict]:
    if not path.is_file():
        raise ConfigError(f"scores file {path} does not exist (run 'score' first)")
    rows = json.loads(path.read_text("utf-8"))
    schemas.validate("scores", rows)
    return rows


def _score_from_row(row: dict) -> InnovationScore:
    return InnovationScore(
        nov_raw=float(row["nov_raw"]),
        rel_raw=float(row["rel_raw"]),
        nov=float(row["nov"]),
        rel=float(row["rel"]),
        per_query_nov=tuple(row["per_query_nov"]),
        per_query_rel=tuple(row["per_query_rel"]),
    )


def _summary_dict(frame: Frame, summary) -> dict:
    return {
        "singletons": [
            {"interval": i, "label": frame.labels[i - 1], "bel": b, "pl": p}
            for i, (b, p) in enumerate(summary.singletons, start=1)
        ]
    }


def _report_dict(report: RunReport, frame: Frame) -> dict:
    return {
        "period": report.period,
        "kind": report.kind.value,
        "agents": [
            {"id": a.agent_id, "nov": a.score.nov, "rel": a.score.rel, "F": a.F}
            for a in report.agents
        ],
        "anomalies": [
            {
                "agent_id": a.agent_id,
                "trigger": a.trigger,
                "value": a.value,
                "threshold": a.threshold,
                "period": a.period,
            }
            for a in report.anomalies
        ],
        "combined": {
            "mass": mass_to_dict(report.combined_mass),
            "summary": _summary_dict(frame, report.combined_summary),
        },
        "conflict_per_step": list(report.conflict_per_step),
    }


def cmd_combine(cfg: RunConfig, scores_path: Path) -> int:
    """Fuse per-source evidence period by period; register anomalies."""
    rows = _load_scores(scores_path)
    alphas = {sc.id: sc.alpha for sc in cfg.sources}
    by_period: dict[int, list[dict]] = {}
    for row in rows:
        by_period.setdefault(int(row["period"]), []).append(row)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    reports = []
    anomaly_count = 0
    for period in sorted(by_period):
        entries = [
            (
                SourceProfile(row["source"], alphas.get(row["source"], 1.0)),
                _score_from_row(row),
            )
            for row in by_period[period]
        ]
        report = monitor_scores(
            entries,
            cfg.frame,
            cfg.thresholds,
            period,
            kind=cfg.evidence,
            epsilon=cfg.epsilon,
        )
        anomaly_count += len(report.anomalies)
        reports.append(_report_dict(report, cfg.frame))
    _write_json(reports, cfg.out_dir / "report.json", "report")
    print(
        f"combine: {len(reports)} periods fused ({cfg.evidence.value} evidence), "
        f"{anomaly_count} anomaly records"
    )
    return 0


def cmd_trend(cfg: RunConfig, scores_path: Path) -> int:
    """Fit linear trends to per-period mean scores; write plot-ready data."""
    rows = _load_scores(scores_path)
    by_period: dict[int, list[dict]] = {}
    for row in rows:
        by_period.setdefault(int(row["period"]), []).append(row)
    if len(by_period) < 2:
        raise DegenerateSeries(
            f"trend needs >= 2 periods, scores file has {len(by_period)}"
        )
    periods = sorted(by_period)
    means = {
        p: (
            sum(r["nov"] for r in by_period[p]) / len(by_period[p]),
            sum(r["rel"] for r in by_period[p]) / len(by_period[p]),
        )
        for p in periods
    }
    nov_line = trend_fit([(p, means[p][0]) for p in periods])
    rel_line = trend_fit([(p, means[p][1]) for p in periods])
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    with open(cfg.out_dir / "trend.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["period", "nov", "rel"])
        for p in periods:
            writer.writerow([p, means[p][0], means[p][1]])
    trend_obj = {
        "nov": {"slope": nov_line.slope, "intercept": nov_line.intercept, "n": nov_line.n},
        "rel": {"slope": rel_line.slope, "intercept": rel_line.intercept, "n": rel_line.n},
    }
    _write_json(trend_obj, cfg.out_dir / "trend.json", "trend")
    print(
        f"trend: {len(periods)} periods, nov slope {nov_line.slope:+.5f}, "
        f"rel slope {rel_line.slope:+.5f}"
    )
    return 0


def fixture_config(out_dir: str | Path, seed: int | None = None) -> RunConfig:
    """Run configuration for the bundled demo fixture."""
    root = Path(str(resources.files("innoscore").joinpath("fixture")))
    return RunConfig(
        pattern_path=root / "pattern.json",
        sources=(
            SourceConfig(
                id="archive",
                corpus=root / "corpus_archive.jsonl",
                query_log=root / "query_log.csv",
                alpha=0.9,
            ),
            SourceConfig(
                id="portal",
                corpus=root / "corpus_portal.jsonl",
                query_log=root / "query_log.csv",
                alpha=0.8,
            ),
        ),
        out_dir=Path(out_dir),
        seed=DEFAULT_SEED if seed is None else seed,
        ga=GAConfig(rng_seed=DEFAULT_SEED if seed is None else seed),
        frame=make_frame(4, default_labels(4)),
        thresholds=Thresholds(),
        periods=tuple(range(2018, 2024)),
    )


def cmd_demo(cfg: RunConfig) -> int:
    """Full evolve -> score -> combine -> trend pipeline on the fixture."""
    cmd_evolve(cfg)
    cmd_score(cfg, cfg.out_dir / "queries.json")
    cmd_combine(cfg, cfg.out_dir / "scores.json")
    cmd_trend(cfg, cfg.out_dir / "scores.json")
    print(f"demo: outputs written to {cfg.out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="innoscore",
        description="Innovation scoring: evolved queries, measurement, "
        "evidence fusion, trends.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration JSON")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out", help="override the output directory")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("evolve", parents=[common], help="evolve the query multiset")
    p_score = sub.add_parser(
        "score", parents=[common], help="measure and score every source/period"
    )
    p_score.add_argument("--queries", help="queries.json path (default: <out>/queries.json)")
    for name, help_text in (
        ("combine", "fuse per-source evidence and register anomalies"),
        ("trend", "fit per-indicator linear trends"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--scores", help="scores.json path (default: <out>/scores.json)")
    sub.add_parser(
        "demo", parents=[common], help="run the full pipeline on the bundled fixture"
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "demo":
            cfg = fixture_config(args.out or "demo_out", args.seed)
            return cmd_demo(cfg)
        if not args.config:
            raise ConfigError(f"--config is required for '{args.command}'")
        cfg = load_config(args.config, args.seed, args.out)
        if args.command == "evolve":
            return cmd_evolve(cfg)
        if args.command == "score":
            queries = Path(args.queries) if args.queries else cfg.out_dir / "queries.json"
            return cmd_score(cfg, queries)
        scores = Path(args.scores) if args.scores else cfg.out_dir / "scores.json"
        if args.command == "combine":
            return cmd_combine(cfg, scores)
        return cmd_trend(cfg, scores)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SourceError as exc:
        print(f"source error: {exc}", file=sys.stderr)
        return EXIT_SOURCE
    except MarkerNotFound as exc:
        print(f"marker not found: {exc}", file=sys.stderr)
        return EXIT_MARKER
    except TotalConflict as exc:
        step = f" at fold step {exc.step}" if exc.step is not None else ""
        print(f"total conflict{step}: {exc}", file=sys.stderr)
        return EXIT_CONFLICT
    except DegenerateSeries as exc:
        print(f"degenerate series: {exc}", file=sys.stderr)
        return EXIT_TREND


if __name__ == "__main__":
    sys.exit(main())
