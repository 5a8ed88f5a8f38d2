"""Latency benchmark harness and the human answer-grading store.

The benchmark times whole runs the way a stopwatch would: the time the
query was received subtracted from the time the output was given.  Runs
execute strictly sequentially so back-to-back timings stay comparable;
the harness never parallelizes runs.

Answer grading is three 1 to 5 integer scores per answer (accuracy,
relevance, comprehensiveness) kept in an append-only JSONL file where
the newest record per (exchange_id, rater) wins.
"""

from __future__ import annotations

import json
import logging
import math
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from statistics import fmean
from typing import Callable

from .errors import FusionRagError, NotFoundError, ValidationError
from .gateway import LlmGateway
from .models import MODE_RAG, MODE_RAG_FUSION, StageTimings
from .pipeline import CorpusHandles, PipelineConfig, run_rag, run_rag_fusion

logger = logging.getLogger(__name__)

ORDER_BLOCKS = "blocks"
ORDER_INTERLEAVED = "interleaved"
ORDERS = (ORDER_BLOCKS, ORDER_INTERLEAVED)

# fusion's first LLM call is flagged as slow above this
DEFAULT_QUERY_GENERATION_BOUND_MS = 5000

RUBRIC_DIMENSIONS = ("accuracy", "relevance", "comprehensiveness")


@dataclass(frozen=True)
class BenchRun:
    """One timed pipeline run."""

    run_index: int
    mode: str
    query: str
    total_ms: int
    timings: StageTimings
    failed: bool = False
    error: str = ""

    def __post_init__(self):
        if self.total_ms <= 0:
            raise ValueError("total_ms must be > 0")

    def to_dict(self) -> dict:
        return {
            "run_index": self.run_index,
            "mode": self.mode,
            "query": self.query,
            "total_ms": self.total_ms,
            "timings": self.timings.to_dict(),
            "failed": self.failed,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "BenchRun":
        return cls(run_index=raw["run_index"], mode=raw["mode"],
                   query=raw["query"], total_ms=raw["total_ms"],
                   timings=StageTimings.from_dict(raw["timings"]),
                   failed=raw.get("failed", False),
                   error=raw.get("error", ""))


@dataclass(frozen=True)
class BenchReport:
    """Aggregated benchmark: per-mode runs, averages over the successful
    ones, and their ratio.  Averages are plain arithmetic means and can
    always be recomputed from the stored runs."""

    query: str
    runs_per_mode: int
    order: str
    rag_runs: tuple[BenchRun, ...]
    fusion_runs: tuple[BenchRun, ...]
    rag_avg_ms: float
    fusion_avg_ms: float
    ratio: float
    rag_failures: int = 0
    fusion_failures: int = 0
    query_generation_bound_ms: int = DEFAULT_QUERY_GENERATION_BOUND_MS
    slow_query_generation_runs: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "query": self.query,
            "runs_per_mode": self.runs_per_mode,
            "order": self.order,
            "rag_runs": [run.to_dict() for run in self.rag_runs],
            "fusion_runs": [run.to_dict() for run in self.fusion_runs],
            "rag_avg_ms": self.rag_avg_ms,
            "fusion_avg_ms": self.fusion_avg_ms,
            "ratio": self.ratio,
            "rag_failures": self.rag_failures,
            "fusion_failures": self.fusion_failures,
            "query_generation_bound_ms": self.query_generation_bound_ms,
            "slow_query_generation_runs": list(self.slow_query_generation_runs),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "BenchReport":
        return cls(
            query=raw["query"],
            runs_per_mode=raw["runs_per_mode"],
            order=raw["order"],
            rag_runs=tuple(BenchRun.from_dict(r) for r in raw["rag_runs"]),
            fusion_runs=tuple(BenchRun.from_dict(r) for r in raw["fusion_runs"]),
            rag_avg_ms=raw["rag_avg_ms"],
            fusion_avg_ms=raw["fusion_avg_ms"],
            ratio=raw["ratio"],
            rag_failures=raw.get("rag_failures", 0),
            fusion_failures=raw.get("fusion_failures", 0),
            query_generation_bound_ms=raw.get(
                "query_generation_bound_ms", DEFAULT_QUERY_GENERATION_BOUND_MS),
            slow_query_generation_runs=tuple(
                raw.get("slow_query_generation_runs", ())),
        )


def build_report(query: str, runs_per_mode: int, order: str,
                 rag_runs: list[BenchRun], fusion_runs: list[BenchRun],
                 query_generation_bound_ms: int = DEFAULT_QUERY_GENERATION_BOUND_MS
                 ) -> BenchReport:
    """Aggregates runs into a report.  Failed runs are excluded from the
    averages; the ratio is 0.0 when either mode has no successful run."""
    rag_ok = [r.total_ms for r in rag_runs if not r.failed]
    fusion_ok = [r.total_ms for r in fusion_runs if not r.failed]
    rag_avg = fmean(rag_ok) if rag_ok else 0.0
    fusion_avg = fmean(fusion_ok) if fusion_ok else 0.0
    ratio = fusion_avg / rag_avg if rag_avg > 0 and fusion_ok else 0.0
    slow = tuple(r.run_index for r in fusion_runs
                 if not r.failed
                 and r.timings.query_generation_ms > query_generation_bound_ms)
    return BenchReport(
        query=query,
        runs_per_mode=runs_per_mode,
        order=order,
        rag_runs=tuple(rag_runs),
        fusion_runs=tuple(fusion_runs),
        rag_avg_ms=rag_avg,
        fusion_avg_ms=fusion_avg,
        ratio=ratio,
        rag_failures=sum(1 for r in rag_runs if r.failed),
        fusion_failures=sum(1 for r in fusion_runs if r.failed),
        query_generation_bound_ms=query_generation_bound_ms,
        slow_query_generation_runs=slow,
    )


def _timed_run(mode: str, run_index: int, query: str, handles: CorpusHandles,
               gateway: LlmGateway, config: PipelineConfig) -> BenchRun:
    runner = run_rag if mode == MODE_RAG else run_rag_fusion
    started = time.perf_counter()
    try:
        exchange = runner(query, handles, gateway, config)
    except FusionRagError as exc:
        elapsed = max(1, math.ceil((time.perf_counter() - started) * 1000))
        logger.warning("bench run %d (%s) failed: %s", run_index, mode, exc)
        return BenchRun(run_index=run_index, mode=mode, query=query,
                        total_ms=elapsed,
                        timings=StageTimings(total_ms=elapsed),
                        failed=True, error=str(exc))
    # ceil instead of round: any positive duration counts as >= 1ms
    elapsed = max(1, math.ceil((time.perf_counter() - started) * 1000))
    return BenchRun(run_index=run_index, mode=mode, query=query,
                    total_ms=elapsed, timings=exchange.timings)


def run_benchmark(query: str, runs_per_mode: int, handles: CorpusHandles,
                  gateway: LlmGateway, rag_config: PipelineConfig,
                  fusion_config: PipelineConfig,
                  order: str = ORDER_BLOCKS,
                  query_generation_bound_ms: int = DEFAULT_QUERY_GENERATION_BOUND_MS
                  ) -> BenchReport:
    """Times runs_per_mode back-to-back runs of each pipeline on the same
    query, strictly sequentially.

    Default order runs all classic-mode runs first, then all fusion runs;
    "interleaved" alternates classic, fusion, classic, fusion.  The order
    used is recorded in the report.  A failed run stays in the report,
    marked failed, and is left out of the averages.
    """
    if runs_per_mode < 1:
        raise ValueError("runs_per_mode must be >= 1")
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}")

    if order == ORDER_BLOCKS:
        schedule = [(MODE_RAG, i) for i in range(1, runs_per_mode + 1)]
        schedule += [(MODE_RAG_FUSION, i) for i in range(1, runs_per_mode + 1)]
    else:
        schedule = []
        for i in range(1, runs_per_mode + 1):
            schedule.append((MODE_RAG, i))
            schedule.append((MODE_RAG_FUSION, i))

    rag_runs: list[BenchRun] = []
    fusion_runs: list[BenchRun] = []
    for mode, run_index in schedule:
        config = rag_config if mode == MODE_RAG else fusion_config
        run = _timed_run(mode, run_index, query, handles, gateway, config)
        (rag_runs if mode == MODE_RAG else fusion_runs).append(run)

    return build_report(query, runs_per_mode, order, rag_runs, fusion_runs,
                        query_generation_bound_ms)


def render_report_table(report: BenchReport) -> str:
    """The report as the text table the CLI prints: one row per run pair,
    an Average row over successful runs, and the observation footer."""
    col1, col2 = "Run", "RAG-Fusion Time (s)"
    width1 = max(len(col1), len("Average"))
    width2 = len(col2)

    def cell(runs: tuple[BenchRun, ...], i: int) -> str:
        if i >= len(runs):
            return "-"
        return "failed" if runs[i].failed else f"{runs[i].total_ms / 1000:.2f}"

    lines = [f"{col1:<{width1}}  {col2:<{width2}}  RAG Time (s)"]
    for i in range(max(len(report.fusion_runs), len(report.rag_runs))):
        lines.append(f"{i + 1:<{width1}}  {cell(report.fusion_runs, i):<{width2}}  "
                     f"{cell(report.rag_runs, i)}")
    fusion_avg = f"{report.fusion_avg_ms / 1000:.2f}"
    lines.append(f"{'Average':<{width1}}  {fusion_avg:<{width2}}  "
                 f"{report.rag_avg_ms / 1000:.2f}")
    lines.append(f"Observation: RAG-Fusion takes {report.ratio:.2f} times longer.")
    return "\n".join(lines)


def write_report(report: BenchReport, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True)
                    + "\n", encoding="utf-8")
    return path


def read_report(path: str | Path) -> BenchReport:
    return BenchReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def load_reference_report() -> BenchReport:
    """The shipped ten-run reference timings as a report, for exercising
    aggregation and rendering against known averages."""
    raw = json.loads(resources.files("fusionrag.data")
                     .joinpath("reference_latency_runs.json")
                     .read_text(encoding="utf-8"))
    query = raw["query"]

    def to_runs(mode: str, seconds: list[float]) -> list[BenchRun]:
        runs = []
        for i, value in enumerate(seconds, start=1):
            ms = int(round(value * 1000))
            runs.append(BenchRun(run_index=i, mode=mode, query=query,
                                 total_ms=ms, timings=StageTimings(total_ms=ms)))
        return runs

    return build_report(query, raw["runs_per_mode"], raw["order"],
                        to_runs(MODE_RAG, raw["rag_seconds"]),
                        to_runs(MODE_RAG_FUSION, raw["fusion_seconds"]))


@dataclass(frozen=True)
class RubricScore:
    """One rater's 1 to 5 grades for one answer."""

    exchange_id: str
    rater: str
    accuracy: int
    relevance: int
    comprehensiveness: int
    notes: str = ""

    def __post_init__(self):
        if not self.exchange_id.strip():
            raise ValidationError("exchange_id must be non-empty")
        if not self.rater.strip():
            raise ValidationError("rater must be non-empty")
        for name in RUBRIC_DIMENSIONS:
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) \
                    or not 1 <= value <= 5:
                raise ValidationError(
                    f"{name} must be an integer in [1, 5], got {value!r}")

    def to_dict(self) -> dict:
        return {
            "exchange_id": self.exchange_id,
            "rater": self.rater,
            "accuracy": self.accuracy,
            "relevance": self.relevance,
            "comprehensiveness": self.comprehensiveness,
            "notes": self.notes,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "RubricScore":
        return cls(exchange_id=raw["exchange_id"], rater=raw["rater"],
                   accuracy=raw["accuracy"], relevance=raw["relevance"],
                   comprehensiveness=raw["comprehensiveness"],
                   notes=raw.get("notes", ""))


class RubricStore:
    """Append-only JSONL score store.

    Every submission appends a line; reads resolve the newest line per
    (exchange_id, rater), so a resubmission overwrites with a bumped
    revision.  lookup_mode maps an exchange id to its pipeline mode and
    doubles as the existence check (None means unknown exchange).
    """

    def __init__(self, path: str | Path,
                 lookup_mode: Callable[[str], str | None] | None = None):
        self.path = Path(path)
        self.lookup_mode = lookup_mode
        self._lock = threading.Lock()

    def record(self, score: RubricScore) -> str:
        if self.lookup_mode is not None \
                and self.lookup_mode(score.exchange_id) is None:
            raise NotFoundError(f"unknown exchange {score.exchange_id!r}")
        with self._lock:
            current = self._latest()
            previous = current.get((score.exchange_id, score.rater))
            revision = previous["revision"] + 1 if previous else 1
            record = dict(score.to_dict(), revision=revision,
                          recorded_at=datetime.now(timezone.utc).isoformat())
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as handle:
                handle.write(json.dumps(record, sort_keys=True) + "\n")
        return f"{score.exchange_id}:{score.rater}"

    def _latest(self) -> dict[tuple[str, str], dict]:
        latest: dict[tuple[str, str], dict] = {}
        if not self.path.exists():
            return latest
        with self.path.open(encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                latest[(record["exchange_id"], record["rater"])] = record
        return latest

    def scores(self) -> list[dict]:
        """Newest record per (exchange_id, rater), insertion-ordered."""
        return list(self._latest().values())

    def get(self, exchange_id: str, rater: str) -> dict:
        record = self._latest().get((exchange_id, rater))
        if record is None:
            raise NotFoundError(
                f"no score for exchange {exchange_id!r} by {rater!r}")
        return record


def rubric_summary(store: RubricStore, mode: str | None = None) -> dict:
    """Per-dimension means over the newest scores, optionally restricted
    to exchanges of one pipeline mode.  An empty selection yields count 0
    and no means."""
    if mode is not None and mode not in (MODE_RAG, MODE_RAG_FUSION):
        raise ValidationError(f"unknown mode {mode!r}")
    selected = []
    for record in store.scores():
        if mode is not None:
            if store.lookup_mode is None:
                continue
            if store.lookup_mode(record["exchange_id"]) != mode:
                continue
        selected.append(record)
    summary = {"mode": mode or "all", "count": len(selected), "means": {}}
    if selected:
        summary["means"] = {
            name: fmean(record[name] for record in selected)
            for name in RUBRIC_DIMENSIONS
        }
    return summary
