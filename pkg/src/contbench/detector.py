"""Noise-aware regression detection over historical series.

Baselines are medians over a trailing window, so a single spiky run cannot
shift them; the alert threshold widens with the window's coefficient of
variation so noisy series need a proportionally larger change to fire. A step
change is reported once at first crossing: after any event the detector stays
disarmed until `window` further points have re-based the median. Points inside
a matching false-positive annotation suppress their events and are excluded
from later baselines.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .harness.runner import BenchmarkResult
from .model import SeriesKey
from .store import Series


class Direction(Enum):
    HIGHER_IS_WORSE = "higher_is_worse"
    LOWER_IS_WORSE = "lower_is_worse"


@dataclass
class DetectionPolicy:
    window: int = 10
    min_rel_change: float = 0.10
    noise_factor: float = 3.0
    direction_metric: Direction = Direction.HIGHER_IS_WORSE

    def validate(self) -> None:
        if self.window < 2:
            raise ValueError(f"window must be >= 2, got {self.window}")
        if self.min_rel_change <= 0:
            raise ValueError("min_rel_change must be > 0")
        if self.noise_factor < 0:
            raise ValueError("noise_factor must be >= 0")


@dataclass(frozen=True)
class RegressionEvent:
    series: SeriesKey
    timestamp_ns: int
    baseline: float
    observed: float
    rel_change: float
    threshold_used: float
    kind: str  # "regression" | "improvement"
    suppressed: bool


@dataclass
class Annotation:
    """Human-authored time-range marker; kind "false_positive" suppresses alerts."""

    measurement: str
    start_ns: int
    end_ns: int
    kind: str = "note"  # "false_positive" | "note"
    tags: dict[str, str] = field(default_factory=dict)
    text: str = ""
    author: str = ""
    created_ns: int = 0
    id: Optional[int] = None

    def validate(self) -> None:
        if not self.measurement:
            raise ValueError("annotation needs a measurement")
        if self.start_ns > self.end_ns:
            raise ValueError(
                f"annotation range inverted: ({self.start_ns}, {self.end_ns})"
            )
        if self.kind not in ("false_positive", "note"):
            raise ValueError(f"unknown annotation kind: {self.kind!r}")

    def matches_series(self, key: SeriesKey) -> bool:
        if key.measurement != self.measurement:
            return False
        tags = key.tag_dict()
        return all(tags.get(k) == v for k, v in self.tags.items())

    def covers(self, timestamp_ns: int) -> bool:
        return self.start_ns <= timestamp_ns <= self.end_ns


def effective_threshold(cv: float, policy: DetectionPolicy) -> float:
    """Relative-change threshold, widened for noisy baselines."""
    return max(policy.min_rel_change, policy.noise_factor * cv)


def _window_stats(values: Sequence[float]) -> tuple[float, float]:
    baseline = statistics.median(values)
    mean = statistics.fmean(values)
    stddev = statistics.stdev(values) if len(values) > 1 else 0.0
    cv = stddev / mean if mean != 0 else 0.0
    return baseline, cv


def _suppressors(
    series: Series, annotations: Sequence[Annotation]
) -> list[Annotation]:
    return [
        a
        for a in annotations
        if a.kind == "false_positive" and a.matches_series(series.key)
    ]


def compute_baseline(
    series: Series,
    at_index: int,
    policy: DetectionPolicy,
    annotations: Sequence[Annotation] = (),
) -> Optional[tuple[float, float]]:
    """(median, cv) of the trailing window before at_index, or None.

    Points covered by matching false-positive annotations are ineligible.
    Returns None when at_index < window or fewer than two eligible points
    remain.
    """
    policy.validate()
    if at_index < policy.window:
        return None
    active = _suppressors(series, annotations)
    eligible = [
        value
        for ts, value in series.points[:at_index]
        if not any(a.covers(ts) for a in active)
    ]
    if len(eligible) < 2:
        return None
    return _window_stats(eligible[-policy.window:])


def detect(
    series: Series,
    policy: DetectionPolicy,
    annotations: Sequence[Annotation] = (),
) -> list[RegressionEvent]:
    """Scan a series in time order and emit threshold crossings."""
    policy.validate()
    active = _suppressors(series, annotations)
    higher_is_worse = policy.direction_metric is Direction.HIGHER_IS_WORSE

    events: list[RegressionEvent] = []
    eligible: list[float] = []  # values usable for baselines, in time order
    disarmed_until = -1
    for index, (ts, observed) in enumerate(series.points):
        covered = any(a.covers(ts) for a in active)
        if (
            index >= policy.window
            and index >= disarmed_until
            and len(eligible) >= 2
        ):
            baseline, cv = _window_stats(eligible[-policy.window:])
            if baseline > 0:
                rel_change = (observed - baseline) / baseline
                threshold = effective_threshold(cv, policy)
                if abs(rel_change) >= threshold:
                    worse = rel_change > 0 if higher_is_worse else rel_change < 0
                    events.append(
                        RegressionEvent(
                            series=series.key,
                            timestamp_ns=ts,
                            baseline=baseline,
                            observed=observed,
                            rel_change=rel_change,
                            threshold_used=threshold,
                            kind="regression" if worse else "improvement",
                            suppressed=covered,
                        )
                    )
                    disarmed_until = index + policy.window
        if not covered:
            eligible.append(observed)
    return events


# -- run-to-run comparison -----------------------------------------------------

_COMPARED_METRICS = ("real_time", "cpu_time")


@dataclass
class ComparisonRow:
    name: str
    metric: str
    old_value: float
    new_value: float
    rel_change: float
    verdict: str  # "regression" | "improvement" | "unchanged"


@dataclass
class RunComparison:
    threshold: float
    rows: list[ComparisonRow] = field(default_factory=list)
    added: list[str] = field(default_factory=list)
    removed: list[str] = field(default_factory=list)
    errored: list[str] = field(default_factory=list)

    @property
    def regressions(self) -> list[ComparisonRow]:
        return [r for r in self.rows if r.verdict == "regression"]

    def to_doc(self) -> dict:
        return {
            "schema_version": "1",
            "threshold": self.threshold,
            "rows": [
                {
                    "name": r.name,
                    "metric": r.metric,
                    "old": r.old_value,
                    "new": r.new_value,
                    "rel_change": r.rel_change,
                    "verdict": r.verdict,
                }
                for r in self.rows
            ],
            "added": self.added,
            "removed": self.removed,
            "errored": self.errored,
        }


def compare_runs(
    old_results: list[BenchmarkResult],
    new_results: list[BenchmarkResult],
    min_rel_change: float = 0.10,
) -> RunComparison:
    """Join two result sets by name and classify per-metric relative changes."""
    old_by_name = {r.name: r for r in old_results}
    new_by_name = {r.name: r for r in new_results}
    comparison = RunComparison(threshold=min_rel_change)
    comparison.added = sorted(set(new_by_name) - set(old_by_name))
    comparison.removed = sorted(set(old_by_name) - set(new_by_name))

    for name in sorted(set(old_by_name) & set(new_by_name)):
        old, new = old_by_name[name], new_by_name[name]
        if old.errored or new.errored:
            comparison.errored.append(name)
            continue
        for metric in _COMPARED_METRICS:
            old_value = getattr(old, f"{metric}_per_iter")
            new_value = getattr(new, f"{metric}_per_iter")
            if old_value <= 0:
                continue
            rel_change = (new_value - old_value) / old_value
            if rel_change >= min_rel_change:
                verdict = "regression"
            elif rel_change <= -min_rel_change:
                verdict = "improvement"
            else:
                verdict = "unchanged"
            comparison.rows.append(
                ComparisonRow(name, metric, old_value, new_value, rel_change, verdict)
            )
    return comparison


def format_comparison(comparison: RunComparison) -> str:
    """Console table for a run comparison."""
    lines = []
    header = f"{'Benchmark':<40} {'Metric':<10} {'Old':>12} {'New':>12} {'Change':>9} Verdict"
    lines.append(header)
    lines.append("-" * len(header))
    for row in comparison.rows:
        lines.append(
            f"{row.name:<40} {row.metric:<10} {row.old_value:>12.4f} "
            f"{row.new_value:>12.4f} {row.rel_change:>+8.1%} {row.verdict}"
        )
    for name in comparison.added:
        lines.append(f"{name:<40} (added: present only in new run)")
    for name in comparison.removed:
        lines.append(f"{name:<40} (removed: present only in old run)")
    for name in comparison.errored:
        lines.append(f"{name:<40} (errored in at least one run)")
    return "\n".join(lines) + "\n"
