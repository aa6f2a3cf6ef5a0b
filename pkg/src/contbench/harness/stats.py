"""Repetition statistics used for stability decisions and reporting."""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field


@dataclass(frozen=True)
class RunStats:
    """Summary of per-repetition per-iteration times.

    `samples` holds one value per repetition, in the benchmark's time unit.
    `stddev` uses the sample (n-1) denominator; `cv` = stddev/mean, the
    instability signal that drives re-runs.
    """

    samples: list[float] = field(default_factory=list)
    mean: float = 0.0
    median: float = 0.0
    stddev: float = 0.0
    cv: float = 0.0


def aggregate_stats(samples: list[float]) -> RunStats:
    """Compute mean, median (midpoint of two central values), sample stddev and CV."""
    if not samples:
        raise ValueError("cannot aggregate an empty sample list")
    mean = statistics.fmean(samples)
    median = statistics.median(samples)
    stddev = statistics.stdev(samples) if len(samples) > 1 else 0.0
    cv = stddev / mean if mean != 0 else 0.0
    return RunStats(list(samples), mean, median, stddev, cv)
