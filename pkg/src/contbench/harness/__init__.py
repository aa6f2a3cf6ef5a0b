"""Micro-benchmark harness: registration, execution, statistics."""

from .memory import measure_memory_peak
from .registry import (
    BenchmarkError,
    BenchmarkInstance,
    BenchmarkSpec,
    ClockMode,
    DuplicateBenchmarkError,
    Registry,
    TimeUnit,
    expand_range,
    expand_thread_range,
    instance_name,
)
from .reporter import format_console, format_csv
from .runner import (
    BenchmarkResult,
    IterationState,
    RunnerOptions,
    calibrate_iterations,
    check_stability,
    run_benchmarks,
    run_instance,
    run_one,
)
from .sink import sink
from .stats import RunStats, aggregate_stats

__all__ = [
    "BenchmarkError",
    "BenchmarkInstance",
    "BenchmarkResult",
    "BenchmarkSpec",
    "ClockMode",
    "DuplicateBenchmarkError",
    "IterationState",
    "Registry",
    "RunStats",
    "RunnerOptions",
    "TimeUnit",
    "aggregate_stats",
    "calibrate_iterations",
    "check_stability",
    "expand_range",
    "expand_thread_range",
    "format_console",
    "format_csv",
    "instance_name",
    "measure_memory_peak",
    "run_benchmarks",
    "run_instance",
    "run_one",
    "sink",
]
