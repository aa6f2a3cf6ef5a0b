"""contbench: continuous micro-benchmarking pipeline.

Harness for stable, tagged, timestamped measurements; an embedded time-series
store with an HTTP service; a noise-aware regression detector with annotation
suppression; and CLI orchestration tying the pieces together.
"""

from .detector import (
    Annotation,
    DetectionPolicy,
    Direction,
    RegressionEvent,
    compare_runs,
    detect,
)
from .harness import (
    BenchmarkResult,
    BenchmarkSpec,
    ClockMode,
    Registry,
    RunnerOptions,
    TimeUnit,
    run_benchmarks,
    run_one,
    sink,
)
from .model import (
    MeasurementPoint,
    RunContext,
    SeriesKey,
    decode_line,
    decode_results_file,
    encode_line,
    encode_results_file,
    results_to_points,
)
from .store import QuerySpec, Series, Store

__version__ = "0.1.0"

__all__ = [
    "Annotation",
    "BenchmarkResult",
    "BenchmarkSpec",
    "ClockMode",
    "DetectionPolicy",
    "Direction",
    "MeasurementPoint",
    "QuerySpec",
    "Registry",
    "RegressionEvent",
    "RunContext",
    "RunnerOptions",
    "Series",
    "SeriesKey",
    "Store",
    "TimeUnit",
    "compare_runs",
    "decode_line",
    "decode_results_file",
    "detect",
    "encode_line",
    "encode_results_file",
    "results_to_points",
    "run_benchmarks",
    "run_one",
    "sink",
]
