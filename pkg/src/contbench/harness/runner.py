"""Benchmark execution: adaptive calibration, repetitions, worker groups.

Each worker thread invokes the benchmark body exactly once; the body's
`for _ in state:` loop is driven through a sequence of lock-step phases
(calibration attempts, measurement repetitions, stability re-runs, and an
optional memory pass) coordinated by entry/exit barriers. Setup code before
the loop therefore runs once per worker, and the `state.thread_index == 0`
guard gives exactly-once setup/teardown per run.
"""

from __future__ import annotations

import gc
import itertools
import math
import statistics
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator, Optional

from .memory import current_rss_bytes, peak_rss_bytes, reset_peak_rss
from .registry import (
    BenchmarkError,
    BenchmarkInstance,
    BenchmarkSpec,
    ClockMode,
    Registry,
    TimeUnit,
    instance_name,
)
from .stats import RunStats, aggregate_stats

_MAX_ITERATIONS = 10**9
_EPSILON_SECONDS = 1e-9  # 1 ns floor for the calibration growth divisor


def calibrate_iterations(
    observed_seconds: float, iterations: int, min_time: float
) -> Optional[int]:
    """Decide whether a timed phase satisfied min_time.

    Returns None when done; otherwise the next iteration count, grown by up to
    10x per attempt and clamped to [iterations + 1, 10^9].
    """
    if observed_seconds >= min_time:
        return None
    growth = min(10.0, 1.4 * min_time / max(observed_seconds, _EPSILON_SECONDS))
    nxt = math.ceil(iterations * growth)
    return max(iterations + 1, min(nxt, _MAX_ITERATIONS))


def check_stability(
    stats: RunStats, cv_threshold: float, reruns_done: int, max_reruns: int
) -> bool:
    """True when the run should be re-run: CV above threshold and budget left."""
    return stats.cv > cv_threshold and reruns_done < max_reruns


@dataclass
class RunnerOptions:
    repetitions: int = 3
    cv_threshold: float = 0.05
    max_reruns: int = 3
    min_time: Optional[float] = None  # overrides spec.min_time when set
    measure_memory: bool = True


@dataclass
class BenchmarkResult:
    name: str
    iterations: int = 0
    real_time_per_iter: float = 0.0
    cpu_time_per_iter: float = 0.0
    time_unit: TimeUnit = TimeUnit.US
    variant: str = ""
    label: str = ""
    counters: dict[str, float] = field(default_factory=dict)
    memory_peak_bytes: Optional[int] = None
    repetitions_used: int = 0
    unstable: bool = False
    error: Optional[str] = None
    stats: Optional[RunStats] = None

    def __post_init__(self):
        self.counters = {k: float(v) for k, v in self.counters.items()}

    @property
    def errored(self) -> bool:
        return self.error is not None


class _PhaseKind(Enum):
    CALIBRATE = "calibrate"
    MEASURE = "measure"
    MEMORY = "memory"


class _PhaseController:
    """Shared phase state machine; decisions run inside barrier actions."""

    def __init__(self, spec: BenchmarkSpec, thread_count: int, options: RunnerOptions):
        self.thread_count = thread_count
        self.clock_mode = spec.clock_mode
        self.min_time = options.min_time if options.min_time is not None else spec.min_time
        self.options = options
        self.kind = _PhaseKind.CALIBRATE
        self.current_n: Optional[int] = 1
        self.cpu_slots = [0] * thread_count
        self.phases: list[tuple[int, int, int]] = []  # (wall_ns, cpu_ns, total_iters)
        self.reruns_done = 0
        self.memory_peak_delta: Optional[int] = None
        self.abort_reason: Optional[str] = None
        self._t0 = 0
        self._mem_before: Optional[int] = None
        self._entry = threading.Barrier(thread_count, action=self._on_enter)
        self._exit = threading.Barrier(thread_count, action=self._on_exit)

    # -- worker side -------------------------------------------------------

    def begin_phase(self, state: "IterationState") -> Optional[int]:
        if self.current_n is None:
            return None
        self._entry.wait()
        state._cpu_start = time.thread_time_ns()
        return self.current_n

    def end_phase(self, state: "IterationState") -> None:
        self.cpu_slots[state.thread_index] = time.thread_time_ns() - state._cpu_start
        self._exit.wait()

    def abort(self, reason: str = "aborted") -> None:
        if self.abort_reason is None:
            self.abort_reason = reason
        self._entry.abort()
        self._exit.abort()

    # -- barrier actions (run once per release, in the last-arriving thread) --

    def _on_enter(self) -> None:
        if self.kind is _PhaseKind.MEMORY:
            # Drop garbage from the timed phases so the "before" floor is clean.
            gc.collect()
            reset_peak_rss()
            self._mem_before = current_rss_bytes()
        self._t0 = time.perf_counter_ns()

    def _on_exit(self) -> None:
        wall = time.perf_counter_ns() - self._t0
        if self.kind is _PhaseKind.MEMORY:
            peak = peak_rss_bytes()
            if peak is not None and self._mem_before is not None:
                self.memory_peak_delta = max(0, peak - self._mem_before)
            self.current_n = None
            return
        cpu = sum(self.cpu_slots)
        total_iters = self.current_n * self.thread_count
        if self.kind is _PhaseKind.CALIBRATE:
            observed_ns = wall if self.clock_mode is ClockMode.REAL_TIME else cpu / self.thread_count
            nxt = calibrate_iterations(observed_ns / 1e9, self.current_n, self.min_time)
            # Safety valve: a body that burns little CPU can never satisfy
            # min_time on the CPU clock; stop growing once wall time explodes.
            if nxt is None or self.current_n >= _MAX_ITERATIONS or wall / 1e9 >= 5 * self.min_time:
                self.phases.append((wall, cpu, total_iters))
                self.kind = _PhaseKind.MEASURE
                self._after_sample()
            else:
                self.current_n = nxt
        else:
            self.phases.append((wall, cpu, total_iters))
            self._after_sample()

    def _after_sample(self) -> None:
        if len(self.phases) < self.options.repetitions:
            return
        samples = self.decision_samples()
        stats = aggregate_stats(samples)
        if check_stability(stats, self.options.cv_threshold, self.reruns_done, self.options.max_reruns):
            self.reruns_done += 1
            return
        if self.options.measure_memory:
            self.kind = _PhaseKind.MEMORY
            self.current_n = 1
        else:
            self.current_n = None

    def decision_samples(self) -> list[float]:
        """Per-iteration times (ns) of the clock selected by clock_mode."""
        if self.clock_mode is ClockMode.REAL_TIME:
            return [wall / iters for wall, _, iters in self.phases]
        return [cpu / iters for _, cpu, iters in self.phases]


class IterationState:
    """Per-worker view of a running benchmark.

    Exposes configured parameter values by index (range(i)), the worker's
    position in the thread group, and mutable label/counters merged after the
    run (label: last writer wins; counters: summed across workers).
    """

    def __init__(self, controller: _PhaseController, param_values: tuple[int, ...],
                 thread_index: int, thread_count: int):
        self._controller = controller
        self.param_values = param_values
        self.thread_index = thread_index
        self.thread_count = thread_count
        self.label = ""
        self.counters: dict[str, float] = {}
        self._cpu_start = 0

    def range(self, index: int = 0) -> int:
        return self.param_values[index]

    def set_label(self, label: str) -> None:
        self.label = label

    def __iter__(self) -> Iterator[None]:
        controller = self._controller
        completed = False
        try:
            while True:
                n = controller.begin_phase(self)
                if n is None:
                    break
                yield from itertools.repeat(None, n)
                controller.end_phase(self)
            completed = True
        finally:
            if not completed:
                controller.abort("measurement loop exited early")


def _worker(body, state: IterationState, controller: _PhaseController,
            errors: list[BaseException], lock: threading.Lock) -> None:
    try:
        body(state)
    except BaseException as exc:  # body failures must not kill the suite
        with lock:
            errors.append(exc)
        controller.abort(f"{type(exc).__name__}: {exc}")


def run_one(
    spec: BenchmarkSpec,
    variant: str,
    param_values: tuple[int, ...],
    thread_count: int,
    options: Optional[RunnerOptions] = None,
) -> BenchmarkResult:
    """Run one benchmark instance and aggregate its repetitions.

    A body that raises produces an errored result instead of propagating, so
    a suite run continues past broken benchmarks.
    """
    options = options or RunnerOptions()
    bodies = dict(spec.variants)
    if variant not in bodies:
        raise BenchmarkError(f"unknown variant {variant!r} for benchmark {spec.name!r}")
    body = bodies[variant]
    name = _format_name(spec, variant, param_values, thread_count)

    controller = _PhaseController(spec, thread_count, options)
    states = [
        IterationState(controller, tuple(param_values), index, thread_count)
        for index in range(thread_count)
    ]
    errors: list[BaseException] = []
    errors_lock = threading.Lock()
    threads = [
        threading.Thread(
            target=_worker,
            args=(body, state, controller, errors, errors_lock),
            name=f"{name}#{state.thread_index}",
            daemon=True,
        )
        for state in states
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    primary = next(
        (e for e in errors if not isinstance(e, threading.BrokenBarrierError)), None
    )
    if primary is not None:
        return BenchmarkResult(
            name=name, variant=variant, time_unit=spec.time_unit,
            error=f"{type(primary).__name__}: {primary}",
        )
    if controller.abort_reason is not None:
        return BenchmarkResult(
            name=name, variant=variant, time_unit=spec.time_unit,
            error=controller.abort_reason,
        )
    if not controller.phases:
        return BenchmarkResult(
            name=name, variant=variant, time_unit=spec.time_unit,
            error="benchmark body never entered the measurement loop",
        )

    unit = spec.time_unit
    real_samples = [unit.from_seconds(w / 1e9 / n) for w, _, n in controller.phases]
    cpu_samples = [unit.from_seconds(c / 1e9 / n) for _, c, n in controller.phases]
    decision = (
        real_samples if spec.clock_mode is ClockMode.REAL_TIME else cpu_samples
    )
    stats = aggregate_stats(decision)

    label = ""
    counters: dict[str, float] = {}
    for state in states:
        if state.label:
            label = state.label
        for key, value in state.counters.items():
            counters[key] = counters.get(key, 0.0) + float(value)

    return BenchmarkResult(
        name=name,
        variant=variant,
        iterations=controller.phases[-1][2],
        real_time_per_iter=statistics.median(real_samples),
        cpu_time_per_iter=statistics.median(cpu_samples),
        time_unit=unit,
        label=label,
        counters=counters,
        memory_peak_bytes=controller.memory_peak_delta,
        repetitions_used=len(controller.phases),
        unstable=stats.cv > options.cv_threshold,
        stats=stats,
    )


def run_instance(instance: BenchmarkInstance, options: Optional[RunnerOptions] = None) -> BenchmarkResult:
    return run_one(
        instance.spec, instance.variant, instance.param_values,
        instance.thread_count, options,
    )


def run_benchmarks(
    registry: Registry,
    options: Optional[RunnerOptions] = None,
    pattern: Optional[str] = None,
    progress: Optional[Callable[[BenchmarkResult], None]] = None,
) -> list[BenchmarkResult]:
    """Run matching instances sequentially (one at a time) in expansion order."""
    results = []
    for instance in registry.instances(pattern):
        result = run_instance(instance, options)
        if progress is not None:
            progress(result)
        results.append(result)
    return results


def _format_name(
    spec: BenchmarkSpec, variant: str, param_values: tuple[int, ...], thread_count: int
) -> str:
    return instance_name(
        spec.name, tuple(param_values), thread_count, variant,
        threaded=spec.thread_range is not None,
    )
