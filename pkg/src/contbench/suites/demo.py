"""Demo benchmark suite exercising every harness feature.

Runnable directly (`python -m contbench.suites.demo`) or through the
orchestrator (`contbench run`).
"""

from __future__ import annotations

import time

from ..harness import BenchmarkSpec, ClockMode, Registry, TimeUnit, sink
from ..suite import suite_main

REGISTRY = Registry()

MIB = 2**20


def busy_wait(seconds: float) -> None:
    deadline = time.perf_counter_ns() + int(seconds * 1e9)
    while time.perf_counter_ns() < deadline:
        pass


@REGISTRY.benchmark("BM_BusyWait1ms", real_time=True, unit=TimeUnit.US)
def bm_busy_wait(state):
    for _ in state:
        busy_wait(0.001)


def _sum_naive(state):
    n = state.range(0)
    for _ in state:
        acc = 0
        for i in range(n):
            acc += i
        sink(acc)


def _sum_builtin(state):
    n = state.range(0)
    for _ in state:
        sink(sum(range(n)))


REGISTRY.register_benchmark(
    BenchmarkSpec(
        name="BM_SumLoop",
        variants=[("naive", _sum_naive), ("builtin", _sum_builtin)],
        param_ranges=[(10_000, 40_000, 4)],
        time_unit=TimeUnit.US,
    )
)


_scratch: dict = {}


def _fan_out(state):
    if state.thread_index == 0:
        _scratch["slots"] = [0] * state.thread_count
    done = 0
    for _ in state:
        _scratch["slots"][state.thread_index] += 1
        done += 1
    state.counters["ops"] = float(done)
    state.set_label(f"workers={state.thread_count}")
    if state.thread_index == 0:
        _scratch.pop("slots", None)


REGISTRY.register_benchmark(
    BenchmarkSpec(
        name="BM_FanOut",
        variants=[("", _fan_out)],
        thread_range=(1, 4),
        clock_mode=ClockMode.REAL_TIME,
        time_unit=TimeUnit.NS,
    )
)


@REGISTRY.benchmark("BM_Alloc64MiB", unit=TimeUnit.MS, min_time=0.05)
def bm_alloc(state):
    # 1 MiB over the nominal size: per-CPU RSS accounting can lag by a few
    # pages, and the reported peak must never undercut the touched 64 MiB.
    for _ in state:
        buf = bytearray(65 * MIB)
        for i in range(0, len(buf), 4096):
            buf[i] = 1
        sink(len(buf))
        del buf


if __name__ == "__main__":
    raise SystemExit(suite_main(REGISTRY))
