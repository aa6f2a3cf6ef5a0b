"""Benchmark registration: specs, parameter ranges, and instance expansion."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional


class BenchmarkError(Exception):
    pass


class DuplicateBenchmarkError(BenchmarkError):
    def __init__(self, name: str):
        super().__init__(f"benchmark already registered: {name!r}")
        self.name = name


class ClockMode(Enum):
    CPU_TIME = "cpu_time"
    REAL_TIME = "real_time"


class TimeUnit(Enum):
    NS = ("ns", 1e9)
    US = ("us", 1e6)
    MS = ("ms", 1e3)
    S = ("s", 1.0)

    @property
    def label(self) -> str:
        return self.value[0]

    def from_seconds(self, seconds: float) -> float:
        return seconds * self.value[1]

    @classmethod
    def from_label(cls, label: str) -> "TimeUnit":
        for unit in cls:
            if unit.label == label:
                return unit
        raise ValueError(f"unknown time unit: {label!r}")


# A benchmark body receives the per-worker IterationState and must drive the
# `for _ in state:` loop exactly once.
Body = Callable[["IterationState"], None]  # noqa: F821 (defined in runner)


def expand_range(low: int, high: int, multiplier: int) -> list[int]:
    """Geometric expansion of [low, high]; both endpoints always included.

    Interior values are low * multiplier^k; `high` is appended when the
    sequence does not land on it exactly.
    """
    if low < 1 or low > high:
        raise ValueError(f"invalid range: need 1 <= low <= high, got ({low}, {high})")
    if multiplier < 2:
        raise ValueError(f"range multiplier must be >= 2, got {multiplier}")
    out = [low]
    while out[-1] * multiplier < high:
        out.append(out[-1] * multiplier)
    if out[-1] != high:
        out.append(high)
    return out


def expand_thread_range(low: int, high: int) -> list[int]:
    """Thread counts from low to high, doubling, endpoints included."""
    return expand_range(low, high, 2)


@dataclass
class BenchmarkSpec:
    """A registered benchmark: body variants plus run configuration.

    `param_ranges` entries are (low, high, multiplier); each expanded range
    contributes one parameter axis exposed to the body via state.range(i).
    """

    name: str
    variants: list[tuple[str, Body]]
    param_ranges: list[tuple[int, int, int]] = field(default_factory=list)
    thread_range: Optional[tuple[int, int]] = None
    clock_mode: ClockMode = ClockMode.CPU_TIME
    time_unit: TimeUnit = TimeUnit.US
    min_time: float = 0.5

    def validate(self) -> None:
        if not self.name:
            raise BenchmarkError("benchmark name must be non-empty")
        if not self.variants:
            raise BenchmarkError(f"benchmark {self.name!r} needs at least one variant")
        for low, high, multiplier in self.param_ranges:
            expand_range(low, high, multiplier)  # raises on bad bounds
        if self.thread_range is not None:
            low, high = self.thread_range
            expand_thread_range(low, high)
        if self.min_time <= 0:
            raise BenchmarkError(f"min_time must be > 0, got {self.min_time}")

    def expanded_params(self) -> list[tuple[int, ...]]:
        axes = [expand_range(lo, hi, m) for lo, hi, m in self.param_ranges]
        return [tuple(combo) for combo in itertools.product(*axes)]

    def expanded_threads(self) -> list[int]:
        if self.thread_range is None:
            return [1]
        return expand_thread_range(*self.thread_range)


def instance_name(
    base: str,
    param_values: tuple[int, ...],
    thread_count: int,
    variant: str,
    *,
    threaded: bool,
) -> str:
    name = base
    for value in param_values:
        name += f"/{value}"
    if threaded:
        name += f"/threads:{thread_count}"
    if variant:
        name += f"<{variant}>"
    return name


@dataclass(frozen=True)
class BenchmarkInstance:
    """One runnable combination of variant x parameters x thread count."""

    spec: BenchmarkSpec
    variant: str
    body: Body
    param_values: tuple[int, ...]
    thread_count: int
    name: str


class Registry:
    """Ordered collection of benchmark specs; immutable once running starts."""

    def __init__(self):
        self._specs: dict[str, BenchmarkSpec] = {}

    def register_benchmark(self, spec: BenchmarkSpec) -> BenchmarkSpec:
        spec.validate()
        if spec.name in self._specs:
            raise DuplicateBenchmarkError(spec.name)
        self._specs[spec.name] = spec
        return spec

    def benchmark(
        self,
        name: str,
        *,
        ranges: list[tuple[int, int, int]] | None = None,
        thread_range: Optional[tuple[int, int]] = None,
        real_time: bool = False,
        unit: TimeUnit = TimeUnit.US,
        min_time: float = 0.5,
    ) -> Callable[[Body], Body]:
        """Decorator registering a single-variant benchmark."""

        def wrap(body: Body) -> Body:
            self.register_benchmark(
                BenchmarkSpec(
                    name=name,
                    variants=[("", body)],
                    param_ranges=list(ranges or []),
                    thread_range=thread_range,
                    clock_mode=ClockMode.REAL_TIME if real_time else ClockMode.CPU_TIME,
                    time_unit=unit,
                    min_time=min_time,
                )
            )
            return body

        return wrap

    def specs(self) -> list[BenchmarkSpec]:
        return list(self._specs.values())

    def instances(self, pattern: str | None = None) -> list[BenchmarkInstance]:
        """Expand all specs into runnable instances, in registration order.

        `pattern` is a regular expression matched (re.search) against the full
        generated instance name.
        """
        matcher = re.compile(pattern) if pattern else None
        out = []
        for spec in self._specs.values():
            threaded = spec.thread_range is not None
            for variant, body in spec.variants:
                for params in spec.expanded_params():
                    for threads in spec.expanded_threads():
                        name = instance_name(
                            spec.name, params, threads, variant, threaded=threaded
                        )
                        if matcher and not matcher.search(name):
                            continue
                        out.append(
                            BenchmarkInstance(spec, variant, body, params, threads, name)
                        )
        return out
