"""Tagged, timestamped measurement records and their serializations.

Two formats live here: the line-oriented wire format used for uploads and
segment storage (one point per LF-terminated UTF-8 line, tags sorted by key),
and the structured results document persisted after a benchmark run (JSON with
stable key order and a schema version).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

from .harness.runner import BenchmarkResult
from .harness.registry import TimeUnit
from .harness.stats import RunStats

SCHEMA_VERSION = "1"

MEASUREMENT = "benchmark"  # measurement name for harness-produced points


class ModelError(Exception):
    pass


class PointError(ModelError):
    pass


class LineParseError(ModelError):
    """Malformed wire-format line; `offset` is the UTF-8 byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class SchemaVersionError(ModelError):
    def __init__(self, version: str):
        super().__init__(f"unknown schema version: {version!r}")
        self.version = version


@dataclass(frozen=True)
class RunContext:
    """Environment tags attached to every point produced by a run."""

    machine: str
    commit: str
    branch: str
    compiler: str
    build_type: str
    timestamp_ns: int

    def validate(self) -> None:
        for key, value in self.tags().items():
            if not value:
                raise ModelError(f"run context tag {key!r} must be non-empty")
        if self.timestamp_ns <= 0:
            raise ModelError("run context timestamp_ns must be > 0")

    def tags(self) -> dict[str, str]:
        return {
            "machine": self.machine,
            "commit": self.commit,
            "branch": self.branch,
            "compiler": self.compiler,
            "build_type": self.build_type,
        }


@dataclass(frozen=True, order=True)
class SeriesKey:
    """Identity of a series: measurement plus canonically sorted tag pairs."""

    measurement: str
    tags: tuple[tuple[str, str], ...]

    @classmethod
    def make(cls, measurement: str, tags: dict[str, str]) -> "SeriesKey":
        return cls(measurement, tuple(sorted(tags.items())))

    def tag_dict(self) -> dict[str, str]:
        return dict(self.tags)


@dataclass
class MeasurementPoint:
    measurement: str
    tags: dict[str, str]
    fields: dict[str, float]
    timestamp_ns: int

    def __post_init__(self):
        self.tags = {str(k): str(v) for k, v in self.tags.items()}
        self.fields = {str(k): float(v) for k, v in self.fields.items()}

    def validate(self) -> None:
        if not self.measurement:
            raise PointError("measurement must be non-empty")
        if "\n" in self.measurement:
            raise PointError("measurement must not contain newlines")
        for key, value in self.tags.items():
            if not key:
                raise PointError("tag keys must be non-empty")
            if "\n" in key or "\n" in value:
                raise PointError(f"tag {key!r} contains a newline")
        if not self.fields:
            raise PointError("point needs at least one field")
        for key, value in self.fields.items():
            if not key:
                raise PointError("field keys must be non-empty")
            if "\n" in key:
                raise PointError(f"field key {key!r} contains a newline")
            if not math.isfinite(value):
                raise PointError(f"field {key!r} is not finite: {value!r}")
        if self.timestamp_ns <= 0:
            raise PointError("timestamp_ns must be > 0")

    def series_key(self) -> SeriesKey:
        return SeriesKey.make(self.measurement, self.tags)


def results_to_points(
    results: list[BenchmarkResult], ctx: RunContext
) -> list[MeasurementPoint]:
    """One point per successful result; errored results carry no fields to store."""
    ctx.validate()
    points = []
    for result in results:
        if result.errored:
            continue
        tags = dict(ctx.tags())
        tags["name"] = result.name
        tags["unit"] = result.time_unit.label
        if result.variant:
            tags["variant"] = result.variant
        fields: dict[str, float] = dict(result.counters)
        fields["real_time"] = result.real_time_per_iter
        fields["cpu_time"] = result.cpu_time_per_iter
        fields["iterations"] = float(result.iterations)
        if result.memory_peak_bytes is not None:
            fields["memory_peak_bytes"] = float(result.memory_peak_bytes)
        points.append(
            MeasurementPoint(MEASUREMENT, tags, fields, ctx.timestamp_ns)
        )
    return points


# -- wire format -------------------------------------------------------------
#
#   measurement,tagk=tagv,... fieldk=fieldv,... timestamp_ns
#
# Backslash escapes commas, spaces, equals signs, and backslash itself in
# names and values; tags are sorted by key so equal points encode to
# byte-identical lines.

_ESCAPED = {",", " ", "=", "\\"}


def _escape(text: str) -> str:
    out = []
    for ch in text:
        if ch in _ESCAPED:
            out.append("\\")
        out.append(ch)
    return "".join(out)


def encode_line(point: MeasurementPoint) -> str:
    point.validate()
    parts = [_escape(point.measurement)]
    for key in sorted(point.tags):
        parts.append(f",{_escape(key)}={_escape(point.tags[key])}")
    parts.append(" ")
    parts.append(
        ",".join(
            f"{_escape(key)}={float(point.fields[key])!r}"
            for key in sorted(point.fields)
        )
    )
    parts.append(f" {point.timestamp_ns}")
    return "".join(parts)


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def _scan(text: str, i: int, stops: str) -> tuple[str, int]:
    out = []
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\\":
            if i + 1 >= n:
                raise LineParseError("dangling escape", _byte_offset(text, i))
            out.append(text[i + 1])
            i += 2
            continue
        if ch in stops:
            break
        out.append(ch)
        i += 1
    return "".join(out), i


def decode_line(text: str) -> MeasurementPoint:
    """Parse one wire-format line back into a point; inverse of encode_line."""
    line = text.rstrip("\n")
    if not line:
        raise LineParseError("empty line", 0)
    measurement, i = _scan(line, 0, ", ")
    if not measurement:
        raise LineParseError("missing measurement", 0)

    tags: dict[str, str] = {}
    while i < len(line) and line[i] == ",":
        i += 1
        key, i = _scan(line, i, "=, ")
        if i >= len(line) or line[i] != "=":
            raise LineParseError("expected '=' after tag key", _byte_offset(line, i))
        i += 1
        value, i = _scan(line, i, ", ")
        if not key:
            raise LineParseError("empty tag key", _byte_offset(line, i))
        tags[key] = value

    if i >= len(line) or line[i] != " ":
        raise LineParseError("expected field section", _byte_offset(line, i))
    i += 1

    fields: dict[str, float] = {}
    while True:
        start = i
        key, i = _scan(line, i, "=, ")
        if i >= len(line) or line[i] != "=":
            raise LineParseError("expected '=' after field key", _byte_offset(line, i))
        i += 1
        raw, i = _scan(line, i, ", ")
        try:
            value = float(raw)
        except ValueError:
            raise LineParseError(
                f"bad field value {raw!r}", _byte_offset(line, start)
            ) from None
        if not key:
            raise LineParseError("empty field key", _byte_offset(line, start))
        fields[key] = value
        if i < len(line) and line[i] == ",":
            i += 1
            continue
        break

    if i >= len(line) or line[i] != " ":
        raise LineParseError("missing timestamp", _byte_offset(line, i))
    i += 1
    raw_ts = line[i:]
    try:
        timestamp_ns = int(raw_ts)
    except ValueError:
        raise LineParseError(
            f"bad timestamp {raw_ts!r}", _byte_offset(line, i)
        ) from None

    point = MeasurementPoint(measurement, tags, fields, timestamp_ns)
    try:
        point.validate()
    except PointError as exc:
        raise LineParseError(str(exc), 0) from None
    return point


def encode_lines(points: list[MeasurementPoint]) -> str:
    return "".join(encode_line(p) + "\n" for p in points)


# -- results document ---------------------------------------------------------


def _stats_to_doc(stats: Optional[RunStats]) -> Optional[dict]:
    if stats is None:
        return None
    return {
        "samples": stats.samples,
        "mean": stats.mean,
        "median": stats.median,
        "stddev": stats.stddev,
        "cv": stats.cv,
    }


def _stats_from_doc(doc: Optional[dict]) -> Optional[RunStats]:
    if doc is None:
        return None
    return RunStats(
        samples=[float(v) for v in doc["samples"]],
        mean=float(doc["mean"]),
        median=float(doc["median"]),
        stddev=float(doc["stddev"]),
        cv=float(doc["cv"]),
    )


def _result_to_doc(result: BenchmarkResult) -> dict:
    doc = {
        "name": result.name,
        "variant": result.variant,
        "iterations": result.iterations,
        "real_time_per_iter": result.real_time_per_iter,
        "cpu_time_per_iter": result.cpu_time_per_iter,
        "time_unit": result.time_unit.label,
        "label": result.label,
        "counters": result.counters,
        "repetitions_used": result.repetitions_used,
        "unstable": result.unstable,
        "stats": _stats_to_doc(result.stats),
    }
    if result.memory_peak_bytes is not None:
        doc["memory_peak_bytes"] = result.memory_peak_bytes
    if result.error is not None:
        doc["error"] = result.error
    return doc


def _result_from_doc(doc: dict) -> BenchmarkResult:
    return BenchmarkResult(
        name=doc["name"],
        variant=doc.get("variant", ""),
        iterations=int(doc["iterations"]),
        real_time_per_iter=float(doc["real_time_per_iter"]),
        cpu_time_per_iter=float(doc["cpu_time_per_iter"]),
        time_unit=TimeUnit.from_label(doc["time_unit"]),
        label=doc.get("label", ""),
        counters={k: float(v) for k, v in doc.get("counters", {}).items()},
        memory_peak_bytes=doc.get("memory_peak_bytes"),
        repetitions_used=int(doc["repetitions_used"]),
        unstable=bool(doc.get("unstable", False)),
        error=doc.get("error"),
        stats=_stats_from_doc(doc.get("stats")),
    )


def encode_results_file(results: list[BenchmarkResult], ctx: RunContext) -> str:
    """Lossless, deterministic document for a whole run (schema version 1)."""
    ctx.validate()
    doc = {
        "schema_version": SCHEMA_VERSION,
        "context": {
            "machine": ctx.machine,
            "commit": ctx.commit,
            "branch": ctx.branch,
            "compiler": ctx.compiler,
            "build_type": ctx.build_type,
            "timestamp_ns": ctx.timestamp_ns,
        },
        "results": [_result_to_doc(r) for r in results],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def decode_results_file(document: str) -> tuple[list[BenchmarkResult], RunContext]:
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ModelError(f"malformed results document: {exc}") from None
    version = str(doc.get("schema_version"))
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(version)
    raw_ctx = doc["context"]
    ctx = RunContext(
        machine=raw_ctx["machine"],
        commit=raw_ctx["commit"],
        branch=raw_ctx["branch"],
        compiler=raw_ctx["compiler"],
        build_type=raw_ctx["build_type"],
        timestamp_ns=int(raw_ctx["timestamp_ns"]),
    )
    ctx.validate()
    results = [_result_from_doc(r) for r in doc["results"]]
    return results, ctx
