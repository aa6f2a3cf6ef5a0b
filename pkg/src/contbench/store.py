"""Embedded time-series storage and query engine.

Points are appended to wire-format segment files under `segments/` and indexed
in memory (rebuilt on open); a MANIFEST file lists live segments. Writes are
serialized and durable (fsync) before returning; queries run under the same
lock and therefore always observe whole batches.
"""

from __future__ import annotations

import logging
import os
import statistics
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .model import (
    LineParseError,
    MeasurementPoint,
    ModelError,
    SCHEMA_VERSION,
    SeriesKey,
    decode_line,
    encode_line,
)

logger = logging.getLogger(__name__)

FIELD_TAG = "_field"  # reserved tag carrying the field name on query results

AGGREGATES = ("none", "mean", "median", "min", "max", "last")


class StoreError(Exception):
    pass


@dataclass
class QuerySpec:
    """Filter + time range + optional grouping/bucketed aggregation.

    The time range is lower-exclusive, upper-inclusive: start_ns < ts <= end_ns.
    """

    measurement: str
    start_ns: int
    end_ns: int
    tag_filters: dict[str, str] = field(default_factory=dict)
    group_by: list[str] = field(default_factory=list)
    aggregate: str = "none"
    bucket_ns: Optional[int] = None

    def validate(self) -> None:
        if not self.measurement:
            raise StoreError("query needs a measurement")
        if self.start_ns >= self.end_ns:
            raise StoreError(
                f"query needs start_ns < end_ns, got ({self.start_ns}, {self.end_ns})"
            )
        if len(set(self.group_by)) != len(self.group_by):
            raise StoreError("group_by keys must be distinct")
        if self.aggregate not in AGGREGATES:
            raise StoreError(f"unknown aggregate: {self.aggregate!r}")
        if self.aggregate != "none":
            if self.bucket_ns is None:
                raise StoreError("bucket_ns is required when aggregating")
            if self.bucket_ns <= 0:
                raise StoreError(f"bucket_ns must be > 0, got {self.bucket_ns}")


@dataclass
class Series:
    key: SeriesKey
    points: list[tuple[int, float]]


@dataclass
class WriteResult:
    accepted: int
    rejected: list[tuple[int, str]] = field(default_factory=list)


def _fold(rows: list[tuple[int, float]], aggregate: str) -> float:
    values = [v for _, v in rows]
    if aggregate == "mean":
        return statistics.fmean(values)
    if aggregate == "median":
        return statistics.median(values)
    if aggregate == "min":
        return min(values)
    if aggregate == "max":
        return max(values)
    if aggregate == "last":
        return max(rows)[1]  # max (timestamp, value) pair
    raise StoreError(f"unknown aggregate: {aggregate!r}")


class Store:
    """Single-directory store; one writer at a time, consistent reads."""

    def __init__(self, data_dir: str | os.PathLike):
        self._dir = Path(data_dir)
        self._segments_dir = self._dir / "segments"
        self._manifest_path = self._dir / "MANIFEST"
        self._lock = threading.RLock()
        # key -> field -> {timestamp_ns: value}; assignment gives last-write-wins
        self._index: dict[SeriesKey, dict[str, dict[int, float]]] = {}
        self._segments: list[str] = []
        self._active: Optional[str] = None
        self._open()

    # -- lifecycle ---------------------------------------------------------

    def _open(self) -> None:
        self._segments_dir.mkdir(parents=True, exist_ok=True)
        if self._manifest_path.exists():
            import json

            manifest = json.loads(self._manifest_path.read_text())
            version = str(manifest.get("schema_version"))
            if version != SCHEMA_VERSION:
                raise StoreError(f"unknown store schema version: {version!r}")
            self._segments = list(manifest.get("segments", []))
        else:
            self._write_manifest()
        for name in self._segments:
            self._load_segment(name)

    def _load_segment(self, name: str) -> None:
        path = self._segments_dir / name
        if not path.exists():
            logger.warning("segment listed in MANIFEST but missing: %s", name)
            return
        with open(path, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    point = decode_line(line)
                except LineParseError as exc:
                    # Torn trailing writes are expected after a crash.
                    logger.warning("skipping bad line %s:%d: %s", name, lineno, exc)
                    continue
                self._index_point(point)

    def _write_manifest(self) -> None:
        import json

        tmp = self._manifest_path.with_suffix(".tmp")
        tmp.write_text(
            json.dumps(
                {"schema_version": SCHEMA_VERSION, "segments": self._segments},
                indent=2,
            )
            + "\n"
        )
        with open(tmp, "rb") as f:
            os.fsync(f.fileno())
        os.replace(tmp, self._manifest_path)

    def _next_segment_name(self) -> str:
        highest = 0
        for name in self._segments:
            try:
                highest = max(highest, int(name.split(".", 1)[0]))
            except ValueError:
                continue
        return f"{highest + 1:06d}.lines"

    def _ensure_active_segment(self) -> Path:
        if self._active is None:
            name = self._next_segment_name()
            path = self._segments_dir / name
            path.touch()
            self._segments.append(name)
            self._write_manifest()
            self._active = name
        return self._segments_dir / self._active

    def close(self) -> None:
        """Appends are already durable; nothing buffered to flush."""

    # -- writes --------------------------------------------------------------

    def _index_point(self, point: MeasurementPoint) -> None:
        key = point.series_key()
        fields = self._index.setdefault(key, {})
        for fname, value in point.fields.items():
            fields.setdefault(fname, {})[point.timestamp_ns] = value

    def write_points(self, points: list[MeasurementPoint]) -> WriteResult:
        """Append points durably; invalid points are rejected individually."""
        accepted: list[tuple[MeasurementPoint, str]] = []
        rejected: list[tuple[int, str]] = []
        for idx, point in enumerate(points):
            try:
                accepted.append((point, encode_line(point)))
            except ModelError as exc:
                rejected.append((idx, str(exc)))
        if not accepted:
            return WriteResult(0, rejected)
        data = "".join(line + "\n" for _, line in accepted).encode("utf-8")
        with self._lock:
            path = self._ensure_active_segment()
            with open(path, "ab") as f:
                offset = f.tell()
                try:
                    f.write(data)
                    f.flush()
                    os.fsync(f.fileno())
                except OSError as exc:
                    try:
                        f.truncate(offset)
                    except OSError:
                        pass
                    raise StoreError(f"segment append failed: {exc}") from exc
            for point, _ in accepted:
                self._index_point(point)
        return WriteResult(len(accepted), rejected)

    # -- queries ---------------------------------------------------------------

    @staticmethod
    def _matches(key: SeriesKey, measurement: str, tag_filters: dict[str, str]) -> bool:
        if key.measurement != measurement:
            return False
        tags = key.tag_dict()
        return all(tags.get(k) == v for k, v in tag_filters.items())

    def query(self, spec: QuerySpec) -> list[Series]:
        """Reference semantics: filter, partition by (group tags, field), bucket.

        Within a partition, points from different source series can coincide;
        ordering is by (timestamp, value) and the `last` aggregate takes the
        max (timestamp, value) pair, so results are deterministic.
        """
        spec.validate()
        with self._lock:
            partitions: dict[tuple[tuple[str, ...], str], list[tuple[int, float]]] = {}
            for key, fields in self._index.items():
                if not self._matches(key, spec.measurement, spec.tag_filters):
                    continue
                tags = key.tag_dict()
                group_values = tuple(tags.get(g, "") for g in spec.group_by)
                for fname, ts_map in fields.items():
                    rows = partitions.setdefault((group_values, fname), [])
                    for ts, value in ts_map.items():
                        if spec.start_ns < ts <= spec.end_ns:
                            rows.append((ts, value))

            out = []
            for (group_values, fname), rows in partitions.items():
                if not rows:
                    continue
                rows.sort()
                if spec.aggregate == "none":
                    points = rows
                else:
                    buckets: dict[int, list[tuple[int, float]]] = {}
                    for ts, value in rows:
                        buckets.setdefault((ts - spec.start_ns) // spec.bucket_ns, []).append(
                            (ts, value)
                        )
                    points = [
                        (
                            spec.start_ns + k * spec.bucket_ns,
                            _fold(buckets[k], spec.aggregate),
                        )
                        for k in sorted(buckets)
                    ]
                tags = dict(zip(spec.group_by, group_values))
                tags[FIELD_TAG] = fname
                out.append(Series(SeriesKey.make(spec.measurement, tags), points))
            out.sort(key=lambda s: s.key)
            return out

    def list_series(
        self, measurement: str, tag_filters: Optional[dict[str, str]] = None
    ) -> list[SeriesKey]:
        """Distinct stored series keys with at least one matching point."""
        tag_filters = tag_filters or {}
        with self._lock:
            keys = [
                key
                for key, fields in self._index.items()
                if self._matches(key, measurement, tag_filters)
                and any(fields.values())
            ]
            return sorted(keys)

    def iter_field_series(
        self, measurement: str, tag_filters: Optional[dict[str, str]], fname: str
    ) -> list[tuple[SeriesKey, list[tuple[int, float]]]]:
        """Full-tag series for one field, points sorted by timestamp."""
        tag_filters = tag_filters or {}
        with self._lock:
            out = []
            for key in sorted(self._index):
                if not self._matches(key, measurement, tag_filters):
                    continue
                ts_map = self._index[key].get(fname)
                if ts_map:
                    out.append((key, sorted(ts_map.items())))
            return out

    # -- maintenance -------------------------------------------------------------

    def compact(self) -> None:
        """Merge segments, dropping overwritten duplicates; queries unchanged."""
        with self._lock:
            if not self._segments:
                return
            merged: dict[tuple[SeriesKey, int], dict[str, float]] = {}
            for key, fields in self._index.items():
                for fname, ts_map in fields.items():
                    for ts, value in ts_map.items():
                        merged.setdefault((key, ts), {})[fname] = value
            name = self._next_segment_name()
            final = self._segments_dir / name
            tmp = final.with_suffix(".tmp")
            try:
                with open(tmp, "w", encoding="utf-8") as f:
                    for key, ts in sorted(merged):
                        point = MeasurementPoint(
                            key.measurement, key.tag_dict(), merged[(key, ts)], ts
                        )
                        f.write(encode_line(point) + "\n")
                    f.flush()
                    os.fsync(f.fileno())
                os.replace(tmp, final)
            except OSError as exc:
                tmp.unlink(missing_ok=True)
                raise StoreError(f"compaction failed: {exc}") from exc
            old = [s for s in self._segments]
            self._segments = [name]
            self._active = None
            self._write_manifest()
            for stale in old:
                if stale != name:
                    (self._segments_dir / stale).unlink(missing_ok=True)

    def disk_bytes(self) -> int:
        with self._lock:
            return sum(
                (self._segments_dir / name).stat().st_size
                for name in self._segments
                if (self._segments_dir / name).exists()
            )
