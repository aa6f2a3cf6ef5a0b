import math
import random

import pytest

from contbench.model import MeasurementPoint, SeriesKey
from contbench.store import FIELD_TAG, QuerySpec, Store, StoreError


# -- independent reference implementation --------------------------------------
#
# A flat scan over the as-written point history, kept deliberately separate
# from the store's index-based engine. Shared semantics, different code path.


def _median(values):
    ordered = sorted(values)
    n = len(ordered)
    if n % 2:
        return ordered[n // 2]
    return (ordered[n // 2 - 1] + ordered[n // 2]) / 2


def _fold(rows, aggregate):
    values = [v for _, v in rows]
    if aggregate == "mean":
        return math.fsum(values) / len(values)
    if aggregate == "median":
        return _median(values)
    if aggregate == "min":
        return min(values)
    if aggregate == "max":
        return max(values)
    if aggregate == "last":
        best = rows[0]
        for row in rows[1:]:
            if row > best:
                best = row
        return best[1]
    raise AssertionError(aggregate)


def oracle_query(history: list[MeasurementPoint], spec: QuerySpec):
    """Brute-force scan semantics; returns [(measurement, tags, points)]."""
    latest = {}
    for point in history:  # last write wins per (series, field, timestamp)
        key = tuple(sorted(point.tags.items()))
        for fname, value in point.fields.items():
            latest[(point.measurement, key, fname, point.timestamp_ns)] = value

    partitions = {}
    for (measurement, tag_items, fname, ts), value in latest.items():
        if measurement != spec.measurement:
            continue
        tags = dict(tag_items)
        if any(tags.get(k) != v for k, v in spec.tag_filters.items()):
            continue
        if not (spec.start_ns < ts <= spec.end_ns):
            continue
        group_values = tuple(tags.get(g, "") for g in spec.group_by)
        partitions.setdefault((group_values, fname), []).append((ts, value))

    out = []
    for (group_values, fname), rows in partitions.items():
        rows.sort()
        if spec.aggregate == "none":
            points = rows
        else:
            buckets = {}
            for ts, value in rows:
                buckets.setdefault((ts - spec.start_ns) // spec.bucket_ns, []).append(
                    (ts, value)
                )
            points = [
                (spec.start_ns + index * spec.bucket_ns, _fold(buckets[index], spec.aggregate))
                for index in sorted(buckets)
            ]
        tags = dict(zip(spec.group_by, group_values))
        tags[FIELD_TAG] = fname
        out.append((spec.measurement, tuple(sorted(tags.items())), points))
    out.sort(key=lambda item: (item[0], item[1]))
    return out


def engine_shape(series_list):
    return [(s.key.measurement, s.key.tags, s.points) for s in series_list]


def _point(measurement="benchmark", tags=None, fields=None, ts=1):
    return MeasurementPoint(
        measurement, tags or {"name": "BM_X"}, fields or {"real_time": 1.0}, ts
    )


class TestWrite:
    def test_accepts_valid_points(self, tmp_path):
        store = Store(tmp_path)
        result = store.write_points([_point(ts=i) for i in range(1, 4)])
        assert result.accepted == 3 and result.rejected == []

    def test_last_write_wins(self, tmp_path):
        store = Store(tmp_path)
        store.write_points([_point(ts=7, fields={"real_time": 1.0})])
        store.write_points([_point(ts=7, fields={"real_time": 2.0})])
        series = store.query(QuerySpec("benchmark", 0, 100))
        assert [s.points for s in series] == [[(7, 2.0)]]

    def test_mixed_batch_rejects_individually(self, tmp_path):
        store = Store(tmp_path)
        bad = _point(ts=5)
        bad.fields = {}  # violates non-empty fields
        result = store.write_points([_point(ts=1), bad, _point(ts=2)])
        assert result.accepted == 2
        assert len(result.rejected) == 1 and result.rejected[0][0] == 1

    def test_durability_across_reopen(self, tmp_path):
        store = Store(tmp_path)
        store.write_points([_point(ts=i, fields={"real_time": float(i)}) for i in range(1, 50)])
        before = engine_shape(store.query(QuerySpec("benchmark", 0, 100)))
        reopened = Store(tmp_path)
        assert engine_shape(reopened.query(QuerySpec("benchmark", 0, 100))) == before

    def test_on_disk_layout(self, tmp_path):
        store = Store(tmp_path)
        store.write_points([_point()])
        assert (tmp_path / "MANIFEST").exists()
        segments = sorted(p.name for p in (tmp_path / "segments").iterdir())
        assert segments == ["000001.lines"]
        first_line = (tmp_path / "segments" / "000001.lines").read_text().splitlines()[0]
        from contbench.model import decode_line

        assert decode_line(first_line) == _point()

    def test_torn_trailing_line_skipped_on_open(self, tmp_path):
        store = Store(tmp_path)
        store.write_points([_point(ts=1), _point(ts=2)])
        segment = tmp_path / "segments" / "000001.lines"
        with open(segment, "a") as f:
            f.write("benchmark,name=BM_X real_ti")  # simulated torn write
        reopened = Store(tmp_path)
        series = reopened.query(QuerySpec("benchmark", 0, 10))
        assert [ts for ts, _ in series[0].points] == [1, 2]


class TestQuerySemantics:
    def test_plain_series_in_order(self, tmp_path):
        store = Store(tmp_path)
        store.write_points([_point(ts=t) for t in (5, 1, 3, 2, 4)])
        series = store.query(QuerySpec("benchmark", 0, 10))
        assert series[0].points == [(1, 1.0), (2, 1.0), (3, 1.0), (4, 1.0), (5, 1.0)]

    def test_bucket_mean(self, tmp_path):
        store = Store(tmp_path)
        store.write_points(
            [_point(ts=t, fields={"real_time": v}) for t, v in [(1, 1.0), (2, 2.0), (3, 3.0), (4, 4.0)]]
        )
        series = store.query(
            QuerySpec("benchmark", 0, 10, aggregate="mean", bucket_ns=10)
        )
        assert series[0].points == [(0, 2.5)]

    def test_time_range_boundaries(self, tmp_path):
        store = Store(tmp_path)
        store.write_points([_point(ts=t) for t in (10, 11, 20, 21)])
        series = store.query(QuerySpec("benchmark", 10, 20))
        assert [ts for ts, _ in series[0].points] == [11, 20]

    def test_unknown_measurement_empty(self, tmp_path):
        store = Store(tmp_path)
        store.write_points([_point()])
        assert store.query(QuerySpec("nope", 0, 10)) == []

    def test_monotone_append_outside_range(self, tmp_path):
        store = Store(tmp_path)
        store.write_points([_point(ts=t) for t in (1, 2, 3)])
        spec = QuerySpec("benchmark", 0, 5)
        before = engine_shape(store.query(spec))
        store.write_points([_point(ts=t) for t in (50, 60)])
        assert engine_shape(store.query(spec)) == before

    def test_invalid_specs_rejected(self, tmp_path):
        store = Store(tmp_path)
        with pytest.raises(StoreError):
            store.query(QuerySpec("m", 10, 10))
        with pytest.raises(StoreError):
            store.query(QuerySpec("m", 0, 10, group_by=["a", "a"]))
        with pytest.raises(StoreError):
            store.query(QuerySpec("m", 0, 10, aggregate="mean"))  # no bucket_ns
        with pytest.raises(StoreError):
            store.query(QuerySpec("m", 0, 10, aggregate="p99", bucket_ns=5))

    def test_group_by_splits_series(self, tmp_path):
        store = Store(tmp_path)
        store.write_points(
            [
                _point(tags={"name": "A", "branch": "x"}, ts=1),
                _point(tags={"name": "B", "branch": "x"}, ts=1),
            ]
        )
        series = store.query(QuerySpec("benchmark", 0, 10, group_by=["name"]))
        names = [s.key.tag_dict()["name"] for s in series]
        assert names == ["A", "B"]


class TestListSeries:
    def test_empty_store(self, tmp_path):
        assert Store(tmp_path).list_series("benchmark") == []

    def test_two_series_and_filter(self, tmp_path):
        store = Store(tmp_path)
        store.write_points(
            [
                _point(tags={"name": "A", "branch": "x"}, ts=1),
                _point(tags={"name": "A", "branch": "y"}, ts=1),
            ]
        )
        assert len(store.list_series("benchmark")) == 2
        pinned = store.list_series("benchmark", {"branch": "x"})
        assert pinned == [SeriesKey.make("benchmark", {"name": "A", "branch": "x"})]


class TestCompact:
    def test_results_identical_before_and_after(self, tmp_path):
        rng = random.Random(3)
        store = Store(tmp_path)
        for _ in range(5):
            store.write_points(
                [
                    _point(
                        tags={"name": rng.choice("AB")},
                        fields={"real_time": rng.random()},
                        ts=rng.randint(1, 30),
                    )
                    for _ in range(40)
                ]
            )
        specs = [
            QuerySpec("benchmark", 0, 100),
            QuerySpec("benchmark", 0, 100, group_by=["name"]),
            QuerySpec("benchmark", 5, 25, aggregate="median", bucket_ns=7),
        ]
        before = [engine_shape(store.query(s)) for s in specs]
        store.compact()
        assert [engine_shape(store.query(s)) for s in specs] == before
        reopened = Store(tmp_path)
        assert [engine_shape(reopened.query(s)) for s in specs] == before

    def test_empty_store_noop(self, tmp_path):
        Store(tmp_path).compact()

    def test_duplicate_heavy_store_shrinks(self, tmp_path):
        store = Store(tmp_path)
        for _ in range(20):
            store.write_points([_point(ts=1, fields={"real_time": 1.0})])
        before = store.disk_bytes()
        store.compact()
        assert store.disk_bytes() < before


_TAG_KEYS = ["name", "branch", "machine", "compiler"]
_FIELD_NAMES = ["real_time", "cpu_time", "memory_peak_bytes"]


def random_point(rng):
    tags = {
        key: f"v{rng.randint(0, 3)}"
        for key in rng.sample(_TAG_KEYS, rng.randint(0, 3))
    }
    fields = {
        fname: round(rng.uniform(0.1, 1000.0), 6)
        for fname in rng.sample(_FIELD_NAMES, rng.randint(1, 3))
    }
    return MeasurementPoint(
        rng.choice(["benchmark", "other"]), tags, fields, rng.randint(1, 10**5)
    )


def random_spec(rng):
    start = rng.randint(-10, 10**5)
    end = start + rng.randint(1, 10**5)
    aggregate = rng.choice(["none", "none", "mean", "median", "min", "max", "last"])
    return QuerySpec(
        measurement=rng.choice(["benchmark", "other", "missing"]),
        start_ns=start,
        end_ns=end,
        tag_filters={
            key: f"v{rng.randint(0, 3)}"
            for key in rng.sample(_TAG_KEYS, rng.randint(0, 2))
        },
        group_by=rng.sample(_TAG_KEYS, rng.randint(0, 2)),
        aggregate=aggregate,
        bucket_ns=rng.randint(10, 10**4) if aggregate != "none" else None,
    )


class TestConcurrency:
    def test_readers_never_see_partial_batches(self, tmp_path):
        import threading

        store = Store(tmp_path)
        batch_size = 25
        stop = threading.Event()
        violations = []

        def reader():
            while not stop.is_set():
                for series in store.query(QuerySpec("benchmark", 0, 10**9, group_by=["batch"])):
                    count = len(series.points)
                    if count % batch_size:
                        violations.append((series.key, count))

        threads = [threading.Thread(target=reader) for _ in range(2)]
        for t in threads:
            t.start()
        try:
            for batch_no in range(20):
                store.write_points(
                    [
                        _point(
                            tags={"batch": str(batch_no), "i": str(i)},
                            ts=batch_no * 100 + i + 1,
                        )
                        for i in range(batch_size)
                    ]
                )
        finally:
            stop.set()
            for t in threads:
                t.join()
        assert violations == []


class TestOracleEquivalence:
    """Exact agreement between the index engine and the brute-force scan."""

    def test_ten_thousand_points_hundred_specs(self, tmp_path):
        rng = random.Random(0xC0FFEE)
        store = Store(tmp_path)
        history = []
        for _ in range(10):
            batch = [random_point(rng) for _ in range(1000)]
            history.extend(batch)
            assert store.write_points(batch).accepted == len(batch)
        for _ in range(100):
            spec = random_spec(rng)
            assert engine_shape(store.query(spec)) == oracle_query(history, spec), spec

    def test_equivalence_survives_restart(self, tmp_path):
        rng = random.Random(0xD00D)
        store = Store(tmp_path)
        history = [random_point(rng) for _ in range(500)]
        store.write_points(history)
        reopened = Store(tmp_path)
        for _ in range(20):
            spec = random_spec(rng)
            assert engine_shape(reopened.query(spec)) == oracle_query(history, spec)
