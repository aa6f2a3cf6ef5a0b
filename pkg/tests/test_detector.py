import random

import pytest

from contbench.detector import (
    Annotation,
    DetectionPolicy,
    Direction,
    compare_runs,
    compute_baseline,
    detect,
    effective_threshold,
    format_comparison,
)
from contbench.harness import BenchmarkResult, TimeUnit
from contbench.model import SeriesKey
from contbench.store import Series

from conftest import STEP_INDEX, STEP_TAGS, step_series, step_timestamp

POLICY = DetectionPolicy(window=10, min_rel_change=0.10, noise_factor=3.0)


def _series(values, tags=None):
    return Series(
        SeriesKey.make("benchmark", tags or {"name": "BM_X"}),
        [((i + 1) * 10, float(v)) for i, v in enumerate(values)],
    )


def _annotation(start, end, kind="false_positive", tags=None):
    return Annotation(
        measurement="benchmark",
        tags=tags if tags is not None else {},
        start_ns=start,
        end_ns=end,
        kind=kind,
    )


class TestEffectiveThreshold:
    def test_quiet_series_keeps_floor(self):
        assert effective_threshold(0.02, POLICY) == 0.10  # max(0.10, 0.06)

    def test_noisy_series_widens(self):
        assert effective_threshold(0.05, POLICY) == pytest.approx(0.15)

    def test_zero_cv_is_exactly_floor(self):
        assert effective_threshold(0.0, POLICY) == POLICY.min_rel_change


class TestComputeBaseline:
    def test_constant_window(self):
        series = _series([100.0] * 6)
        baseline, cv = compute_baseline(series, 5, DetectionPolicy(window=5))
        assert baseline == 100.0 and cv == 0.0

    def test_median_robust_to_spike(self):
        series = _series([100, 100, 100, 100, 200, 100])
        baseline, _ = compute_baseline(series, 5, DetectionPolicy(window=5))
        assert baseline == 100

    def test_insufficient_history(self):
        series = _series([100.0] * 5)
        assert compute_baseline(series, 1, DetectionPolicy(window=10)) is None

    def test_annotated_points_ineligible(self):
        series = _series([100, 100, 999, 100, 100, 100])
        annotation = _annotation(30, 30)  # covers the 999 at ts=30
        baseline, cv = compute_baseline(
            series, 5, DetectionPolicy(window=5), [annotation]
        )
        assert baseline == 100 and cv == 0


class TestDetect:
    def test_constant_series_silent(self):
        assert detect(_series([100.0] * 20), POLICY) == []

    def test_step_series_fires_exactly_once_at_step(self):
        events = detect(step_series(), POLICY)
        assert len(events) == 1
        event = events[0]
        assert event.timestamp_ns == step_timestamp(STEP_INDEX)
        assert event.kind == "regression"
        assert not event.suppressed
        assert 0.2 <= event.rel_change <= 0.4
        assert event.threshold_used >= POLICY.min_rel_change
        assert event.baseline > 0

    def test_annotation_suppresses_without_cascade(self):
        ts = step_timestamp(STEP_INDEX)
        annotation = _annotation(ts, ts, tags=dict(STEP_TAGS))
        events = detect(step_series(), POLICY, [annotation])
        assert [e.suppressed for e in events] == [True]

    def test_note_annotations_do_not_suppress(self):
        ts = step_timestamp(STEP_INDEX)
        annotation = _annotation(ts, ts, kind="note", tags=dict(STEP_TAGS))
        events = detect(step_series(), POLICY, [annotation])
        assert [e.suppressed for e in events] == [False]

    def test_annotation_selector_must_match_series(self):
        ts = step_timestamp(STEP_INDEX)
        other = _annotation(ts, ts, tags={"name": "BM_Other"})
        events = detect(step_series(), POLICY, [other])
        assert [e.suppressed for e in events] == [False]

    @pytest.mark.parametrize("scale", [0.001, 1.0, 1e6])
    def test_scale_invariance(self, scale):
        reference = [
            (e.timestamp_ns, e.kind, e.suppressed) for e in detect(step_series(), POLICY)
        ]
        scaled = [
            (e.timestamp_ns, e.kind, e.suppressed)
            for e in detect(step_series(scale), POLICY)
        ]
        assert scaled == reference

    def test_improvement_direction(self):
        values = [100.0] * 15 + [60.0] * 5
        events = detect(_series(values), POLICY)
        assert [e.kind for e in events] == ["improvement"]
        lower_is_worse = DetectionPolicy(
            window=10, direction_metric=Direction.LOWER_IS_WORSE
        )
        events = detect(_series(values), lower_is_worse)
        assert [e.kind for e in events] == ["regression"]

    def test_below_floor_changes_ignored(self):
        values = [100.0] * 15 + [105.0] * 5  # +5% < 10% floor
        assert detect(_series(values), POLICY) == []

    def test_determinism(self):
        series = step_series()
        assert detect(series, POLICY) == detect(series, POLICY)

    def test_suppression_monotone_for_flagged_points(self):
        # Annotating a flagged spike never increases unsuppressed events
        # (the triage workflow: users mark fired alerts as false positives).
        rng = random.Random(99)
        for _ in range(50):
            values = [rng.gauss(100, 2) for _ in range(rng.randint(15, 30))]
            spike_at = rng.randint(12, len(values) - 1)
            values[spike_at] *= rng.choice([1.5, 2.0, 5.0])
            series = _series(values)
            baseline_events = detect(series, POLICY)
            unsuppressed_before = sum(1 for e in baseline_events if not e.suppressed)
            for event in baseline_events:
                annotated = detect(
                    series,
                    POLICY,
                    [_annotation(event.timestamp_ns, event.timestamp_ns)],
                )
                unsuppressed_after = sum(1 for e in annotated if not e.suppressed)
                assert unsuppressed_after <= unsuppressed_before


def _result(name, real=100.0, cpu=100.0, error=None):
    return BenchmarkResult(
        name=name,
        iterations=10,
        real_time_per_iter=real,
        cpu_time_per_iter=cpu,
        time_unit=TimeUnit.US,
        repetitions_used=1,
        error=error,
    )


class TestCompareRuns:
    def test_regression_at_thirty_percent(self):
        comparison = compare_runs(
            [_result("BM_X", real=100.0, cpu=100.0)],
            [_result("BM_X", real=130.0, cpu=100.0)],
            0.10,
        )
        regressions = comparison.regressions
        assert len(regressions) == 1
        assert regressions[0].metric == "real_time"
        assert abs(regressions[0].rel_change - 0.30) <= 1e-12

    def test_small_change_unchanged(self):
        comparison = compare_runs(
            [_result("BM_X", real=100.0)],
            [_result("BM_X", real=105.0)],
            0.10,
        )
        assert {r.verdict for r in comparison.rows} == {"unchanged"}

    def test_only_in_new_listed_as_added(self):
        comparison = compare_runs([], [_result("BM_New")], 0.10)
        assert comparison.added == ["BM_New"]
        assert comparison.rows == []

    def test_only_in_old_listed_as_removed(self):
        comparison = compare_runs([_result("BM_Old")], [], 0.10)
        assert comparison.removed == ["BM_Old"]

    def test_improvement_verdict(self):
        comparison = compare_runs(
            [_result("BM_X", cpu=100.0)], [_result("BM_X", cpu=80.0)], 0.10
        )
        assert any(r.verdict == "improvement" and r.metric == "cpu_time" for r in comparison.rows)

    def test_errored_results_excluded(self):
        comparison = compare_runs(
            [_result("BM_X", error="boom")], [_result("BM_X")], 0.10
        )
        assert comparison.rows == [] and comparison.errored == ["BM_X"]

    def test_identical_runs_have_no_regressions(self):
        results = [_result("BM_A"), _result("BM_B")]
        comparison = compare_runs(results, results, 0.10)
        assert comparison.regressions == []
        text = format_comparison(comparison)
        assert "BM_A" in text and "unchanged" in text
