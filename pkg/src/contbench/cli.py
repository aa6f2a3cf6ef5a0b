"""Command-line pipeline orchestration.

Subcommands mirror the measurement flow: `run` drives suite executables and
optionally uploads their points, `compare` gates one run against another,
`detect` scans stored history for regressions, `serve` hosts the HTTP service,
and `query` reads series back from a running service.

Exit codes: 0 ok; 1 operational error; 2 regression verdict (compare/detect).
"""

from __future__ import annotations

import argparse
import json
import os
import signal
import subprocess
import sys
import time
import urllib.error
import urllib.parse
import urllib.request
from pathlib import Path
from typing import Optional

from .api import make_server
from .context import build_run_context
from .detector import (
    Annotation,
    DetectionPolicy,
    Direction,
    compare_runs,
    detect,
    format_comparison,
)
from .harness import format_console, format_csv
from .model import (
    ModelError,
    decode_results_file,
    encode_lines,
    results_to_points,
)
from .store import Series, Store

UPLOAD_URL_ENV = "CONTBENCH_UPLOAD_URL"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REGRESSION = 2


class CliError(Exception):
    pass


def _parse_tag(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key, value


def _http(
    method: str,
    url: str,
    body: Optional[bytes] = None,
    timeout: float = 60.0,
) -> tuple[int, object]:
    request = urllib.request.Request(url, data=body, method=method)
    if body is not None:
        request.add_header("Content-Type", "text/plain; charset=utf-8")
    try:
        with urllib.request.urlopen(request, timeout=timeout) as response:
            raw = response.read()
            status = response.status
    except urllib.error.HTTPError as exc:
        raw = exc.read()
        status = exc.code
    except (urllib.error.URLError, OSError) as exc:
        raise CliError(f"cannot reach {url}: {exc}") from None
    try:
        return status, json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        return status, raw.decode("utf-8", "replace")


# -- run -----------------------------------------------------------------------


def _suite_command(suite: Optional[str]) -> list[str]:
    if suite is None:
        return [sys.executable, "-m", "contbench.suites.demo"]
    return [sys.executable, suite]


def _run_child(command: list[str]) -> str:
    child = subprocess.run(command, capture_output=True, text=True)
    if child.stderr:
        sys.stderr.write(child.stderr)
    if child.returncode != 0:
        raise CliError(f"suite exited with status {child.returncode}")
    return child.stdout


def cmd_run(args: argparse.Namespace) -> int:
    base = _suite_command(args.suite)
    filter_flags = ["--filter", args.filter] if args.filter else []
    status = EXIT_OK

    listing = _run_child(base + ["--list"] + filter_flags)
    try:
        instances = json.loads(listing).get("instances", [])
    except json.JSONDecodeError as exc:
        raise CliError(f"suite --list produced malformed output: {exc}")
    if not instances:
        raise CliError(f"no benchmarks match filter {args.filter!r}")

    overrides = dict(args.tag)
    ctx = build_run_context(overrides, timestamp_ns=time.time_ns(), strict=True)

    command = base + ["--run-json"] + filter_flags
    command += ["--repetitions", str(args.repetitions)]
    if args.min_time is not None:
        command += ["--min-time", str(args.min_time)]
    for key, value in ctx.tags().items():
        command += ["--tag", f"{key}={value}"]
    command += ["--timestamp-ns", str(ctx.timestamp_ns)]

    document = _run_child(command)
    try:
        results, ctx = decode_results_file(document)
    except ModelError as exc:
        raise CliError(f"suite produced an undecodable results document: {exc}")

    if args.format == "json":
        rendered = document
    elif args.format == "csv":
        rendered = format_csv(results)
    else:
        rendered = format_console(results)

    if args.out:
        Path(args.out).write_text(rendered, encoding="utf-8")
        sys.stdout.write(format_console(results))
        print(f"wrote {len(results)} result(s) to {args.out}")
    else:
        sys.stdout.write(rendered)

    upload_url = args.upload or os.environ.get(UPLOAD_URL_ENV)
    if upload_url:
        points = results_to_points(results, ctx)
        body = encode_lines(points).encode("utf-8")
        http_status, doc = _http(
            "POST", upload_url.rstrip("/") + "/api/v1/write", body
        )
        if http_status != 200:
            print(f"upload failed with HTTP {http_status}: {doc}", file=sys.stderr)
            status = EXIT_ERROR
        else:
            rejected = doc.get("rejected", []) if isinstance(doc, dict) else []
            if rejected:
                print(f"upload rejected {len(rejected)} point(s): {rejected}", file=sys.stderr)
                status = EXIT_ERROR
            else:
                print(f"uploaded {doc.get('accepted', 0)} point(s) to {upload_url}")

    errored = [r.name for r in results if r.errored]
    if errored:
        print(f"{len(errored)} benchmark(s) errored: {', '.join(errored)}", file=sys.stderr)
        status = EXIT_ERROR
    return status


# -- compare --------------------------------------------------------------------


def _load_results(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}")
    try:
        return decode_results_file(text)
    except ModelError as exc:
        raise CliError(f"cannot decode {path}: {exc}")


def cmd_compare(args: argparse.Namespace) -> int:
    old_results, _ = _load_results(args.old)
    new_results, _ = _load_results(args.new)
    comparison = compare_runs(old_results, new_results, args.threshold)
    sys.stdout.write(format_comparison(comparison))
    if args.json_out:
        Path(args.json_out).write_text(
            json.dumps(comparison.to_doc(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    return EXIT_REGRESSION if comparison.regressions else EXIT_OK


# -- detect ----------------------------------------------------------------------


def _print_events(events: list[dict]) -> None:
    if not events:
        print("no events")
        return
    header = f"{'Series':<60} {'Kind':<12} {'Change':>9} {'Suppressed':>10}"
    print(header)
    print("-" * len(header))
    for event in events:
        tags = ",".join(f"{k}={v}" for k, v in sorted(event["tags"].items()))
        series = f"{event['measurement']},{tags}"
        print(
            f"{series:<60} {event['kind']:<12} {event['rel_change']:>+8.1%} "
            f"{str(event['suppressed']).lower():>10}"
        )


def cmd_detect(args: argparse.Namespace) -> int:
    policy = DetectionPolicy(
        window=args.window,
        min_rel_change=args.min_rel_change,
        noise_factor=args.noise_factor,
        direction_metric=Direction(args.direction),
    )
    policy.validate()
    tag_filters = dict(args.tag)

    if args.url:
        params = {
            "measurement": args.measurement,
            "field": args.field,
            "window": str(policy.window),
            "min_rel_change": str(policy.min_rel_change),
            "noise_factor": str(policy.noise_factor),
            "direction": policy.direction_metric.value,
        }
        for key, value in tag_filters.items():
            params[f"tag.{key}"] = value
        query = urllib.parse.urlencode(params)
        status, doc = _http(
            "GET", args.url.rstrip("/") + "/api/v1/alerts?" + query
        )
        if status != 200 or not isinstance(doc, dict):
            raise CliError(f"alerts request failed with HTTP {status}: {doc}")
        events = doc.get("events", [])
    else:
        from .api import AnnotationCatalog  # local import: api pulls http.server

        store = Store(args.data_dir)
        annotations = AnnotationCatalog(args.data_dir).all()
        events = []
        for key, points in store.iter_field_series(
            args.measurement, tag_filters, args.field
        ):
            for event in detect(Series(key, points), policy, annotations):
                events.append(
                    {
                        "measurement": event.series.measurement,
                        "tags": event.series.tag_dict(),
                        "field": args.field,
                        "timestamp_ns": event.timestamp_ns,
                        "baseline": event.baseline,
                        "observed": event.observed,
                        "rel_change": event.rel_change,
                        "threshold_used": event.threshold_used,
                        "kind": event.kind,
                        "suppressed": event.suppressed,
                    }
                )

    _print_events(events)
    firing = [e for e in events if e["kind"] == "regression" and not e["suppressed"]]
    return EXIT_REGRESSION if firing else EXIT_OK


# -- serve ----------------------------------------------------------------------


def _parse_listen(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep:
        raise CliError(f"bad --listen value {text!r}; expected HOST:PORT")
    try:
        return host or "127.0.0.1", int(port)
    except ValueError:
        raise CliError(f"bad port in --listen value {text!r}")


def cmd_serve(args: argparse.Namespace) -> int:
    address = _parse_listen(args.listen)
    policy = DetectionPolicy(
        window=args.window,
        min_rel_change=args.min_rel_change,
        noise_factor=args.noise_factor,
    )
    try:
        server = make_server(
            args.data_dir,
            address,
            token=args.token,
            alert_policy=policy,
            ui_dir=args.ui_dir,
        )
    except OSError as exc:
        raise CliError(f"cannot listen on {args.listen}: {exc}")
    host, port = server.server_address[:2]
    print(f"serving on http://{host}:{port} (data: {args.data_dir})", flush=True)

    def _terminate(_signum, _frame):
        raise SystemExit(EXIT_OK)

    signal.signal(signal.SIGTERM, _terminate)
    try:
        server.serve_forever(poll_interval=0.2)
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
        server.context.store.close()  # type: ignore[attr-defined]
    return EXIT_OK


# -- query -----------------------------------------------------------------------


def cmd_query(args: argparse.Namespace) -> int:
    params = {
        "measurement": args.measurement,
        "start": args.start,
        "end": args.end,
        "aggregate": args.aggregate,
    }
    if args.group_by:
        params["group_by"] = args.group_by
    if args.bucket_ns:
        params["bucket_ns"] = str(args.bucket_ns)
    for key, value in dict(args.tag).items():
        params[f"tag.{key}"] = value
    url = args.url.rstrip("/") + "/api/v1/query?" + urllib.parse.urlencode(params)
    status, doc = _http("GET", url)
    if status != 200 or not isinstance(doc, dict):
        raise CliError(f"query failed with HTTP {status}: {doc}")
    if args.format == "json":
        print(json.dumps(doc, indent=2, sort_keys=True))
        return EXIT_OK
    for series in doc.get("series", []):
        tags = ",".join(f"{k}={v}" for k, v in sorted(series["tags"].items()))
        print(f"{series['measurement']},{tags}")
        for ts, value in series["points"]:
            print(f"  {ts}  {value}")
    if not doc.get("series"):
        print("no series")
    return EXIT_OK


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contbench",
        description="continuous benchmarking pipeline: run, store, detect, serve",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a benchmark suite executable")
    run.add_argument("--suite", default=None, help="path to a suite script (default: bundled demo)")
    run.add_argument("--filter", default=None, help="regex over instance names")
    run.add_argument("--repetitions", type=int, default=3)
    run.add_argument("--min-time", type=float, default=None)
    run.add_argument("--format", choices=("console", "json", "csv"), default="console")
    run.add_argument("--out", default=None, help="write results to this path")
    run.add_argument("--upload", default=None,
                     help=f"service base URL (fallback: ${UPLOAD_URL_ENV})")
    run.add_argument("--tag", action="append", type=_parse_tag, default=[],
                     metavar="KEY=VALUE", help="context tag override (repeatable)")
    run.set_defaults(func=cmd_run)

    compare = sub.add_parser("compare", help="compare two results files")
    compare.add_argument("old")
    compare.add_argument("new")
    compare.add_argument("--threshold", type=float, default=0.10)
    compare.add_argument("--json-out", default=None)
    compare.set_defaults(func=cmd_compare)

    det = sub.add_parser("detect", help="scan stored series for regressions")
    target = det.add_mutually_exclusive_group(required=True)
    target.add_argument("--url", default=None, help="service base URL")
    target.add_argument("--data-dir", default=None, help="open a store directly")
    det.add_argument("--measurement", default="benchmark")
    det.add_argument("--field", default="real_time")
    det.add_argument("--tag", action="append", type=_parse_tag, default=[],
                     metavar="KEY=VALUE", help="series tag filter (repeatable)")
    det.add_argument("--window", type=int, default=10)
    det.add_argument("--min-rel-change", type=float, default=0.10)
    det.add_argument("--noise-factor", type=float, default=3.0)
    det.add_argument("--direction", choices=[d.value for d in Direction],
                     default=Direction.HIGHER_IS_WORSE.value)
    det.set_defaults(func=cmd_detect)

    serve = sub.add_parser("serve", help="serve the HTTP API (and optional UI)")
    serve.add_argument("--data-dir", required=True)
    serve.add_argument("--listen", default="127.0.0.1:8980")
    serve.add_argument("--token", default=None)
    serve.add_argument("--ui-dir", default=None, help="static dashboard bundle to serve at /")
    serve.add_argument("--window", type=int, default=10)
    serve.add_argument("--min-rel-change", type=float, default=0.10)
    serve.add_argument("--noise-factor", type=float, default=3.0)
    serve.set_defaults(func=cmd_serve)

    query = sub.add_parser("query", help="query series from a running service")
    query.add_argument("--url", required=True)
    query.add_argument("--measurement", default="benchmark")
    query.add_argument("--start", default="now-6h")
    query.add_argument("--end", default="now")
    query.add_argument("--tag", action="append", type=_parse_tag, default=[],
                       metavar="KEY=VALUE")
    query.add_argument("--group-by", default=None, help="comma-separated tag keys")
    query.add_argument("--aggregate", default="none")
    query.add_argument("--bucket-ns", type=int, default=None)
    query.add_argument("--format", choices=("console", "json"), default="console")
    query.set_defaults(func=cmd_query)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
