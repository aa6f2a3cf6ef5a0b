"""Entry point for standalone benchmark suite executables.

A suite module builds a Registry and hands it to suite_main(); the resulting
executable then speaks the orchestrator protocol on stdout:

    suite --list [--filter RE]      JSON {schema_version, instances: [names]}
    suite --run-json [flags]        results document (schema version 1)
    suite [flags]                   human console table

Progress goes to stderr so stdout stays machine-readable.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .context import build_run_context
from .harness import Registry, RunnerOptions, format_console, run_benchmarks
from .model import SCHEMA_VERSION, encode_results_file


def _parse_tag(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key, value


def suite_main(registry: Registry, argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="benchmark suite executable")
    parser.add_argument("--list", action="store_true", help="print instance names as JSON")
    parser.add_argument("--run-json", action="store_true", help="print a results document")
    parser.add_argument("--filter", default=None, help="regex over instance names")
    parser.add_argument("--repetitions", type=int, default=3)
    parser.add_argument("--min-time", type=float, default=None)
    parser.add_argument("--cv-threshold", type=float, default=0.05)
    parser.add_argument("--max-reruns", type=int, default=3)
    parser.add_argument("--no-memory", action="store_true", help="skip the peak-RSS pass")
    parser.add_argument("--tag", action="append", type=_parse_tag, default=[],
                        metavar="KEY=VALUE", help="context tag override (repeatable)")
    parser.add_argument("--timestamp-ns", type=int, default=None)
    args = parser.parse_args(argv)

    instances = registry.instances(args.filter)
    if args.list:
        print(json.dumps({
            "schema_version": SCHEMA_VERSION,
            "instances": [i.name for i in instances],
        }))
        return 0
    if not instances:
        print("no benchmarks match the filter", file=sys.stderr)
        return 1

    options = RunnerOptions(
        repetitions=args.repetitions,
        cv_threshold=args.cv_threshold,
        max_reruns=args.max_reruns,
        min_time=args.min_time,
        measure_memory=not args.no_memory,
    )

    def progress(result):
        status = f"ERROR: {result.error}" if result.errored else (
            f"{result.real_time_per_iter:.3f} {result.time_unit.label}/iter"
        )
        print(f"  {result.name}: {status}", file=sys.stderr)

    results = run_benchmarks(registry, options, pattern=args.filter, progress=progress)

    if args.run_json:
        ctx = build_run_context(dict(args.tag), args.timestamp_ns, strict=False)
        sys.stdout.write(encode_results_file(results, ctx))
    else:
        sys.stdout.write(format_console(results))
    return 0
