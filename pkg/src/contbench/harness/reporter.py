"""Console and CSV rendering of benchmark results."""

from __future__ import annotations

import io

from .runner import BenchmarkResult


def _fmt_time(value: float, unit_label: str) -> str:
    return f"{value:.3f} {unit_label}"


def format_console(results: list[BenchmarkResult]) -> str:
    """Fixed-width table: name, real time, CPU time, iterations, label, counters."""
    rows = []
    for r in results:
        if r.errored:
            rows.append((r.name, "ERROR", r.error or "", "", "", ""))
            continue
        counters = " ".join(f"{k}={v:g}" for k, v in sorted(r.counters.items()))
        rows.append(
            (
                r.name,
                _fmt_time(r.real_time_per_iter, r.time_unit.label),
                _fmt_time(r.cpu_time_per_iter, r.time_unit.label),
                str(r.iterations),
                r.label,
                counters + (" (unstable)" if r.unstable else ""),
            )
        )
    headers = ("Benchmark", "Time", "CPU", "Iterations", "Label", "Counters")
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    out = io.StringIO()
    rule = "-" * (sum(widths) + 2 * (len(widths) - 1))
    out.write(rule + "\n")
    out.write(
        "  ".join(
            h.ljust(widths[i]) if i == 0 else h.rjust(widths[i])
            for i, h in enumerate(headers)
        ).rstrip()
        + "\n"
    )
    out.write(rule + "\n")
    for row in rows:
        out.write(
            "  ".join(
                cell.ljust(widths[i]) if i == 0 else cell.rjust(widths[i])
                for i, cell in enumerate(row)
            ).rstrip()
            + "\n"
        )
    return out.getvalue()


def format_csv(results: list[BenchmarkResult]) -> str:
    """Flat CSV rows; counters are collapsed into one space-joined column."""
    out = io.StringIO()
    out.write(
        "name,real_time_per_iter,cpu_time_per_iter,time_unit,iterations,"
        "repetitions_used,label,memory_peak_bytes,unstable,counters,error\n"
    )
    for r in results:
        counters = " ".join(f"{k}={v:g}" for k, v in sorted(r.counters.items()))
        cells = [
            r.name,
            f"{r.real_time_per_iter:.6f}" if not r.errored else "",
            f"{r.cpu_time_per_iter:.6f}" if not r.errored else "",
            r.time_unit.label,
            str(r.iterations),
            str(r.repetitions_used),
            r.label,
            "" if r.memory_peak_bytes is None else str(r.memory_peak_bytes),
            str(r.unstable).lower(),
            counters,
            r.error or "",
        ]
        out.write(",".join(_csv_escape(c) for c in cells) + "\n")
    return out.getvalue()


def _csv_escape(cell: str) -> str:
    if any(ch in cell for ch in ',"\n'):
        return '"' + cell.replace('"', '""') + '"'
    return cell
