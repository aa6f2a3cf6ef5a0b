"""Run-context tag detection: machine, commit, branch, compiler, build type."""

from __future__ import annotations

import platform
import socket
import subprocess
import time
from typing import Optional

from .model import RunContext

_CONTEXT_KEYS = ("machine", "commit", "branch", "compiler", "build_type")


def _git(*args: str) -> Optional[str]:
    try:
        out = subprocess.run(
            ["git", *args], capture_output=True, text=True, timeout=5
        )
    except (OSError, subprocess.TimeoutExpired):
        return None
    value = out.stdout.strip()
    return value if out.returncode == 0 and value else None


def default_context_tags() -> dict[str, Optional[str]]:
    """Environment-detected tag values; commit/branch are None outside git."""
    return {
        "machine": socket.gethostname(),
        "commit": _git("rev-parse", "--short", "HEAD"),
        "branch": _git("rev-parse", "--abbrev-ref", "HEAD"),
        "compiler": platform.python_compiler().replace(" ", "-") or "unknown",
        "build_type": "release",
    }


def build_run_context(
    overrides: dict[str, str],
    timestamp_ns: Optional[int] = None,
    *,
    strict: bool = True,
) -> RunContext:
    """Merge detected tags with overrides into a validated RunContext.

    With strict=True, undetectable tags (typically commit/branch outside a git
    checkout) must come from overrides; otherwise they fall back to "unknown".
    """
    unknown = [k for k in overrides if k not in _CONTEXT_KEYS]
    if unknown:
        raise ValueError(
            f"unknown context tag(s) {unknown}; expected one of {list(_CONTEXT_KEYS)}"
        )
    tags = default_context_tags()
    tags.update({k: v for k, v in overrides.items() if v})
    missing = [k for k in _CONTEXT_KEYS if not tags.get(k)]
    if missing:
        if strict:
            raise ValueError(
                "cannot detect context tag(s) "
                + ", ".join(missing)
                + "; pass --tag "
                + " --tag ".join(f"{k}=..." for k in missing)
            )
        for key in missing:
            tags[key] = "unknown"
    return RunContext(
        machine=tags["machine"],
        commit=tags["commit"],
        branch=tags["branch"],
        compiler=tags["compiler"],
        build_type=tags["build_type"],
        timestamp_ns=timestamp_ns if timestamp_ns is not None else time.time_ns(),
    )
