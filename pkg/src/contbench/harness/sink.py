"""Optimization barrier: force a computed value to be externally observed."""

from __future__ import annotations

from typing import Any

# Module-level box so the store cannot be proven dead by any optimizer.
_observed: list[Any] = [None]


def sink(value: Any) -> None:
    """Treat `value` as observed so the computation producing it is kept.

    Under CPython this is a plain store; its purpose is to pin benchmark
    results against dead-code elimination on optimizing runtimes (JITs,
    future CPython tiers) and to make the data dependency explicit.
    """
    _observed[0] = value
