"""Best-effort peak-RSS measurement.

Peak resident set is read from /proc/self/status (VmHWM) after resetting the
high-water mark via /proc/self/clear_refs, falling back to ru_maxrss where
/proc is unavailable. Allocator caching makes the delta an upper-noise
estimate; it is reported as a separate field and never mixed into time stats.
"""

from __future__ import annotations

from typing import Callable, Optional

_STATUS = "/proc/self/status"
_CLEAR_REFS = "/proc/self/clear_refs"


def _read_status_kb(key: str) -> Optional[int]:
    try:
        with open(_STATUS) as f:
            for line in f:
                if line.startswith(key + ":"):
                    return int(line.split()[1])
    except (OSError, ValueError, IndexError):
        return None
    return None


def current_rss_bytes() -> Optional[int]:
    kb = _read_status_kb("VmRSS")
    return kb * 1024 if kb is not None else None


def peak_rss_bytes() -> Optional[int]:
    kb = _read_status_kb("VmHWM")
    if kb is not None:
        return kb * 1024
    try:
        import resource

        return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
    except (ImportError, OSError):
        return None


def reset_peak_rss() -> bool:
    """Reset the kernel's peak-RSS high-water mark. Returns False if unsupported."""
    try:
        with open(_CLEAR_REFS, "w") as f:
            f.write("5")
        return True
    except OSError:
        return False


def measure_memory_peak(body: Callable[[], None]) -> Optional[int]:
    """Run `body` and return max(0, peak RSS during body - RSS before body).

    Returns None when the platform offers no peak-RSS facility.
    """
    reset_peak_rss()
    before = current_rss_bytes()
    body()
    peak = peak_rss_bytes()
    if before is None or peak is None:
        return None
    return max(0, peak - before)
