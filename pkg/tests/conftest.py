"""Shared fixtures: timing helpers, step-series fixture, live service."""

from __future__ import annotations

import json
import random
import socket
import threading
import time
import urllib.request

import pytest

from contbench.model import SeriesKey
from contbench.store import Series

STEP_SERIES_SEED = 20240811
STEP_INDEX = 40  # first elevated point
STEP_TAGS = {"name": "BM_Step", "machine": "m1"}


def busy_wait(seconds: float) -> None:
    deadline = time.perf_counter_ns() + int(seconds * 1e9)
    while time.perf_counter_ns() < deadline:
        pass


def step_values(scale: float = 1.0, seed: int = STEP_SERIES_SEED) -> list[float]:
    """40 points around 100 (sigma 2), then 20 points stepped +30% to ~130."""
    rng = random.Random(seed)
    values = [rng.gauss(100, 2) for _ in range(STEP_INDEX)]
    values += [rng.gauss(130, 2) for _ in range(20)]
    return [v * scale for v in values]


def step_series(scale: float = 1.0) -> Series:
    points = [
        ((i + 1) * 1_000_000_000, value)
        for i, value in enumerate(step_values(scale))
    ]
    return Series(SeriesKey.make("benchmark", dict(STEP_TAGS)), points)


def step_timestamp(index: int) -> int:
    return (index + 1) * 1_000_000_000


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def http_json(method: str, url: str, body: dict | str | None = None) -> tuple[int, dict]:
    data = None
    headers = {}
    if isinstance(body, dict):
        data = json.dumps(body).encode()
        headers["Content-Type"] = "application/json"
    elif isinstance(body, str):
        data = body.encode()
        headers["Content-Type"] = "text/plain; charset=utf-8"
    request = urllib.request.Request(url, data=data, method=method, headers=headers)
    try:
        with urllib.request.urlopen(request, timeout=30) as response:
            return response.status, json.loads(response.read())
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read())


def wait_for_health(base_url: str, timeout: float = 10.0) -> None:
    deadline = time.monotonic() + timeout
    last = None
    while time.monotonic() < deadline:
        try:
            status, _ = http_json("GET", base_url + "/healthz")
            if status == 200:
                return
        except OSError as exc:
            last = exc
        time.sleep(0.05)
    raise RuntimeError(f"service at {base_url} never became healthy: {last}")


@pytest.fixture
def live_server(tmp_path):
    """In-process API server on an ephemeral port; yields (base_url, server)."""
    from contbench.api import make_server

    server = make_server(tmp_path / "data")
    thread = threading.Thread(
        target=lambda: server.serve_forever(poll_interval=0.05), daemon=True
    )
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    try:
        yield base, server
    finally:
        server.shutdown()
        server.server_close()
