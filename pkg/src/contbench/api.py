"""HTTP service: write, query, annotations, dashboards, snapshots, alerts.

The service is the seam between the measurement pipeline and visualization:
everything a client can learn goes through the store and the catalogs kept in
the data directory, so any dashboard state is reconstructible. Single node, no
accounts; an optional shared token is checked on /api/v1/* when configured.
"""

from __future__ import annotations

import json
import logging
import os
import re
import threading
import time
import uuid
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qs, urlparse

from .detector import Annotation, DetectionPolicy, Direction, detect
from .model import LineParseError, decode_line
from .store import QuerySpec, Series, Store, StoreError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"

_RELATIVE_TIME = re.compile(r"^now(?:-(\d+)([smhd]))?$")
_UNIT_NS = {"s": 10**9, "m": 60 * 10**9, "h": 3600 * 10**9, "d": 86400 * 10**9}


def parse_time(text: str, now_ns: int) -> int:
    """Absolute nanoseconds, or the relative forms "now" and "now-<N><s|m|h|d>"."""
    text = text.strip()
    match = _RELATIVE_TIME.match(text)
    if match:
        if match.group(1) is None:
            return now_ns
        return now_ns - int(match.group(1)) * _UNIT_NS[match.group(2)]
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"bad time value: {text!r}") from None


# -- dashboards ---------------------------------------------------------------


@dataclass
class Variable:
    """Dashboard variable; options are the distinct values of one tag key."""

    name: str
    measurement: str
    tag_key: str
    tags: dict[str, str] = field(default_factory=dict)


@dataclass
class Panel:
    id: str
    title: str
    display: str = "timeseries"  # timeseries | table | stat
    query: dict = field(default_factory=dict)
    # query: {measurement, tags (values may be "$variable"), group_by,
    #         aggregate, bucket_ns}


@dataclass
class Dashboard:
    id: str
    title: str
    variables: list[Variable] = field(default_factory=list)
    panels: list[Panel] = field(default_factory=list)
    default_time_range: dict = field(default_factory=lambda: {"from": "now-30d", "to": "now"})

    def validate(self) -> None:
        panel_ids = [p.id for p in self.panels]
        if len(set(panel_ids)) != len(panel_ids):
            raise ValueError("panel ids must be unique within a dashboard")
        declared = {v.name for v in self.variables}
        for panel in self.panels:
            if panel.display not in ("timeseries", "table", "stat"):
                raise ValueError(f"unknown panel display: {panel.display!r}")
            for value in (panel.query.get("tags") or {}).values():
                if isinstance(value, str) and value.startswith("$"):
                    name = value[1:]
                    if name not in declared:
                        raise ValueError(f"undeclared variable: {name}")

    def to_doc(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "variables": [
                {
                    "name": v.name,
                    "measurement": v.measurement,
                    "tag_key": v.tag_key,
                    "tags": v.tags,
                }
                for v in self.variables
            ],
            "panels": [
                {"id": p.id, "title": p.title, "display": p.display, "query": p.query}
                for p in self.panels
            ],
            "default_time_range": self.default_time_range,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "Dashboard":
        dashboard = cls(
            id=str(doc.get("id") or uuid.uuid4().hex[:10]),
            title=str(doc.get("title", "")),
            variables=[
                Variable(
                    name=str(v["name"]),
                    measurement=str(v.get("measurement", "benchmark")),
                    tag_key=str(v["tag_key"]),
                    tags={str(k): str(val) for k, val in (v.get("tags") or {}).items()},
                )
                for v in doc.get("variables", [])
            ],
            panels=[
                Panel(
                    id=str(p["id"]),
                    title=str(p.get("title", "")),
                    display=str(p.get("display", "timeseries")),
                    query=dict(p.get("query") or {}),
                )
                for p in doc.get("panels", [])
            ],
            default_time_range=dict(
                doc.get("default_time_range") or {"from": "now-30d", "to": "now"}
            ),
        )
        dashboard.validate()
        return dashboard


# -- persisted catalogs ---------------------------------------------------------


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    with open(tmp, "rb") as f:
        os.fsync(f.fileno())
    os.replace(tmp, path)


class AnnotationCatalog:
    """Annotations persisted next to the store, not as time-series points."""

    def __init__(self, data_dir: str | os.PathLike):
        self._path = Path(data_dir) / "annotations.json"
        self._lock = threading.RLock()
        self._annotations: dict[int, Annotation] = {}
        self._next_id = 1
        if self._path.exists():
            doc = json.loads(self._path.read_text(encoding="utf-8"))
            self._next_id = int(doc.get("next_id", 1))
            for raw in doc.get("annotations", []):
                annotation = annotation_from_doc(raw)
                self._annotations[annotation.id] = annotation

    def _save(self) -> None:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "next_id": self._next_id,
            "annotations": [
                annotation_to_doc(a)
                for a in sorted(self._annotations.values(), key=lambda a: a.id)
            ],
        }
        _atomic_write(self._path, json.dumps(doc, indent=2, sort_keys=True) + "\n")

    def create(self, annotation: Annotation) -> Annotation:
        annotation.validate()
        with self._lock:
            annotation.id = self._next_id
            self._next_id += 1
            if not annotation.created_ns:
                annotation.created_ns = time.time_ns()
            self._annotations[annotation.id] = annotation
            self._save()
            return annotation

    def delete(self, annotation_id: int) -> bool:
        with self._lock:
            if annotation_id not in self._annotations:
                return False
            del self._annotations[annotation_id]
            self._save()
            return True

    def all(self) -> list[Annotation]:
        with self._lock:
            return sorted(self._annotations.values(), key=lambda a: a.id)

    def list(
        self,
        start_ns: Optional[int] = None,
        end_ns: Optional[int] = None,
        measurement: Optional[str] = None,
        series_tags: Optional[dict[str, str]] = None,
    ) -> list[Annotation]:
        """Annotations overlapping the range and applicable to the series tags."""
        out = []
        for a in self.all():
            if measurement is not None and a.measurement != measurement:
                continue
            if start_ns is not None and a.end_ns < start_ns:
                continue
            if end_ns is not None and a.start_ns > end_ns:
                continue
            if series_tags is not None and not all(
                series_tags.get(k) == v for k, v in a.tags.items()
            ):
                continue
            out.append(a)
        return out


def annotation_to_doc(a: Annotation) -> dict:
    return {
        "id": a.id,
        "measurement": a.measurement,
        "tags": a.tags,
        "start_ns": a.start_ns,
        "end_ns": a.end_ns,
        "kind": a.kind,
        "text": a.text,
        "author": a.author,
        "created_ns": a.created_ns,
    }


def annotation_from_doc(doc: dict) -> Annotation:
    annotation = Annotation(
        measurement=str(doc["measurement"]),
        start_ns=int(doc["start_ns"]),
        end_ns=int(doc["end_ns"]),
        kind=str(doc.get("kind", "note")),
        tags={str(k): str(v) for k, v in (doc.get("tags") or {}).items()},
        text=str(doc.get("text", "")),
        author=str(doc.get("author", "")),
        created_ns=int(doc.get("created_ns", 0)),
        id=int(doc["id"]) if doc.get("id") is not None else None,
    )
    annotation.validate()
    return annotation


class DashboardCatalog:
    def __init__(self, data_dir: str | os.PathLike):
        self._path = Path(data_dir) / "dashboards.json"
        self._lock = threading.RLock()
        self._dashboards: dict[str, Dashboard] = {}
        if self._path.exists():
            doc = json.loads(self._path.read_text(encoding="utf-8"))
            for raw in doc.get("dashboards", []):
                dashboard = Dashboard.from_doc(raw)
                self._dashboards[dashboard.id] = dashboard

    def _save(self) -> None:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "dashboards": [
                d.to_doc() for d in sorted(self._dashboards.values(), key=lambda d: d.id)
            ],
        }
        _atomic_write(self._path, json.dumps(doc, indent=2, sort_keys=True) + "\n")

    def create(self, dashboard: Dashboard) -> Dashboard:
        dashboard.validate()
        with self._lock:
            self._dashboards[dashboard.id] = dashboard
            self._save()
            return dashboard

    def update(self, dashboard: Dashboard) -> bool:
        dashboard.validate()
        with self._lock:
            if dashboard.id not in self._dashboards:
                return False
            self._dashboards[dashboard.id] = dashboard
            self._save()
            return True

    def delete(self, dashboard_id: str) -> bool:
        with self._lock:
            if dashboard_id not in self._dashboards:
                return False
            del self._dashboards[dashboard_id]
            self._save()
            return True

    def get(self, dashboard_id: str) -> Optional[Dashboard]:
        with self._lock:
            return self._dashboards.get(dashboard_id)

    def all(self) -> list[Dashboard]:
        with self._lock:
            return sorted(self._dashboards.values(), key=lambda d: d.id)


class SnapshotCatalog:
    """Self-contained snapshot documents, one file per id, served verbatim."""

    def __init__(self, data_dir: str | os.PathLike):
        self._dir = Path(data_dir) / "snapshots"
        self._dir.mkdir(parents=True, exist_ok=True)

    def put(self, snapshot_id: str, document: str) -> None:
        _atomic_write(self._dir / f"{snapshot_id}.json", document)

    def get(self, snapshot_id: str) -> Optional[str]:
        path = self._dir / f"{snapshot_id}.json"
        if not path.exists() or not snapshot_id or "/" in snapshot_id:
            return None
        return path.read_text(encoding="utf-8")


# -- service ----------------------------------------------------------------


class _ServiceContext:
    def __init__(
        self,
        data_dir: str | os.PathLike,
        token: Optional[str],
        alert_policy: Optional[DetectionPolicy],
        ui_dir: Optional[str],
    ):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.store = Store(self.data_dir)
        self.annotations = AnnotationCatalog(self.data_dir)
        self.dashboards = DashboardCatalog(self.data_dir)
        self.snapshots = SnapshotCatalog(self.data_dir)
        self.token = token
        self.alert_policy = alert_policy or DetectionPolicy()
        self.ui_dir = Path(ui_dir) if ui_dir else None


class _HttpError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


def _series_to_doc(series: Series) -> dict:
    return {
        "measurement": series.key.measurement,
        "tags": series.key.tag_dict(),
        "points": [[ts, value] for ts, value in series.points],
    }


_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
    ".map": "application/json",
}


class _Handler(BaseHTTPRequestHandler):
    context: _ServiceContext  # set on the subclass by make_server
    protocol_version = "HTTP/1.1"

    # -- plumbing ---------------------------------------------------------

    def log_message(self, fmt, *args):  # noqa: N802
        logger.debug("%s %s", self.address_string(), fmt % args)

    def _body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length else b""

    def _json_body(self) -> dict:
        raw = self._body()
        if not raw:
            return {}
        try:
            doc = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise _HttpError(400, f"malformed JSON body: {exc}")
        if not isinstance(doc, dict):
            raise _HttpError(400, "JSON body must be an object")
        return doc

    def _send(self, status: int, payload: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        if self.command != "HEAD":
            self.wfile.write(payload)

    def _send_json(self, status: int, doc: dict) -> None:
        doc.setdefault("schema_version", SCHEMA_VERSION)
        self._send(status, json.dumps(doc).encode("utf-8"), "application/json")

    def _send_error_json(self, status: int, message: str) -> None:
        self._send_json(status, {"error": message})

    def _params(self) -> dict[str, list[str]]:
        return parse_qs(urlparse(self.path).query, keep_blank_values=True)

    def _param(self, params, name: str, default: Optional[str] = None) -> Optional[str]:
        values = params.get(name)
        return values[0] if values else default

    def _tag_filters(self, params) -> dict[str, str]:
        return {
            key[4:]: values[0]
            for key, values in params.items()
            if key.startswith("tag.") and values
        }

    def _check_auth(self) -> bool:
        if self.context.token is None:
            return True
        return self.headers.get("Authorization") == f"Bearer {self.context.token}"

    # -- dispatch ----------------------------------------------------------

    def _route(self, method: str) -> None:
        path = urlparse(self.path).path
        try:
            if path == "/healthz" and method == "GET":
                self._send_json(200, {"status": "ok"})
                return
            if path.startswith("/api/"):
                if not self._check_auth():
                    self._send_error_json(401, "missing or bad token")
                    return
                self._route_api(method, path)
                return
            if method == "GET":
                self._serve_static(path)
                return
            self._send_error_json(404, f"no route for {method} {path}")
        except _HttpError as exc:
            self._send_error_json(exc.status, exc.message)
        except (StoreError, ValueError) as exc:
            self._send_error_json(400, str(exc))
        except BrokenPipeError:
            pass
        except Exception as exc:  # pragma: no cover - defensive
            logger.exception("request failed: %s %s", method, path)
            self._send_error_json(500, f"internal error: {exc}")

    def _route_api(self, method: str, path: str) -> None:
        if path == "/api/v1/write" and method == "POST":
            self._handle_write()
        elif path == "/api/v1/query" and method == "GET":
            self._handle_query()
        elif path == "/api/v1/annotations":
            self._handle_annotations(method)
        elif path == "/api/v1/dashboards":
            self._handle_dashboards(method)
        elif path == "/api/v1/snapshots" and method == "POST":
            self._handle_snapshot_create()
        elif path.startswith("/api/v1/snapshots/") and method == "GET":
            self._handle_snapshot_get(path.rsplit("/", 1)[1])
        elif path == "/api/v1/alerts" and method == "GET":
            self._handle_alerts()
        else:
            self._send_error_json(404, f"no route for {method} {path}")

    def do_GET(self):  # noqa: N802
        self._route("GET")

    def do_HEAD(self):  # noqa: N802
        self._route("GET")

    def do_POST(self):  # noqa: N802
        self._route("POST")

    def do_PUT(self):  # noqa: N802
        self._route("PUT")

    def do_DELETE(self):  # noqa: N802
        self._route("DELETE")

    # -- handlers -----------------------------------------------------------

    def _handle_write(self) -> None:
        try:
            text = self._body().decode("utf-8")
        except UnicodeDecodeError as exc:
            raise _HttpError(400, f"body is not UTF-8: {exc}")
        points = []
        rejected = []
        for lineno, line in enumerate(text.split("\n"), start=1):
            if not line.strip():
                continue
            try:
                points.append(decode_line(line))
            except LineParseError as exc:
                rejected.append({"line": lineno, "error": str(exc)})
        try:
            result = self.context.store.write_points(points)
        except StoreError as exc:
            self._send_error_json(500, str(exc))
            return
        self._send_json(
            200, {"accepted": result.accepted, "rejected": rejected}
        )

    def _query_spec_from_params(self, params) -> QuerySpec:
        measurement = self._param(params, "measurement")
        if not measurement:
            raise _HttpError(400, "missing parameter: measurement")
        now = time.time_ns()
        start = parse_time(self._param(params, "start", "0"), now)
        end = parse_time(self._param(params, "end", "now"), now)
        group_by = [
            g for g in (self._param(params, "group_by", "") or "").split(",") if g
        ]
        bucket_raw = self._param(params, "bucket_ns")
        spec = QuerySpec(
            measurement=measurement,
            start_ns=start,
            end_ns=end,
            tag_filters=self._tag_filters(params),
            group_by=group_by,
            aggregate=self._param(params, "aggregate", "none"),
            bucket_ns=int(bucket_raw) if bucket_raw else None,
        )
        spec.validate()
        return spec

    def _handle_query(self) -> None:
        params = self._params()
        spec = self._query_spec_from_params(params)
        series = self.context.store.query(spec)
        self._send_json(200, {"series": [_series_to_doc(s) for s in series]})

    def _handle_annotations(self, method: str) -> None:
        catalog = self.context.annotations
        if method == "POST":
            doc = self._json_body()
            doc.pop("id", None)
            try:
                annotation = annotation_from_doc({**doc, "id": None})
            except (KeyError, ValueError, TypeError) as exc:
                raise _HttpError(400, f"bad annotation: {exc}")
            annotation = catalog.create(annotation)
            self._send_json(200, {"annotation": annotation_to_doc(annotation)})
        elif method == "GET":
            params = self._params()
            now = time.time_ns()
            start = self._param(params, "start")
            end = self._param(params, "end")
            tags = self._tag_filters(params)
            annotations = catalog.list(
                start_ns=parse_time(start, now) if start else None,
                end_ns=parse_time(end, now) if end else None,
                measurement=self._param(params, "measurement"),
                series_tags=tags if tags else None,
            )
            self._send_json(
                200, {"annotations": [annotation_to_doc(a) for a in annotations]}
            )
        elif method == "DELETE":
            raw = self._param(self._params(), "id")
            if raw is None:
                raise _HttpError(400, "missing parameter: id")
            try:
                annotation_id = int(raw)
            except ValueError:
                raise _HttpError(400, f"bad annotation id: {raw!r}")
            if catalog.delete(annotation_id):
                self._send_json(200, {"deleted": annotation_id})
            else:
                self._send_error_json(404, f"no annotation with id {annotation_id}")
        else:
            self._send_error_json(404, f"no route for {method} /api/v1/annotations")

    def _handle_dashboards(self, method: str) -> None:
        catalog = self.context.dashboards
        params = self._params()
        if method == "POST":
            try:
                dashboard = Dashboard.from_doc(self._json_body())
            except (KeyError, ValueError, TypeError) as exc:
                raise _HttpError(400, f"bad dashboard: {exc}")
            catalog.create(dashboard)
            self._send_json(200, {"dashboard": dashboard.to_doc()})
        elif method == "GET":
            dashboard_id = self._param(params, "id")
            if dashboard_id is None:
                self._send_json(
                    200, {"dashboards": [d.to_doc() for d in catalog.all()]}
                )
                return
            dashboard = catalog.get(dashboard_id)
            if dashboard is None:
                self._send_error_json(404, f"no dashboard with id {dashboard_id!r}")
                return
            options = {
                v.name: self._variable_options(v) for v in dashboard.variables
            }
            self._send_json(
                200, {"dashboard": dashboard.to_doc(), "variable_options": options}
            )
        elif method == "PUT":
            doc = self._json_body()
            if not doc.get("id"):
                raise _HttpError(400, "dashboard update needs an id")
            try:
                dashboard = Dashboard.from_doc(doc)
            except (KeyError, ValueError, TypeError) as exc:
                raise _HttpError(400, f"bad dashboard: {exc}")
            if catalog.update(dashboard):
                self._send_json(200, {"dashboard": dashboard.to_doc()})
            else:
                self._send_error_json(404, f"no dashboard with id {dashboard.id!r}")
        elif method == "DELETE":
            dashboard_id = self._param(params, "id")
            if dashboard_id is None:
                raise _HttpError(400, "missing parameter: id")
            if catalog.delete(dashboard_id):
                self._send_json(200, {"deleted": dashboard_id})
            else:
                self._send_error_json(404, f"no dashboard with id {dashboard_id!r}")
        else:
            self._send_error_json(404, f"no route for {method} /api/v1/dashboards")

    def _variable_options(self, variable: Variable) -> list[str]:
        keys = self.context.store.list_series(variable.measurement, variable.tags)
        options = sorted(
            {
                key.tag_dict()[variable.tag_key]
                for key in keys
                if variable.tag_key in key.tag_dict()
            }
        )
        return options

    def _handle_snapshot_create(self) -> None:
        body = self._json_body()
        dashboard_id = body.get("dashboard_id")
        if not dashboard_id:
            raise _HttpError(400, "missing field: dashboard_id")
        dashboard = self.context.dashboards.get(str(dashboard_id))
        if dashboard is None:
            raise _HttpError(404, f"no dashboard with id {dashboard_id!r}")
        now = time.time_ns()
        start = parse_time(str(body.get("start", "now-30d")), now)
        end = parse_time(str(body.get("end", "now")), now)
        provided = {
            str(k): str(v) for k, v in (body.get("variables") or {}).items()
        }
        selections: dict[str, str] = {}
        for variable in dashboard.variables:
            if variable.name in provided:
                selections[variable.name] = provided[variable.name]
                continue
            options = self._variable_options(variable)
            if not options:
                raise _HttpError(400, f"unresolved variable: {variable.name}")
            selections[variable.name] = options[0]

        panels = []
        for panel in dashboard.panels:
            template = panel.query
            tags = {}
            for key, value in (template.get("tags") or {}).items():
                if isinstance(value, str) and value.startswith("$"):
                    name = value[1:]
                    if name not in selections:
                        raise _HttpError(400, f"unresolved variable: {name}")
                    tags[key] = selections[name]
                else:
                    tags[key] = str(value)
            spec = QuerySpec(
                measurement=str(template.get("measurement", "benchmark")),
                start_ns=start,
                end_ns=end,
                tag_filters=tags,
                group_by=list(template.get("group_by") or []),
                aggregate=str(template.get("aggregate", "none")),
                bucket_ns=template.get("bucket_ns"),
            )
            spec.validate()
            series = self.context.store.query(spec)
            panels.append(
                {
                    "panel_id": panel.id,
                    "title": panel.title,
                    "display": panel.display,
                    "series": [_series_to_doc(s) for s in series],
                }
            )

        snapshot_id = uuid.uuid4().hex[:12]
        doc = {
            "schema_version": SCHEMA_VERSION,
            "id": snapshot_id,
            "created_ns": now,
            "dashboard": dashboard.to_doc(),
            "time_range": {"start_ns": start, "end_ns": end},
            "variables": selections,
            "panels": panels,
        }
        document = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        self.context.snapshots.put(snapshot_id, document)
        self._send_json(
            200, {"id": snapshot_id, "url": f"/api/v1/snapshots/{snapshot_id}"}
        )

    def _handle_snapshot_get(self, snapshot_id: str) -> None:
        document = self.context.snapshots.get(snapshot_id)
        if document is None:
            self._send_error_json(404, f"no snapshot with id {snapshot_id!r}")
            return
        self._send(200, document.encode("utf-8"), "application/json")

    def _handle_alerts(self) -> None:
        params = self._params()
        now = time.time_ns()
        measurement = self._param(params, "measurement", "benchmark")
        fname = self._param(params, "field", "real_time")
        start = parse_time(self._param(params, "start", "0"), now)
        end = parse_time(self._param(params, "end", "now"), now)
        defaults = self.context.alert_policy
        direction_raw = self._param(
            params, "direction", defaults.direction_metric.value
        )
        try:
            direction = Direction(direction_raw)
        except ValueError:
            raise _HttpError(400, f"bad direction: {direction_raw!r}")
        policy = DetectionPolicy(
            window=int(self._param(params, "window", str(defaults.window))),
            min_rel_change=float(
                self._param(params, "min_rel_change", str(defaults.min_rel_change))
            ),
            noise_factor=float(
                self._param(params, "noise_factor", str(defaults.noise_factor))
            ),
            direction_metric=direction,
        )
        policy.validate()
        suppressed_raw = self._param(params, "suppressed")
        annotations = self.context.annotations.all()
        events = []
        for key, points in self.context.store.iter_field_series(
            measurement, self._tag_filters(params), fname
        ):
            windowed = [(ts, v) for ts, v in points if start < ts <= end]
            for event in detect(Series(key, windowed), policy, annotations):
                if suppressed_raw is not None:
                    wanted = suppressed_raw.lower() in ("1", "true", "yes")
                    if event.suppressed != wanted:
                        continue
                events.append(
                    {
                        "measurement": event.series.measurement,
                        "tags": event.series.tag_dict(),
                        "field": fname,
                        "timestamp_ns": event.timestamp_ns,
                        "baseline": event.baseline,
                        "observed": event.observed,
                        "rel_change": event.rel_change,
                        "threshold_used": event.threshold_used,
                        "kind": event.kind,
                        "suppressed": event.suppressed,
                    }
                )
        self._send_json(200, {"events": events})

    # -- static UI -----------------------------------------------------------

    def _serve_static(self, path: str) -> None:
        ui_dir = self.context.ui_dir
        if ui_dir is None:
            if path == "/":
                self._send(
                    200,
                    b"contbench service (no UI bundle configured; see /api/v1/*)\n",
                    "text/plain; charset=utf-8",
                )
                return
            self._send_error_json(404, f"no route for GET {path}")
            return
        relative = path.lstrip("/")
        candidate = (ui_dir / relative).resolve() if relative else ui_dir / "index.html"
        root = ui_dir.resolve()
        if relative and not str(candidate).startswith(str(root)):
            self._send_error_json(404, "not found")
            return
        if relative and candidate.is_file():
            target = candidate
        elif "." not in Path(relative).name:
            target = root / "index.html"  # SPA routes like /d/<id>, /s/<id>
        else:
            self._send_error_json(404, f"no such file: {path}")
            return
        if not target.is_file():
            self._send_error_json(404, f"no such file: {path}")
            return
        content_type = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        self._send(200, target.read_bytes(), content_type)


def make_server(
    data_dir: str | os.PathLike,
    address: tuple[str, int] = ("127.0.0.1", 0),
    *,
    token: Optional[str] = None,
    alert_policy: Optional[DetectionPolicy] = None,
    ui_dir: Optional[str] = None,
) -> ThreadingHTTPServer:
    """Build the HTTP service bound to `address` (port 0 picks a free port)."""
    context = _ServiceContext(data_dir, token, alert_policy, ui_dir)

    class Handler(_Handler):
        pass

    Handler.context = context
    server = ThreadingHTTPServer(address, Handler)
    server.daemon_threads = True
    server.context = context  # type: ignore[attr-defined]
    return server
