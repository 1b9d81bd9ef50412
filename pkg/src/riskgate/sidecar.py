"""Minimal HTTP scoring service embedding the engines and history store.

The service adds no scoring logic of its own: every verdict is a plain
library call over the shared store, so replaying the same request
sequence through the library yields identical results. Reads score
against the current state under a short critical section; writes are
serialized into one total order consistent with arrival.

Endpoints (JSON over HTTP/1.1):
  POST /v1/score              score without recording
  POST /v1/logins             record a legitimate login, return its verdict
  GET  /v1/users/{id}/summary history size and last-seen values
  GET  /v1/health
"""

from __future__ import annotations

import json
import math
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from riskgate.core import (
    HistoryStore,
    LoginEvent,
    OutOfOrderTimestamp,
    DuplicateEventId,
    hash_values,
    load_dataset,
)
from riskgate.engines import (
    ExtendConfig,
    RiskVerdict,
    SimpleConfig,
    score_extend,
    score_simple,
)
from riskgate.featurekit import PrefixTable, SmoothingConfig
from riskgate.featurekit.catalog import FeatureCatalog
from riskgate.featurekit.derive import enrich_event


class BadRequest(Exception):
    pass


class SidecarService:
    """Request handling decoupled from HTTP plumbing (testable directly)."""

    def __init__(self, *, catalog: FeatureCatalog,
                 lookup: PrefixTable | None = None,
                 extend_cfg: ExtendConfig | None = None,
                 simple_cfg: SimpleConfig | None = None,
                 thresholds: dict[str, float] | None = None,
                 default_engine: str = "extend",
                 hash_values_enabled: bool = False,
                 store_path: str | None = None,
                 initial_events=()):
        self.catalog = catalog
        self.lookup = lookup
        self.extend_cfg = extend_cfg or ExtendConfig()
        self.simple_cfg = simple_cfg or SimpleConfig()
        self.thresholds = {"extend": 5.0, "simple": 0.5}
        if thresholds:
            self.thresholds.update(thresholds)
        if default_engine not in ("extend", "simple"):
            raise ValueError("engine selector must be 'extend' or 'simple'")
        self.default_engine = default_engine
        self.hash_values_enabled = hash_values_enabled
        self.store_path = store_path
        self.store = HistoryStore()
        self._lock = threading.Lock()
        self._last_seen: dict[str, dict[str, str]] = {}
        self._store_header_written = False
        for event in initial_events:
            self.store.append(event)
            if event.is_legitimate:
                self._last_seen[event.user] = dict(event.features)
        if store_path and Path(store_path).exists():
            _, persisted = load_dataset(store_path)
            self._store_header_written = True
            for event in persisted:
                self.store.append(event)
                if event.is_legitimate:
                    self._last_seen[event.user] = dict(event.features)

    # -- request handling --------------------------------------------------

    def prepare_event(self, body: dict) -> tuple[LoginEvent, str]:
        if not isinstance(body, dict):
            raise BadRequest("body must be a JSON object")
        user = body.get("user")
        if not isinstance(user, str) or not user:
            raise BadRequest("field 'user' must be a non-empty string")
        features = body.get("features")
        if not isinstance(features, dict) or \
                not all(isinstance(k, str) and isinstance(v, str)
                        for k, v in features.items()):
            raise BadRequest("field 'features' must map strings to strings")
        engine = body.get("engine", self.default_engine)
        if engine not in ("extend", "simple"):
            raise BadRequest("field 'engine' must be 'extend' or 'simple'")
        ts = body.get("ts")
        if ts is None:
            last = self.store.events[-1].timestamp if len(self.store) else 0
            ts = last + 1
        if not isinstance(ts, int) or isinstance(ts, bool) or ts <= 0:
            raise BadRequest("field 'ts' must be a positive integer")
        event_id = body.get("id")
        if event_id is not None and not isinstance(event_id, str):
            raise BadRequest("field 'id' must be a string")
        event = LoginEvent(user=user, timestamp=ts, features=dict(features),
                           event_id=event_id)
        event = enrich_event(event, self.catalog, self.lookup)
        if self.hash_values_enabled:
            event = hash_values(event)
        return event, engine

    def _verdict(self, event: LoginEvent, engine: str) -> RiskVerdict:
        view = self.store.view()
        threshold = float(self.thresholds[engine])
        if engine == "extend":
            return score_extend(view, event.user, event.features,
                                self.extend_cfg, self.catalog, threshold)
        return score_simple(view, event.user, event.features,
                            event.timestamp, self.simple_cfg, threshold)

    def handle_score(self, body: dict) -> tuple[int, dict]:
        event, engine = self.prepare_event(body)
        with self._lock:
            verdict = self._verdict(event, engine)
        return 200, self._verdict_body(verdict, engine)

    def handle_login(self, body: dict) -> tuple[int, dict]:
        event, engine = self.prepare_event(body)
        with self._lock:
            verdict = self._verdict(event, engine)
            try:
                self.store.append(event)
            except OutOfOrderTimestamp as exc:
                return 409, {"error": str(exc)}
            except DuplicateEventId as exc:
                return 409, {"error": f"duplicate event id: {exc}"}
            self._last_seen[event.user] = dict(event.features)
            try:
                self._persist(event)
            except OSError as exc:
                return 503, {"error": f"store unavailable: {exc}"}
        return 200, self._verdict_body(verdict, engine)

    def handle_summary(self, user: str) -> tuple[int, dict]:
        with self._lock:
            view = self.store.view()
            count = view.user_login_count(user)
            if count == 0:
                return 404, {"error": f"unknown user {user!r}"}
            last_seen = dict(self._last_seen.get(user, {}))
        return 200, {"user": user, "loginCount": count,
                     "lastSeen": last_seen}

    def handle_health(self) -> tuple[int, dict]:
        return 200, {"status": "ok", "events": len(self.store),
                     "engine": self.default_engine}

    def _verdict_body(self, verdict: RiskVerdict, engine: str) -> dict:
        body = {
            "score": verdict.score,
            "threshold": verdict.threshold,
            "decision": verdict.decision.value,
            "contributions": dict(verdict.contributions),
            "engine": engine,
        }
        if verdict.match_ratio is not None:
            body["matchRatio"] = verdict.match_ratio
        return body

    def _persist(self, event: LoginEvent) -> None:
        if not self.store_path:
            return
        row: dict[str, object] = {"user": event.user, "ts": event.timestamp,
                                  "label": event.label}
        if event.event_id is not None:
            row["id"] = event.event_id
        for name, value in event.features.items():
            row["f." + name] = value
        with open(self.store_path, "a", encoding="utf-8") as fh:
            if not self._store_header_written:
                header = {"schemaVersion": 1,
                          "featureNames": sorted(event.features),
                          "userCount": 0}
                fh.write(json.dumps(header, sort_keys=True) + "\n")
                self._store_header_written = True
            fh.write(json.dumps(row, sort_keys=True) + "\n")


class _Handler(BaseHTTPRequestHandler):
    server_version = "riskgate"

    def log_message(self, fmt, *args):  # quiet by default
        pass

    @property
    def service(self) -> SidecarService:
        return self.server.service  # type: ignore[attr-defined]

    def _reply(self, status: int, body: dict) -> None:
        payload = json.dumps(body, sort_keys=True).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length) if length else b""
        try:
            return json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise BadRequest(f"malformed JSON body: {exc}")

    def do_POST(self):
        try:
            body = self._read_body()
            if self.path == "/v1/score":
                status, reply = self.service.handle_score(body)
            elif self.path == "/v1/logins":
                status, reply = self.service.handle_login(body)
            else:
                status, reply = 404, {"error": "no such endpoint"}
        except BadRequest as exc:
            status, reply = 400, {"error": str(exc)}
        self._reply(status, reply)

    def do_GET(self):
        if self.path == "/v1/health":
            status, reply = self.service.handle_health()
        elif self.path.startswith("/v1/users/") and \
                self.path.endswith("/summary"):
            user = self.path[len("/v1/users/"):-len("/summary")]
            status, reply = self.service.handle_summary(user)
        else:
            status, reply = 404, {"error": "no such endpoint"}
        self._reply(status, reply)


def make_server(service: SidecarService, host: str = "127.0.0.1",
                port: int = 0) -> ThreadingHTTPServer:
    server = ThreadingHTTPServer((host, port), _Handler)
    server.service = service  # type: ignore[attr-defined]
    return server


def serve_forever(cfg: dict, catalog: FeatureCatalog, events,
                  lookup: PrefixTable | None, addr: str) -> int:
    side = cfg["sidecar"]
    smoothing = SmoothingConfig(
        alpha_user=cfg["engine"]["smoothing"]["alphaUser"],
        beta_global=cfg["engine"]["smoothing"]["betaGlobal"])
    service = SidecarService(
        catalog=catalog, lookup=lookup,
        extend_cfg=ExtendConfig(
            feature_set=tuple(cfg["engine"]["extendFeatureSet"]),
            smoothing=smoothing),
        simple_cfg=SimpleConfig(
            variant="IPUA",
            last_login_window_days=cfg["engine"]["lastLoginWindowDays"]),
        thresholds=side.get("thresholds"),
        default_engine=side["engine"],
        hash_values_enabled=bool(side["hashValues"]),
        store_path=os.environ.get("RISKGATE_STORE") or side.get("storePath"),
        initial_events=events)
    host, _, port = addr.partition(":")
    server = make_server(service, host or "127.0.0.1", int(port or 0))
    bound = server.socket.getsockname()
    print(f"riskgate sidecar listening on {bound[0]}:{bound[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


if __name__ == "__main__":
    raise SystemExit("start the sidecar via: riskgate serve --config <path>")
