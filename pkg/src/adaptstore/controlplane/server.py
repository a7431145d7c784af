"""HTTP/JSON control plane over one live simulation.

A dedicated thread owns the simulation; HTTP handlers never touch
simulation state directly. Every mutation and every state read is
marshaled through a single command queue and executed between simulation
slices, so API responses are always consistent snapshots. Pacing maps sim
time to wall time (paused, realtime at a factor, or fast-forward).

Event streaming is server-sent events: each event-log record is published
to every subscriber; a subscriber that falls more than the buffer bound
behind is dropped.

Headless scenario runs requested over the API build a fresh, isolated
simulation in the request thread, which is why their reports are
byte-identical to CLI runs.
"""
from __future__ import annotations

import json
import queue
import re
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

from adaptstore.adaptation.conditions import QoSPolicy
from adaptstore.adaptation.engine import MapeEngine
from adaptstore.scenarios import (
    BUILTIN_NAMES,
    ScenarioScript,
    UnknownScenarioError,
    builtin_scenario,
    parse_fault,
    run_scenario,
    stage_scenario,
)
from adaptstore.simnet import UnknownFaultError
from adaptstore.variability import (
    Configuration,
    UnsatisfiableRequestError,
    parse_dimension_value,
)
from adaptstore.world import World

SUBSCRIBER_BUFFER = 1024
SLICE_MS = 100

_FALLBACK_PAGE = b"""<!doctype html>
<html><head><title>adaptstore control plane</title></head>
<body><h1>adaptstore control plane</h1>
<p>No operator console build found. API endpoints:</p>
<ul>
<li>GET /api/config, /api/state, /api/metrics, /api/scenarios</li>
<li>GET /api/events (server-sent events)</li>
<li>POST /api/reconfigure, /api/faults, /api/sim/pace, /api/scenarios/{name}/run</li>
<li>DELETE /api/faults/{id}</li>
</ul></body></html>
"""


def default_console_dir() -> Optional[Path]:
    candidate = Path(__file__).resolve().parents[3] / "frontend" / "dist"
    return candidate if candidate.is_dir() else None


class _Command:
    def __init__(self, fn):
        self.fn = fn
        self.done = threading.Event()
        self.result = None
        self.error: Optional[BaseException] = None

    def run(self):
        try:
            self.result = self.fn()
        except BaseException as exc:  # surfaced to the calling request thread
            self.error = exc
        finally:
            self.done.set()


class SimRunner:
    """Owns the simulation thread, the command queue, and SSE fan-out."""

    def __init__(
        self,
        config: Configuration,
        seed: int,
        policy: QoSPolicy | None = None,
        scenario: ScenarioScript | None = None,
    ):
        self.world = World(scenario.initial_config if scenario else config, seed)
        self.engine = MapeEngine(self.world, policy)
        self.engine.start()
        if scenario is not None:
            # Live mode: the script's traffic and injections are staged on
            # the clock and unfold at whatever pace the operator selects.
            stage_scenario(self.world, self.engine, scenario, seed)
        self.commands: "queue.Queue[_Command]" = queue.Queue()
        self.pace_mode = "paused"
        self.pace_factor = 1.0
        self._anchor_sim = 0
        self._anchor_wall = time.monotonic()
        self._subscribers: list[queue.Queue] = []
        self._subscribers_lock = threading.Lock()
        self._publish_cursor = 0
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._loop, name="simloop", daemon=True)

    def start(self):
        self._thread.start()

    def stop(self):
        self._stop.set()
        self._thread.join(timeout=5)

    # -- called from request threads ------------------------------------------

    def submit(self, fn):
        command = _Command(fn)
        self.commands.put(command)
        if not command.done.wait(timeout=10):
            raise TimeoutError("simulation loop unresponsive")
        if command.error is not None:
            raise command.error
        return command.result

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=SUBSCRIBER_BUFFER)
        with self._subscribers_lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue):
        with self._subscribers_lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    # -- simulation thread ---------------------------------------------------------

    def set_pace(self, mode: str, factor: float = 1.0):
        if mode not in ("paused", "realtime", "fast_forward"):
            raise ValueError(f"unknown pace mode {mode!r}")
        if factor <= 0:
            raise ValueError("factor must be positive")
        self.pace_mode = mode
        self.pace_factor = factor
        self._anchor_sim = self.world.sim.now
        self._anchor_wall = time.monotonic()

    def _loop(self):
        while not self._stop.is_set():
            try:
                command = self.commands.get(timeout=0.02)
            except queue.Empty:
                command = None
            while command is not None:
                command.run()
                try:
                    command = self.commands.get_nowait()
                except queue.Empty:
                    command = None

            sim = self.world.sim
            if self.pace_mode == "realtime":
                elapsed_wall_ms = (time.monotonic() - self._anchor_wall) * 1000.0
                target = self._anchor_sim + int(elapsed_wall_ms * self.pace_factor)
                if target > sim.now:
                    sim.run_until(min(target, sim.now + 10 * SLICE_MS))
            elif self.pace_mode == "fast_forward":
                sim.run_until(sim.now + 5 * SLICE_MS)
            self._publish()

    def _publish(self):
        records = self.world.sim.log.records
        if self._publish_cursor >= len(records):
            return
        fresh = records[self._publish_cursor:]
        self._publish_cursor = len(records)
        with self._subscribers_lock:
            subscribers = list(self._subscribers)
        for q in subscribers:
            dead = False
            for record in fresh:
                try:
                    q.put_nowait(record)
                except queue.Full:
                    dead = True
                    break
            if dead:
                self.unsubscribe(q)
                try:
                    q.put_nowait(None)  # poison pill: subscriber too slow
                except queue.Full:
                    pass


class ControlPlaneServer:
    def __init__(
        self,
        config: Configuration,
        seed: int,
        host: str = "127.0.0.1",
        port: int = 8008,
        policy: QoSPolicy | None = None,
        console_dir: Optional[Path] = None,
        scenario: ScenarioScript | None = None,
    ):
        self.runner = SimRunner(config, seed, policy, scenario=scenario)
        self.console_dir = console_dir if console_dir is not None else default_console_dir()
        handler = _make_handler(self.runner, self.console_dir)
        self.httpd = ThreadingHTTPServer((host, port), handler)
        self.httpd.daemon_threads = True

    @property
    def address(self) -> tuple[str, int]:
        return self.httpd.server_address[:2]

    def start(self):
        self.runner.start()
        self._http_thread = threading.Thread(
            target=self.httpd.serve_forever, name="http", daemon=True
        )
        self._http_thread.start()

    def serve_forever(self):
        self.runner.start()
        try:
            self.httpd.serve_forever()
        finally:
            self.runner.stop()

    def stop(self):
        self.httpd.shutdown()
        self.httpd.server_close()
        self.runner.stop()


def _make_handler(runner: SimRunner, console_dir: Optional[Path]):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):
            pass  # keep the control plane quiet; the event log is the record

        # -- plumbing -------------------------------------------------------

        def _send_json(self, status: int, payload):
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def _read_json(self):
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            if not raw:
                return {}
            return json.loads(raw.decode("utf-8"))

        # -- GET ----------------------------------------------------------------

        def do_GET(self):
            if self.path == "/api/config":
                snapshot = runner.submit(lambda: runner.world.config.to_json())
                self._send_json(200, snapshot)
            elif self.path == "/api/state":
                self._send_json(200, runner.submit(self._state_snapshot))
            elif self.path == "/api/metrics":
                def metrics():
                    window = runner.engine.last_window
                    return window.to_json() if window is not None else {"now": runner.world.sim.now, "services": {}}

                self._send_json(200, runner.submit(metrics))
            elif self.path == "/api/scenarios":
                self._send_json(200, {"scenarios": list(BUILTIN_NAMES)})
            elif self.path == "/api/events":
                self._stream_events()
            else:
                self._serve_static()

        def _state_snapshot(self):
            snapshot = runner.world.snapshot()
            snapshot["pace"] = {"mode": runner.pace_mode, "factor": runner.pace_factor}
            engine = runner.engine
            snapshot["executing_plan"] = (
                engine.executing.to_json() if engine.executing else None
            )
            snapshot["incident"] = (
                {"kind": engine.incident.kind, "since": engine.incident.started_at}
                if engine.incident
                else None
            )
            return snapshot

        def _stream_events(self):
            q = runner.subscribe()
            try:
                self.send_response(200)
                self.send_header("Content-Type", "text/event-stream")
                self.send_header("Cache-Control", "no-cache")
                self.send_header("Access-Control-Allow-Origin", "*")
                self.end_headers()
                hello = runner.submit(self._state_snapshot)
                self._write_sse("hello", hello)
                while True:
                    try:
                        record = q.get(timeout=15.0)
                    except queue.Empty:
                        self._write_sse("keepalive", {"t": None})
                        continue
                    if record is None:
                        break  # dropped as a slow subscriber
                    self._write_sse(record["kind"], record)
            except (BrokenPipeError, ConnectionResetError):
                pass
            finally:
                runner.unsubscribe(q)

        def _write_sse(self, kind: str, payload):
            data = json.dumps(payload)
            chunk = f"event: {kind}\ndata: {data}\n\n".encode("utf-8")
            self.wfile.write(chunk)
            self.wfile.flush()

        def _serve_static(self):
            path = self.path.split("?", 1)[0]
            if path == "/":
                path = "/index.html"
            if console_dir is not None:
                target = (console_dir / path.lstrip("/")).resolve()
                if str(target).startswith(str(console_dir.resolve())) and target.is_file():
                    body = target.read_bytes()
                    content_type = {
                        ".html": "text/html; charset=utf-8",
                        ".js": "text/javascript; charset=utf-8",
                        ".css": "text/css; charset=utf-8",
                        ".map": "application/json",
                        ".svg": "image/svg+xml",
                    }.get(target.suffix, "application/octet-stream")
                    self.send_response(200)
                    self.send_header("Content-Type", content_type)
                    self.send_header("Content-Length", str(len(body)))
                    self.end_headers()
                    self.wfile.write(body)
                    return
            if path == "/index.html":
                self.send_response(200)
                self.send_header("Content-Type", "text/html; charset=utf-8")
                self.send_header("Content-Length", str(len(_FALLBACK_PAGE)))
                self.end_headers()
                self.wfile.write(_FALLBACK_PAGE)
                return
            self._send_json(404, {"error": "not found"})

        # -- POST / DELETE ----------------------------------------------------------

        def do_POST(self):
            try:
                body = self._read_json()
            except (ValueError, UnicodeDecodeError):
                self._send_json(400, {"error": "malformed JSON body"})
                return
            if self.path == "/api/reconfigure":
                self._reconfigure(body)
            elif self.path == "/api/faults":
                self._inject_fault(body)
            elif self.path == "/api/sim/pace":
                self._set_pace(body)
            else:
                match = re.fullmatch(r"/api/scenarios/([\w\-]+)/run", self.path)
                if match:
                    self._run_scenario(match.group(1), body)
                else:
                    self._send_json(404, {"error": "not found"})

        def _reconfigure(self, body):
            if not isinstance(body, dict):
                self._send_json(400, {"error": "body must be a JSON object"})
                return
            try:
                for dimension, value in body.items():
                    parse_dimension_value(dimension, value)
            except ValueError as exc:
                self._send_json(400, {"error": str(exc)})
                return
            try:
                plan = runner.submit(lambda: runner.engine.submit_devops(body))
            except UnsatisfiableRequestError as exc:
                self._send_json(
                    409,
                    {
                        "error": "unsatisfiable request",
                        "violations": [
                            {"constraint": v.constraint, "message": v.message}
                            for v in exc.violations
                        ],
                    },
                )
                return
            self._send_json(200, {"target": plan.target.to_json(), "plan_id": plan.id})

        def _inject_fault(self, body):
            try:
                fault_id = runner.submit(
                    lambda: runner.world.inject_fault(parse_fault(runner.world, body))
                )
            except (ValueError, KeyError, TypeError) as exc:
                self._send_json(400, {"error": f"bad fault spec: {exc}"})
                return
            self._send_json(200, {"id": fault_id})

        def _set_pace(self, body):
            mode = body.get("mode")
            factor = float(body.get("factor", 1.0))
            try:
                runner.submit(lambda: runner.set_pace(mode, factor))
            except ValueError as exc:
                self._send_json(400, {"error": str(exc)})
                return
            self._send_json(200, {"mode": mode, "factor": factor})

        def _run_scenario(self, name: str, body):
            try:
                script = builtin_scenario(name)
            except UnknownScenarioError:
                self._send_json(404, {"error": f"unknown scenario {name!r}"})
                return
            seed = body.get("seed")
            report = run_scenario(script, seed=seed)
            self._send_json(200, report.to_json())

        def do_DELETE(self):
            match = re.fullmatch(r"/api/faults/(\d+)", self.path)
            if not match:
                self._send_json(404, {"error": "not found"})
                return
            fault_id = int(match.group(1))
            try:
                runner.submit(lambda: runner.world.clear_fault(fault_id))
            except UnknownFaultError:
                self._send_json(404, {"error": f"no active fault {fault_id}"})
                return
            self._send_json(200, {"cleared": fault_id})

    return Handler
