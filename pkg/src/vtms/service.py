"""Live operation: the simulation in scaled real time behind an HTTP API.

One loop thread owns the coupled simulation and advances it at `time_scale`
simulated seconds per wall second, in whole ticks, falling behind rather
than skipping when starved. Operator commands arrive through a queue and
apply only at tick boundaries, so a live session replaying a scenario's
events as commands produces the exact trace the batch runner does.

Endpoints:
    GET  /api/snapshot            latest consistent snapshot (JSON)
    POST /api/command             {"kind": ..., "value"?: ...}
    GET  /api/stream[?hz=N]       server-sent events of snapshots
    GET  /api/trace?from_s=&to_s= CSV slice of the rolling trace buffer
"""

from __future__ import annotations

import json
import logging
import os
import queue
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional
from urllib.parse import parse_qs, urlparse

from .controller import Button, Screen, apply_button, reset_service_hours
from .harness import (
    DEFAULT_STATE_FILE,
    Scenario,
    SimCore,
    TRACE_HEADER,
    format_row,
    persist_counters,
    restore_counters,
)
from .lcd import render_main, render_settings
from .plant import EVENT_KINDS_WITH_VALUE, EventKind, ScenarioEvent

log = logging.getLogger(__name__)

DEFAULT_TIME_SCALE = 60.0
DEFAULT_STREAM_HZ = 10.0
DEFAULT_BUFFER_S = 86400.0
MAX_TICKS_PER_LOOP = 20000

_BUTTONS = {b.value: b for b in Button}
_PLANT_EVENT_KINDS = {k.value: k for k in EventKind}

COMMAND_KINDS = tuple(_PLANT_EVENT_KINDS) + (
    "PressButton",
    "SetTimeScale",
    "ResetServiceHours",
    "Pause",
    "Resume",
)


def validate_command(kind: str, value) -> Optional[str]:
    """Return a rejection reason, or None for a well-formed command."""
    if kind not in COMMAND_KINDS:
        return f"unknown command kind {kind!r}; valid kinds: {', '.join(COMMAND_KINDS)}"
    if kind == "PressButton":
        if value not in _BUTTONS:
            return f"PressButton requires a value in {sorted(_BUTTONS)}"
        return None
    if kind == "SetTimeScale":
        if not isinstance(value, (int, float)) or not 0.01 <= float(value) <= 86400:
            return "SetTimeScale requires a value in [0.01, 86400]"
        return None
    if kind in ("ResetServiceHours", "Pause", "Resume"):
        if value is not None:
            return f"{kind} takes no value"
        return None
    ev_kind = _PLANT_EVENT_KINDS[kind]
    if ev_kind in EVENT_KINDS_WITH_VALUE:
        if not isinstance(value, (int, float)):
            return f"{kind} requires a numeric value"
        if ev_kind is EventKind.SET_FUEL and float(value) < 0:
            return "fuel must be >= 0"
        if ev_kind is EventKind.SET_TRIMMER_GAIN and float(value) <= 0:
            return "trimmer gain must be positive"
        if ev_kind is EventKind.SET_AMBIENT and not -40.0 <= float(value) <= 100.0:
            return "ambient must be in [-40, 100] degC"
    elif value is not None:
        return f"{kind} takes no value"
    return None


@dataclass
class _PendingCommand:
    kind: str
    value: object
    done: threading.Event = field(default_factory=threading.Event)
    result: Optional[dict] = None


class LiveSimulation:
    """Owns a SimCore, its rolling trace, and the command queue."""

    def __init__(
        self,
        scenario: Optional[Scenario] = None,
        time_scale: float = DEFAULT_TIME_SCALE,
        state_file: Optional[str] = None,
        buffer_s: float = DEFAULT_BUFFER_S,
    ):
        scenario = scenario or Scenario(name="live", duration_s=float("inf"))
        runtime_s, persisted_settings = (0.0, None)
        if state_file is not None:
            runtime_s, persisted_settings = restore_counters(state_file)
        self.state_file = state_file
        self.core = SimCore(scenario, runtime_s, persisted_settings)
        self.time_scale = float(time_scale)
        self.paused = False
        self.trace: deque = deque(
            maxlen=max(1, round(buffer_s * 1000) // self.core.tick_ms)
        )
        self._commands: "queue.Queue[_PendingCommand]" = queue.Queue()
        self._snapshot_lock = threading.Lock()
        self._snapshot = self._build_snapshot()
        self._stop = threading.Event()
        self._owed_ticks = 0.0
        self._dirty_persist = False
        self._last_persist_wall = time.monotonic()

    # ---- API used by HTTP threads -------------------------------------

    def snapshot(self) -> dict:
        with self._snapshot_lock:
            return self._snapshot

    def submit(self, kind: str, value=None, timeout: float = 5.0) -> dict:
        """Queue a command for the next tick boundary and wait for its ack."""
        reason = validate_command(kind, value)
        if reason is not None:
            return {"accepted": False, "detail": reason}
        pending = _PendingCommand(kind, value)
        self._commands.put(pending)
        if not pending.done.wait(timeout):
            return {"accepted": False, "detail": "simulation loop not responding"}
        return pending.result

    def trace_slice(self, from_s: Optional[float], to_s: Optional[float]) -> list:
        rows = list(self.trace)
        if from_s is not None:
            rows = [r for r in rows if r.t_s >= from_s]
        if to_s is not None:
            rows = [r for r in rows if r.t_s <= to_s]
        return rows

    def stop(self) -> None:
        self._stop.set()

    # ---- owner-thread internals ---------------------------------------

    def _apply_command(self, kind: str, value) -> dict:
        """Apply one validated command at the current tick boundary."""
        core = self.core
        detail = "applied"
        if kind in _PLANT_EVENT_KINDS:
            event = ScenarioEvent(core.t_s, _PLANT_EVENT_KINDS[kind],
                                  None if value is None else float(value))
            try:
                core.inject_event(event)
            except ValueError as e:
                return {"accepted": False, "detail": str(e)}
        elif kind == "PressButton":
            apply_button(core.controller, _BUTTONS[value])
            self._dirty_persist = True  # a commit may have changed settings
        elif kind == "SetTimeScale":
            self.time_scale = float(value)
        elif kind == "ResetServiceHours":
            reset_service_hours(core.controller)
            self._dirty_persist = True
        elif kind == "Pause":
            self.paused = True
        elif kind == "Resume":
            self.paused = False
        return {"accepted": True, "detail": detail, "applied_at_t_s": core.t_s}

    def _drain_commands(self) -> None:
        while True:
            try:
                pending = self._commands.get_nowait()
            except queue.Empty:
                return
            pending.result = self._apply_command(pending.kind, pending.value)
            pending.done.set()

    def _advance(self, n: int) -> None:
        step = self.core.step
        append = self.trace.append
        for _ in range(n):
            append(step())

    def _build_snapshot(self) -> dict:
        core = self.core
        c = core.controller
        plant = core.plant
        if c.ui.screen is Screen.SETTINGS:
            frame = render_settings(c.settings, c.ui)
        else:
            frame = render_main(c.last_battery, c.last_temperature, c.mode, c.last_alarms)
        out = core.last_outputs
        if out is not None:
            leds = out.leds._asdict()
        else:  # before the first scan, or controller down: everything dark
            leds = {
                "mains_fail": False, "low_fuel": False, "genset_on_load": False,
                "high_temperature": False, "genset_fault": False,
                "service_hour": False, "on_battery": False, "on_genset": False,
            }
        return {
            "t_s": core.t_s,
            "time_scale": self.time_scale,
            "paused": self.paused,
            "lcd": list(frame.lines),
            "leds": leds,
            "relays": {
                "genset_start": core.last_cmd or core.watchdog.bypass_active,
                "bypass_active": core.watchdog.bypass_active,
            },
            "plant": {
                "mains_on": plant.mains_on,
                "soc": plant.soc,
                "fuel_l": plant.fuel_l,
                "fuel_capacity_l": core.params.fuel_capacity_l,
                "room_temp_c": plant.room_temp_c,
                "genset_state": plant.genset.value,
            },
            "controller": {
                "mode": c.mode.value,
                "battery_text": c.last_battery.text,
                "temperature_c": c.last_temperature,
                "service_runtime_s": c.genset_runtime_total_s,
            },
            "settings": c.settings.to_dict(),
        }

    def _publish_snapshot(self) -> None:
        snap = self._build_snapshot()
        with self._snapshot_lock:
            self._snapshot = snap

    def _maybe_persist(self, force: bool = False) -> None:
        if self.state_file is None:
            return
        now = time.monotonic()
        if force or (self._dirty_persist and now - self._last_persist_wall >= 5.0) or (
            now - self._last_persist_wall >= 30.0
        ):
            persist_counters(
                self.state_file,
                self.core.controller.genset_runtime_total_s,
                self.core.controller.settings,
            )
            self._dirty_persist = False
            self._last_persist_wall = now

    def run_loop(self) -> None:
        """The single simulation owner. Runs until stop() is called."""
        last_wall = time.monotonic()
        while not self._stop.is_set():
            now = time.monotonic()
            wall_dt = now - last_wall
            last_wall = now
            self._drain_commands()
            if not self.paused:
                self._owed_ticks += wall_dt * self.time_scale * 1000.0 / self.core.tick_ms
                n = int(self._owed_ticks)
                if n > 0:
                    burst = min(n, MAX_TICKS_PER_LOOP)
                    self._advance(burst)
                    self._owed_ticks -= burst
            else:
                self._owed_ticks = 0.0
            self._publish_snapshot()
            self._maybe_persist()
            time.sleep(0.005)
        self._maybe_persist(force=True)


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "vtms"

    @property
    def sim(self) -> LiveSimulation:
        return self.server.sim  # type: ignore[attr-defined]

    def log_message(self, fmt, *args):
        log.debug("http: " + fmt, *args)

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):  # noqa: N802 - http.server API
        url = urlparse(self.path)
        if url.path == "/api/snapshot":
            self._send_json(200, self.sim.snapshot())
        elif url.path == "/api/stream":
            self._stream(url)
        elif url.path == "/api/trace":
            self._trace(url)
        else:
            self._static(url.path)

    def do_POST(self):  # noqa: N802
        url = urlparse(self.path)
        if url.path != "/api/command":
            self._send_json(404, {"accepted": False, "detail": "unknown endpoint"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            doc = json.loads(self.rfile.read(length) or b"{}")
            kind = doc["kind"]
            value = doc.get("value")
        except (ValueError, KeyError) as e:
            self._send_json(400, {"accepted": False, "detail": f"bad command body: {e}"})
            return
        ack = self.sim.submit(kind, value)
        self._send_json(200 if ack["accepted"] else 400, ack)

    def _stream(self, url) -> None:
        params = parse_qs(url.query)
        try:
            hz = float(params.get("hz", [DEFAULT_STREAM_HZ])[0])
        except ValueError:
            hz = DEFAULT_STREAM_HZ
        hz = min(max(hz, 0.1), 60.0)
        self.send_response(200)
        self.send_header("Content-Type", "text/event-stream")
        self.send_header("Cache-Control", "no-cache")
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        try:
            while not self.sim._stop.is_set():
                payload = json.dumps(self.sim.snapshot())
                self.wfile.write(f"data: {payload}\n\n".encode("utf-8"))
                self.wfile.flush()
                time.sleep(1.0 / hz)
        except (BrokenPipeError, ConnectionResetError):
            pass

    def _trace(self, url) -> None:
        params = parse_qs(url.query)

        def _float(name):
            if name not in params:
                return None
            try:
                return float(params[name][0])
            except ValueError:
                return None

        rows = self.sim.trace_slice(_float("from_s"), _float("to_s"))
        body = "\n".join([TRACE_HEADER] + [format_row(r) for r in rows] + [""])
        data = body.encode("ascii")
        self.send_response(200)
        self.send_header("Content-Type", "text/csv")
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def _static(self, path: str) -> None:
        console_dir = getattr(self.server, "console_dir", None)
        if console_dir:
            rel = "index.html" if path == "/" else path.lstrip("/")
            full = os.path.realpath(os.path.join(console_dir, rel))
            if full.startswith(os.path.realpath(console_dir)) and os.path.isfile(full):
                ctype = {
                    ".html": "text/html", ".js": "text/javascript",
                    ".css": "text/css", ".map": "application/json",
                    ".json": "application/json",
                }.get(os.path.splitext(full)[1], "application/octet-stream")
                with open(full, "rb") as f:
                    data = f.read()
                self.send_response(200)
                self.send_header("Content-Type", ctype)
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)
                return
        self._send_json(404, {"detail": "not found"})


class LiveServer:
    """HTTP front + simulation loop, bundled for embedding and tests."""

    def __init__(
        self,
        port: int = 8080,
        scenario: Optional[Scenario] = None,
        time_scale: float = DEFAULT_TIME_SCALE,
        state_file: Optional[str] = None,
        console_dir: Optional[str] = None,
        host: str = "127.0.0.1",
    ):
        self.sim = LiveSimulation(scenario, time_scale, state_file)
        self.httpd = ThreadingHTTPServer((host, port), _Handler)
        self.httpd.daemon_threads = True
        self.httpd.sim = self.sim  # type: ignore[attr-defined]
        self.httpd.console_dir = console_dir  # type: ignore[attr-defined]
        self._loop_thread = threading.Thread(target=self.sim.run_loop, daemon=True)
        self._http_thread: Optional[threading.Thread] = None

    @property
    def port(self) -> int:
        return self.httpd.server_address[1]

    def start(self) -> None:
        self._loop_thread.start()
        self._http_thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self._http_thread.start()
        log.info("live service on port %d", self.port)

    def stop(self) -> None:
        self.sim.stop()
        self.httpd.shutdown()
        self.httpd.server_close()
        if self._loop_thread.is_alive():
            self._loop_thread.join(timeout=5)

    def serve_forever(self) -> None:
        self._loop_thread.start()
        log.info("live service on port %d", self.port)
        try:
            self.httpd.serve_forever()
        except KeyboardInterrupt:
            pass
        finally:
            self.stop()


def serve(
    port: int = 8080,
    scenario: Optional[Scenario] = None,
    time_scale: float = DEFAULT_TIME_SCALE,
    state_file: Optional[str] = DEFAULT_STATE_FILE,
    console_dir: Optional[str] = None,
) -> None:
    """Run the live service until interrupted."""
    server = LiveServer(
        port=port,
        scenario=scenario,
        time_scale=time_scale,
        state_file=state_file,
        console_dir=console_dir,
    )
    server.serve_forever()
