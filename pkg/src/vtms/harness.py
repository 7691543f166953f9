"""Closed-loop execution harness.

Couples the controller to the plant in lockstep at a fixed tick, supervises
the controller with an external watchdog that force-starts the genset when
heartbeats stop, applies scripted scenario events, and records one trace row
per tick. Runs are byte-for-byte reproducible: the controller is all-integer
and every real number is rendered through one fixed-width format.
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field, fields
from typing import IO, NamedTuple, Optional, Union

from .controller import (
    ALARMS_NONE,
    ControllerState,
    Settings,
    controller_init,
    controller_scan,
)
from .plant import (
    EVENT_KINDS_WITH_VALUE,
    EventKind,
    PlantParams,
    PlantState,
    ScenarioEvent,
    apply_event,
    plant_init,
    plant_step,
)

log = logging.getLogger(__name__)

DEFAULT_WATCHDOG_TIMEOUT_S = 2.0
DEFAULT_STATE_FILE = "vtms-state"


class ScenarioError(ValueError):
    """A scenario file failed to parse or validate."""


@dataclass(slots=True)
class WatchdogState:
    """External supervisor fed by the controller heartbeat."""

    timeout_ms: int = 2000
    since_last_heartbeat_ms: int = 0
    bypass_active: bool = False


def watchdog_step(wd: WatchdogState, heartbeat_seen: bool, dt: float) -> WatchdogState:
    """Advance the watchdog by one tick.

    A heartbeat resets the timer and drops the bypass; silence accumulates
    and the bypass engages once the timer exceeds the timeout.
    """
    if heartbeat_seen:
        wd.since_last_heartbeat_ms = 0
        wd.bypass_active = False
    else:
        wd.since_last_heartbeat_ms += round(dt * 1000)
        wd.bypass_active = wd.since_last_heartbeat_ms > wd.timeout_ms
    return wd


@dataclass(slots=True)
class Scenario:
    name: str
    duration_s: float
    tick_ms: int = 100
    settings_overrides: dict = field(default_factory=dict)
    plant_overrides: dict = field(default_factory=dict)
    events: list[ScenarioEvent] = field(default_factory=list)


class TraceRow(NamedTuple):
    """One tick of the simulation record. Column order is the wire contract."""

    t_s: float
    mode: str
    mains_fail: bool
    low_fuel: bool
    genset_cmd: bool
    genset_supply: bool
    bypass_active: bool
    battery_display: str
    temperature_c: int
    soc: float
    fuel_l: float
    room_temp_c: float
    alarm_mains_fail: bool
    alarm_low_fuel: bool
    alarm_genset_on_load: bool
    alarm_high_temperature: bool
    alarm_genset_fault: bool
    alarm_service_hour: bool


TRACE_HEADER = ",".join(TraceRow._fields)

_VALID_EVENT_KINDS = {k.value: k for k in EventKind}


def load_scenario(text: str, name_hint: str = "<scenario>") -> Scenario:
    """Parse and validate a scenario document (JSON with explicit keys)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(
            f"{name_hint}: malformed scenario at line {e.lineno}, column {e.colno}: {e.msg}"
        ) from e
    if not isinstance(doc, dict):
        raise ScenarioError(f"{name_hint}: scenario must be an object with named keys")

    known = {"name", "duration_s", "tick_ms", "settings", "plant", "events"}
    unknown = set(doc) - known
    if unknown:
        raise ScenarioError(f"{name_hint}: unknown top-level keys {sorted(unknown)}")
    if "duration_s" not in doc:
        raise ScenarioError(f"{name_hint}: missing required key 'duration_s'")

    name = str(doc.get("name", name_hint))
    duration_s = float(doc["duration_s"])
    if duration_s <= 0:
        raise ScenarioError(f"{name}: duration_s must be positive")

    settings_over = doc.get("settings", {}) or {}
    plant_over = doc.get("plant", {}) or {}
    if not isinstance(settings_over, dict) or not isinstance(plant_over, dict):
        raise ScenarioError(f"{name}: 'settings' and 'plant' must be objects")

    events: list[ScenarioEvent] = []
    prev_t = -1.0
    for i, entry in enumerate(doc.get("events", []) or []):
        if not isinstance(entry, dict):
            raise ScenarioError(f"{name}: events[{i}] must be an object")
        extra = set(entry) - {"t_s", "kind", "value"}
        if extra:
            raise ScenarioError(f"{name}: events[{i}] has unknown keys {sorted(extra)}")
        try:
            t_s = float(entry["t_s"])
            kind_name = entry["kind"]
        except KeyError as e:
            raise ScenarioError(f"{name}: events[{i}] missing key {e}") from e
        kind = _VALID_EVENT_KINDS.get(kind_name)
        if kind is None:
            raise ScenarioError(
                f"{name}: events[{i}] has unknown kind {kind_name!r}; "
                f"valid kinds: {sorted(_VALID_EVENT_KINDS)}"
            )
        value = entry.get("value")
        if kind in EVENT_KINDS_WITH_VALUE:
            if value is None:
                raise ScenarioError(f"{name}: events[{i}] kind {kind_name} requires a value")
            value = float(value)
        elif value is not None:
            raise ScenarioError(f"{name}: events[{i}] kind {kind_name} takes no value")
        if t_s < 0 or t_s > duration_s:
            raise ScenarioError(
                f"{name}: events[{i}] at t_s={t_s} outside run window [0, {duration_s}]"
            )
        if t_s < prev_t:
            raise ScenarioError(f"{name}: events must be sorted by t_s (events[{i}])")
        prev_t = t_s
        events.append(ScenarioEvent(t_s, kind, value))

    # Resolve and cross-check the tick against the scan period.
    try:
        settings = Settings.from_dict(settings_over)
    except (ValueError, TypeError) as e:
        raise ScenarioError(f"{name}: bad settings override: {e}") from e
    tick_ms = int(doc.get("tick_ms", settings.scan_period_ms))
    if tick_ms != settings.scan_period_ms:
        raise ScenarioError(
            f"{name}: tick_ms {tick_ms} must equal the controller scan period "
            f"{settings.scan_period_ms} ms"
        )

    scenario = Scenario(
        name=name,
        duration_s=duration_s,
        tick_ms=tick_ms,
        settings_overrides=dict(settings_over),
        plant_overrides=dict(plant_over),
        events=events,
    )
    # Fail fast on bad plant keys/values before any ticking.
    build_plant_params(scenario)
    return scenario


def load_scenario_file(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as f:
        return load_scenario(f.read(), name_hint=os.path.basename(path))


def build_settings(
    scenario: Scenario, persisted_settings: Optional[dict] = None
) -> Settings:
    """Effective presets: defaults, then persisted edits, then scenario overrides."""
    merged: dict = {}
    if persisted_settings:
        merged.update(persisted_settings)
    merged.update(scenario.settings_overrides)
    try:
        return Settings.from_dict(merged)
    except (ValueError, TypeError) as e:
        raise ScenarioError(f"{scenario.name}: bad settings: {e}") from e


def build_plant_params(scenario: Scenario) -> PlantParams:
    over = dict(scenario.plant_overrides)
    if "ocv_table" in over:
        over["ocv_table"] = tuple(tuple(p) for p in over["ocv_table"])
    known = {f.name for f in fields(PlantParams)}
    unknown = set(over) - known
    if unknown:
        raise ScenarioError(f"{scenario.name}: unknown plant keys {sorted(unknown)}")
    params = PlantParams(**over)
    try:
        params.validate()
    except ValueError as e:
        raise ScenarioError(f"{scenario.name}: bad plant parameters: {e}") from e
    return params


def event_tick(t_s: float, tick_ms: int) -> int:
    """First tick whose start time is at or after the event time."""
    return math.ceil(round(t_s * 1000) / tick_ms)


class SimCore:
    """One coupled controller+plant+watchdog instance advancing tick by tick.

    Both the batch runner and the live service drive this; it owns all the
    per-tick sequencing so the two stay trace-identical.
    """

    def __init__(
        self,
        scenario: Scenario,
        persisted_runtime_s: float = 0.0,
        persisted_settings: Optional[dict] = None,
        watchdog_timeout_s: float = DEFAULT_WATCHDOG_TIMEOUT_S,
    ):
        self.scenario = scenario
        self.tick_ms = scenario.tick_ms
        self.dt = scenario.tick_ms / 1000.0
        self.settings = build_settings(scenario, persisted_settings)
        self.params = build_plant_params(scenario)
        self.controller: ControllerState = controller_init(
            self.settings, persisted_runtime_s
        )
        self.plant: PlantState = plant_init(self.params)
        self.watchdog = WatchdogState(timeout_ms=round(watchdog_timeout_s * 1000))
        self.tick = 0
        self.last_cmd = False          # controller relay after the last scan
        self.last_outputs = None
        self._pending = [
            (event_tick(e.t_s, self.tick_ms), e) for e in scenario.events
        ]
        self._pending_i = 0

    @property
    def t_s(self) -> float:
        return self.tick * self.tick_ms / 1000.0

    def inject_event(self, event: ScenarioEvent) -> None:
        """Apply an unscripted event right now (live-service command path)."""
        apply_event(self.plant, event, self.params)

    def step(self) -> TraceRow:
        """Advance exactly one tick and return its trace row."""
        plant = self.plant
        params = self.params
        dt = self.dt

        while self._pending_i < len(self._pending) and self._pending[self._pending_i][0] <= self.tick:
            apply_event(plant, self._pending[self._pending_i][1], params)
            self._pending_i += 1

        hung = plant.controller_hung
        genset_cmd = (self.last_cmd and not hung) or self.watchdog.bypass_active
        plant, inputs = plant_step(plant, params, genset_cmd, dt)

        if not hung:
            _, out = controller_scan(self.controller, inputs, dt)
            self.last_cmd = out.genset_start
            self.last_outputs = out
            alarms = out.alarms
            heartbeat = True
        else:
            # Controller down: its relay outputs are all de-energized.
            self.last_cmd = False
            self.last_outputs = None
            alarms = ALARMS_NONE
            heartbeat = False

        watchdog_step(self.watchdog, heartbeat, dt)
        plant.bypass_active = self.watchdog.bypass_active
        self.tick += 1

        c = self.controller
        return TraceRow(
            t_s=self.tick * self.tick_ms / 1000.0,
            mode=c.mode.value,
            mains_fail=inputs.mains_fail,
            low_fuel=inputs.low_fuel,
            genset_cmd=genset_cmd,
            genset_supply=inputs.genset_supply_present,
            bypass_active=self.watchdog.bypass_active,
            battery_display=c.last_battery.text,
            temperature_c=c.last_temperature,
            soc=plant.soc,
            fuel_l=plant.fuel_l,
            room_temp_c=plant.room_temp_c,
            alarm_mains_fail=alarms.mains_fail,
            alarm_low_fuel=alarms.low_fuel,
            alarm_genset_on_load=alarms.genset_on_load,
            alarm_high_temperature=alarms.high_temperature,
            alarm_genset_fault=alarms.genset_fault,
            alarm_service_hour=alarms.service_hour,
        )


def run_scenario(
    scenario: Scenario,
    state_file: Optional[str] = None,
    until_s: Optional[float] = None,
) -> list[TraceRow]:
    """Run a scenario start to finish and return one trace row per tick.

    With `state_file`, the service-hour counter and committed settings are
    restored before the run and written back after it.
    """
    runtime_s, persisted_settings = (0.0, None)
    if state_file is not None:
        runtime_s, persisted_settings = restore_counters(state_file)

    core = SimCore(scenario, runtime_s, persisted_settings)
    duration = scenario.duration_s if until_s is None else min(scenario.duration_s, until_s)
    n_ticks = round(duration * 1000) // scenario.tick_ms

    step = core.step
    rows = [step() for _ in range(n_ticks)]

    if state_file is not None:
        persist_counters(
            state_file,
            core.controller.genset_runtime_total_s,
            core.controller.settings,
        )
    return rows


def _format_t(t_s: float) -> str:
    ms = round(t_s * 1000)
    return f"{ms // 1000}.{ms % 1000:03d}"


def format_row(row: TraceRow) -> str:
    return ",".join(
        (
            _format_t(row.t_s),
            row.mode,
            "1" if row.mains_fail else "0",
            "1" if row.low_fuel else "0",
            "1" if row.genset_cmd else "0",
            "1" if row.genset_supply else "0",
            "1" if row.bypass_active else "0",
            row.battery_display,
            str(row.temperature_c),
            f"{row.soc:.6f}",
            f"{row.fuel_l:.6f}",
            f"{row.room_temp_c:.6f}",
            "1" if row.alarm_mains_fail else "0",
            "1" if row.alarm_low_fuel else "0",
            "1" if row.alarm_genset_on_load else "0",
            "1" if row.alarm_high_temperature else "0",
            "1" if row.alarm_genset_fault else "0",
            "1" if row.alarm_service_hour else "0",
        )
    )


def write_trace(rows: list[TraceRow], destination: Union[str, IO[str]]) -> None:
    """Write the trace as CSV with the fixed header, LF newlines."""
    def _write(f: IO[str]) -> None:
        f.write(TRACE_HEADER)
        f.write("\n")
        for row in rows:
            f.write(format_row(row))
            f.write("\n")

    if isinstance(destination, str):
        with open(destination, "w", encoding="ascii", newline="") as f:
            _write(f)
    else:
        _write(destination)


def trace_bytes(rows: list[TraceRow]) -> bytes:
    parts = [TRACE_HEADER]
    parts.extend(format_row(r) for r in rows)
    parts.append("")
    return "\n".join(parts).encode("ascii")


def persist_counters(path: str, service_runtime_s: float, settings: Settings) -> None:
    """Write the restart-surviving counters atomically (write then rename)."""
    doc = {
        "service_runtime_s": service_runtime_s,
        "settings": settings.to_dict(),
    }
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")
    os.replace(tmp, path)


def restore_counters(path: str) -> tuple[float, Optional[dict]]:
    """Read back persisted counters; any damage restores defaults, never crashes."""
    if not os.path.exists(path):
        log.warning("state file %s absent, starting with defaults", path)
        return 0.0, None
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
        runtime = float(doc["service_runtime_s"])
        if runtime < 0:
            raise ValueError("negative service_runtime_s")
        settings_doc = doc.get("settings")
        if settings_doc is not None:
            Settings.from_dict(settings_doc)  # validate before trusting
        return runtime, settings_doc
    except (OSError, ValueError, TypeError, KeyError) as e:
        log.warning("state file %s unreadable (%s), starting with defaults", path, e)
        return 0.0, None
