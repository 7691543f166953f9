"""Controller firmware logic: the fixed-period scan loop.

Each scan reads the relay/ADC inputs, decides the power source, evaluates the
six site alarms, accumulates the genset service-hour counter and emits the
relay/LED/heartbeat outputs. State is a plain mutable record, exactly one
logical owner advances it; all timers and thresholds are integers (whole
milliseconds, tenths of a volt) so the machine is bit-identical on any
platform.

Source selection policy: on a mains failure the battery carries the site
first (if above the low threshold), then battery and genset alternate on the
configured phase durations. A genset that fails to produce within the crank
budget latches a fault and the battery becomes the last resort regardless of
its cutoff level. When mains returns the genset gets a cooldown run before
everything drops back to mains. See docs/statechart.md for the full
transition table.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import NamedTuple, Optional

from .conversions import (
    AdcChannel,
    AdcSample,
    DisplayVoltage,
    battery_voltage_from_adc,
    temperature_from_adc,
)


class ConfigError(ValueError):
    """A settings record violates one of its invariants."""


class ControllerMode(Enum):
    MAINS_POWERED = "MainsPowered"
    BATTERY_PHASE = "BatteryPhase"
    GENSET_CRANKING = "GensetCranking"
    GENSET_PHASE = "GensetPhase"
    GENSET_COOLDOWN = "GensetCooldown"


# Modes whose output asserts the genset start relay. Cooldown keeps the
# relay closed so the engine runs unloaded for the configured time.
_GENSET_CMD_MODES = frozenset(
    (
        ControllerMode.GENSET_CRANKING,
        ControllerMode.GENSET_PHASE,
        ControllerMode.GENSET_COOLDOWN,
    )
)


@dataclass(slots=True)
class Settings:
    """Operator presets. Thresholds are integers in their display units."""

    temp_alarm_on_c: int = 40
    temp_alarm_off_c: int = 38
    batt_low_tenths: int = 470      # 47.0 V
    batt_cutoff_tenths: int = 430   # 43.0 V
    battery_phase_s: int = 21600    # 6 h
    genset_phase_s: int = 21600     # 6 h
    crank_duration_s: int = 10
    crank_attempts_max: int = 3
    genset_cooldown_s: int = 30
    service_interval_s: int = 900000  # 250 h
    scan_period_ms: int = 100

    def validate(self) -> None:
        """Raise ConfigError naming the first violated invariant."""
        if self.temp_alarm_off_c >= self.temp_alarm_on_c:
            raise ConfigError(
                "temp_alarm_off_c must be below temp_alarm_on_c "
                f"({self.temp_alarm_off_c} >= {self.temp_alarm_on_c})"
            )
        if self.batt_cutoff_tenths >= self.batt_low_tenths:
            raise ConfigError(
                "batt_cutoff_tenths must be below batt_low_tenths "
                f"({self.batt_cutoff_tenths} >= {self.batt_low_tenths})"
            )
        for name in (
            "battery_phase_s",
            "genset_phase_s",
            "crank_duration_s",
            "genset_cooldown_s",
            "service_interval_s",
            "scan_period_ms",
        ):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.crank_attempts_max < 1:
            raise ConfigError(
                f"crank_attempts_max must be at least 1, got {self.crank_attempts_max}"
            )

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "Settings":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown settings keys: {sorted(unknown)}")
        s = cls(**{k: int(v) for k, v in data.items()})
        s.validate()
        return s

    def copy(self) -> "Settings":
        return replace(self)


class ControllerInputs(NamedTuple):
    """The relay/ADC boundary coming in from the plant each scan."""

    mains_fail: bool            # mains-fail relay, True = grid absent
    low_fuel: bool              # fuel float switch tripped
    genset_supply_present: bool  # transfer-switch feedback: genset producing
    adc_temp: AdcSample
    adc_batt: AdcSample


class AlarmSet(NamedTuple):
    """The six alarm relay contacts, in wire order. True = contact closed."""

    mains_fail: bool
    low_fuel: bool
    genset_on_load: bool
    high_temperature: bool
    genset_fault: bool
    service_hour: bool


ALARM_NAMES = ("MAINS FAIL", "LOW FUEL", "GENSET ON LOAD", "HIGH TEMP",
               "GENSET FAULT", "SERVICE HOUR")

ALARMS_NONE = AlarmSet(False, False, False, False, False, False)


class LedSet(NamedTuple):
    """Front-panel indicator LEDs: the six alarms plus the two source lamps."""

    mains_fail: bool
    low_fuel: bool
    genset_on_load: bool
    high_temperature: bool
    genset_fault: bool
    service_hour: bool
    on_battery: bool
    on_genset: bool


class ControllerOutputs(NamedTuple):
    genset_start: bool
    alarms: AlarmSet
    leds: LedSet
    heartbeat: bool      # pulses True exactly once per completed scan
    display_dirty: bool


class Screen(Enum):
    MAIN = "Main"
    SETTINGS = "Settings"


class Button(Enum):
    UP = "Up"
    DOWN = "Down"
    SET = "Set"
    BACK = "Back"


@dataclass(slots=True)
class ScreenCursor:
    """Where the operator is in the panel UI."""

    screen: Screen = Screen.MAIN
    field_index: int = 0
    pending: Optional[int] = None  # uncommitted edit value for the field

    def key(self) -> tuple:
        return (self.screen, self.field_index, self.pending)


class PresetField(NamedTuple):
    attr: str
    label: str   # at most 10 characters, LCD settings row
    unit: str    # C, V or H
    step: int    # in the stored integer unit
    lo: int
    hi: int


# The editable preset list, in panel order. Steps are one display unit:
# 1 degC, 0.1 V (one tenth), or 1 h (3600 s).
PRESET_FIELDS = (
    PresetField("temp_alarm_on_c", "TEMP ALARM", "C", 1, 1, 150),
    PresetField("temp_alarm_off_c", "TEMP CLEAR", "C", 1, 0, 149),
    PresetField("batt_low_tenths", "BATT LOW", "V", 1, 1, 639),
    PresetField("batt_cutoff_tenths", "BATT CUT", "V", 1, 0, 638),
    PresetField("battery_phase_s", "BATT PHASE", "H", 3600, 3600, 86400),
    PresetField("genset_phase_s", "GEN PHASE", "H", 3600, 3600, 86400),
    PresetField("service_interval_s", "SVC INTVL", "H", 3600, 3600, 3600000),
)


def _field_bounds(settings: Settings, index: int) -> tuple[int, int]:
    """Legal value range for a preset, folding in the cross-field invariants."""
    f = PRESET_FIELDS[index]
    lo, hi = f.lo, f.hi
    if f.attr == "temp_alarm_on_c":
        lo = max(lo, settings.temp_alarm_off_c + 1)
    elif f.attr == "temp_alarm_off_c":
        hi = min(hi, settings.temp_alarm_on_c - 1)
    elif f.attr == "batt_low_tenths":
        lo = max(lo, settings.batt_cutoff_tenths + 1)
    elif f.attr == "batt_cutoff_tenths":
        hi = min(hi, settings.batt_low_tenths - 1)
    return lo, hi


@dataclass(slots=True)
class ControllerState:
    """Everything the firmware keeps between scans."""

    settings: Settings
    mode: ControllerMode = ControllerMode.MAINS_POWERED
    phase_elapsed_ms: int = 0
    crank_attempt: int = 0
    crank_elapsed_ms: int = 0
    cooldown_elapsed_ms: int = 0
    genset_runtime_total_ms: int = 0  # persisted service-hour counter
    temp_alarm_latched: bool = False
    genset_fault_latched: bool = False
    last_temperature: int = 0
    last_battery: DisplayVoltage = DisplayVoltage(0, 0, "0.0")
    last_alarms: AlarmSet = ALARMS_NONE
    ui: ScreenCursor = field(default_factory=ScreenCursor)
    _display_key: tuple = ()

    @property
    def genset_runtime_total_s(self) -> float:
        return self.genset_runtime_total_ms / 1000.0


def controller_init(settings: Settings, persisted_runtime_s: float = 0.0) -> ControllerState:
    """Fresh boot: validate the presets and restore the service counter."""
    settings.validate()
    if persisted_runtime_s < 0:
        raise ConfigError(f"persisted runtime must be >= 0, got {persisted_runtime_s}")
    return ControllerState(
        settings=settings,
        genset_runtime_total_ms=round(persisted_runtime_s * 1000),
    )


def _enter_mains(state: ControllerState) -> None:
    state.mode = ControllerMode.MAINS_POWERED
    state.phase_elapsed_ms = 0
    state.crank_attempt = 0
    state.crank_elapsed_ms = 0
    state.cooldown_elapsed_ms = 0
    state.genset_fault_latched = False  # fault clears only here


def _enter_backup(state: ControllerState, battery_tenths: int) -> None:
    """Mains just failed: pick the first backup source.

    Battery first while it is above the low threshold; with a latched genset
    fault the battery is the last resort whatever its level.
    """
    state.phase_elapsed_ms = 0
    if battery_tenths > state.settings.batt_low_tenths or state.genset_fault_latched:
        state.mode = ControllerMode.BATTERY_PHASE
    else:
        _enter_cranking(state)


def _enter_cranking(state: ControllerState) -> None:
    state.mode = ControllerMode.GENSET_CRANKING
    state.phase_elapsed_ms = 0
    state.crank_attempt = 0
    state.crank_elapsed_ms = 0


def select_source(
    state: ControllerState,
    mains_fail: bool,
    battery_tenths: int,
    genset_supply_present: bool,
    dt: float,
) -> ControllerState:
    """Advance the source-selection state machine by one scan.

    Called exactly once per scan. Mutates and returns `state`.
    """
    dt_ms = round(dt * 1000)
    st = state.settings
    mode = state.mode

    if not mains_fail:
        if mode is ControllerMode.MAINS_POWERED:
            pass
        elif mode is ControllerMode.GENSET_COOLDOWN:
            state.cooldown_elapsed_ms += dt_ms
            if state.cooldown_elapsed_ms >= st.genset_cooldown_s * 1000:
                _enter_mains(state)
        else:
            # Mains is back. A hot engine gets a cooldown run, everything
            # else goes straight back to mains.
            genset_was_running = (
                mode is ControllerMode.GENSET_PHASE or genset_supply_present
            )
            if genset_was_running:
                state.mode = ControllerMode.GENSET_COOLDOWN
                state.cooldown_elapsed_ms = 0
                state.phase_elapsed_ms = 0
            else:
                _enter_mains(state)
        return state

    # Mains absent.
    if mode is ControllerMode.MAINS_POWERED:
        _enter_backup(state, battery_tenths)
    elif mode is ControllerMode.GENSET_COOLDOWN:
        # Mains failed again mid-cooldown: same entry decision as a fresh failure.
        _enter_backup(state, battery_tenths)
    elif mode is ControllerMode.BATTERY_PHASE:
        phase_ms = st.battery_phase_s * 1000
        if state.phase_elapsed_ms < phase_ms + dt_ms:
            state.phase_elapsed_ms += dt_ms
        expired = state.phase_elapsed_ms >= phase_ms
        battery_low = battery_tenths <= st.batt_low_tenths
        if (expired or battery_low) and not state.genset_fault_latched:
            _enter_cranking(state)
    elif mode is ControllerMode.GENSET_CRANKING:
        if genset_supply_present:
            state.mode = ControllerMode.GENSET_PHASE
            state.phase_elapsed_ms = 0
            state.crank_attempt = 0
            state.crank_elapsed_ms = 0
        else:
            state.crank_elapsed_ms += dt_ms
            if state.crank_elapsed_ms >= st.crank_duration_s * 1000:
                state.crank_attempt += 1
                state.crank_elapsed_ms = 0
                if state.crank_attempt >= st.crank_attempts_max:
                    # Give up: latch the fault, battery carries the site
                    # regardless of its cutoff level.
                    state.genset_fault_latched = True
                    state.mode = ControllerMode.BATTERY_PHASE
                    state.phase_elapsed_ms = 0
    elif mode is ControllerMode.GENSET_PHASE:
        if not genset_supply_present:
            # Commanded but no longer producing: genset fault.
            state.genset_fault_latched = True
            state.mode = ControllerMode.BATTERY_PHASE
            state.phase_elapsed_ms = 0
        else:
            phase_ms = st.genset_phase_s * 1000
            if state.phase_elapsed_ms < phase_ms + dt_ms:
                state.phase_elapsed_ms += dt_ms
            if (
                state.phase_elapsed_ms >= phase_ms
                and battery_tenths > st.batt_cutoff_tenths
            ):
                state.mode = ControllerMode.BATTERY_PHASE
                state.phase_elapsed_ms = 0
    return state


def evaluate_alarms(
    state: ControllerState,
    inputs: ControllerInputs,
    temperature: int,
    dt: float,
) -> AlarmSet:
    """Compute the six alarm contacts for this scan.

    The high-temperature alarm is a hysteresis latch: it sets at or above
    the on threshold and clears only at or below the off threshold.
    """
    st = state.settings
    if temperature >= st.temp_alarm_on_c:
        state.temp_alarm_latched = True
    elif temperature <= st.temp_alarm_off_c:
        state.temp_alarm_latched = False
    return AlarmSet(
        mains_fail=inputs.mains_fail,
        low_fuel=inputs.low_fuel,
        genset_on_load=inputs.genset_supply_present and inputs.mains_fail,
        high_temperature=state.temp_alarm_latched,
        genset_fault=state.genset_fault_latched,
        service_hour=state.genset_runtime_total_ms >= st.service_interval_s * 1000,
    )


def controller_scan(
    state: ControllerState, inputs: ControllerInputs, dt: float
) -> tuple[ControllerState, ControllerOutputs]:
    """One complete scan: convert, select source, evaluate alarms, emit.

    Deterministic: the result depends only on (state, inputs, dt). Mutates
    and returns `state` alongside the outputs.
    """
    st = state.settings
    dt_ms = round(dt * 1000)
    if dt_ms != st.scan_period_ms:
        raise ValueError(
            f"scan called with dt {dt} s, configured period is {st.scan_period_ms} ms"
        )
    if inputs.adc_temp.channel is not AdcChannel.TEMP0:
        raise ValueError(f"adc_temp carries channel {inputs.adc_temp.channel}")
    if inputs.adc_batt.channel is not AdcChannel.BATT1:
        raise ValueError(f"adc_batt carries channel {inputs.adc_batt.channel}")

    # (a) ADC conversions
    battery = battery_voltage_from_adc(inputs.adc_batt.code)
    temperature = temperature_from_adc(inputs.adc_temp.code)
    state.last_battery = battery
    state.last_temperature = temperature

    # (b) source selection
    select_source(
        state, inputs.mains_fail, battery.total_tenths, inputs.genset_supply_present, dt
    )

    # (c) alarms
    alarms = evaluate_alarms(state, inputs, temperature, dt)
    state.last_alarms = alarms

    # (d) service-hour accumulation
    if inputs.genset_supply_present:
        state.genset_runtime_total_ms += dt_ms

    # (e) outputs
    genset_start = state.mode in _GENSET_CMD_MODES
    on_battery = inputs.mains_fail and not inputs.genset_supply_present
    on_genset = inputs.mains_fail and inputs.genset_supply_present
    leds = LedSet(*alarms, on_battery=on_battery, on_genset=on_genset)
    display_key = (state.mode, battery.text, temperature, alarms, state.ui.key())
    display_dirty = display_key != state._display_key
    state._display_key = display_key
    outputs = ControllerOutputs(
        genset_start=genset_start,
        alarms=alarms,
        leds=leds,
        heartbeat=True,
        display_dirty=display_dirty,
    )
    return state, outputs


def reset_service_hours(state: ControllerState) -> ControllerState:
    """Zero the genset service-hour counter (after site maintenance)."""
    state.genset_runtime_total_ms = 0
    return state


def apply_button(state: ControllerState, button: Button) -> ControllerState:
    """Drive the four-button panel UI.

    SET enters the settings screen from the main screen, cycles through the
    preset fields, and commits a pending edit. UP/DOWN nudge the selected
    preset one unit step, pinned to the nearest legal value so a commit can
    never violate the settings invariants. BACK abandons a pending edit, or
    leaves the settings screen.
    """
    ui = state.ui
    if ui.screen is Screen.MAIN:
        if button is Button.SET:
            ui.screen = Screen.SETTINGS
            ui.field_index = 0
            ui.pending = None
        return state

    # Settings screen
    if button in (Button.UP, Button.DOWN):
        f = PRESET_FIELDS[ui.field_index]
        current = ui.pending if ui.pending is not None else getattr(state.settings, f.attr)
        delta = f.step if button is Button.UP else -f.step
        lo, hi = _field_bounds(state.settings, ui.field_index)
        ui.pending = min(max(current + delta, lo), hi)
    elif button is Button.SET:
        if ui.pending is not None:
            f = PRESET_FIELDS[ui.field_index]
            lo, hi = _field_bounds(state.settings, ui.field_index)
            setattr(state.settings, f.attr, min(max(ui.pending, lo), hi))
            state.settings.validate()
            ui.pending = None
        else:
            ui.field_index = (ui.field_index + 1) % len(PRESET_FIELDS)
    elif button is Button.BACK:
        if ui.pending is not None:
            ui.pending = None
        else:
            ui.screen = Screen.MAIN
            ui.field_index = 0
    return state
