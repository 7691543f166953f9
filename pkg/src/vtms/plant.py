"""Simulated BTS equipment room.

Mains grid, transfer switch, diesel genset with a fuel tank and float
switch, a 48 V battery bank with an open-circuit-voltage curve, a lumped
room thermal model, and the sensor/trimmer chain that turns the physical
quantities into the relay and ADC inputs the controller sees. Physics are
simple explicit-Euler at the shared tick: the controller is threshold
driven, so monotone fidelity and determinism matter, electrical transients
do not.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional

from .controller import ControllerInputs
from .conversions import ADC_MAX, AdcChannel, AdcSample

log = logging.getLogger(__name__)

DEFAULT_OCV_TABLE = (
    (0.0, 42.0),
    (0.1, 45.0),
    (0.5, 48.5),
    (0.9, 51.0),
    (1.0, 54.0),
)


@dataclass(slots=True)
class PlantParams:
    """Site physics. All magnitudes are per-scenario parameters."""

    battery_capacity_wh: float = 9600.0   # 48 V x 200 Ah
    site_load_w: float = 1500.0
    charge_power_w: float = 3000.0        # only while mains/genset supplies
    ocv_table: tuple = DEFAULT_OCV_TABLE  # (soc, volts) breakpoints
    internal_resistance_ohm: float = 0.05
    fuel_capacity_l: float = 100.0
    fuel_burn_lph: float = 4.0
    low_fuel_fraction: float = 0.20
    genset_start_delay_s: float = 5.0
    ambient_c: float = 32.0
    room_thermal_capacity_j_per_c: float = 2.0e6
    heat_load_w: float = 800.0
    cooling_coeff_w_per_c: float = 60.0
    trimmer_gain: float = 1.0
    adc_dither_counts: int = 0            # deterministic +/- dither on ADC codes
    # Initial conditions, applied when the plant is constructed.
    initial_soc: float = 1.0
    initial_fuel_l: Optional[float] = None     # None -> full tank
    initial_room_temp_c: Optional[float] = None  # None -> ambient
    initial_mains_on: bool = True

    def validate(self) -> None:
        positives = (
            "battery_capacity_wh", "site_load_w", "charge_power_w",
            "internal_resistance_ohm", "fuel_capacity_l", "fuel_burn_lph",
            "genset_start_delay_s", "room_thermal_capacity_j_per_c",
            "heat_load_w", "cooling_coeff_w_per_c", "trimmer_gain",
        )
        for name in positives:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0 < self.low_fuel_fraction < 1:
            raise ValueError(f"low_fuel_fraction must be in (0, 1), got {self.low_fuel_fraction}")
        if not 0 <= self.initial_soc <= 1:
            raise ValueError(f"initial_soc must be in [0, 1], got {self.initial_soc}")
        table = tuple(self.ocv_table)
        if len(table) < 2 or table[0][0] != 0.0 or table[-1][0] != 1.0:
            raise ValueError("ocv_table must span soc 0..1")
        for (s0, v0), (s1, v1) in zip(table, table[1:]):
            if not (s1 > s0 and v1 > v0):
                raise ValueError("ocv_table must be strictly increasing in soc and volts")


class GensetState(Enum):
    OFF = "Off"
    STARTING = "Starting"
    RUNNING = "Running"
    FAULT_INJECTED = "FaultInjected"


class EventKind(Enum):
    MAINS_ON = "MainsOn"
    MAINS_OFF = "MainsOff"
    SET_FUEL = "SetFuel"
    INJECT_GENSET_FAULT = "InjectGensetFault"
    CLEAR_GENSET_FAULT = "ClearGensetFault"
    SET_AMBIENT = "SetAmbient"
    HANG_CONTROLLER = "HangController"
    RESUME_CONTROLLER = "ResumeController"
    SET_TRIMMER_GAIN = "SetTrimmerGain"


# Kinds that carry a numeric payload.
EVENT_KINDS_WITH_VALUE = frozenset(
    (EventKind.SET_FUEL, EventKind.SET_AMBIENT, EventKind.SET_TRIMMER_GAIN)
)


class ScenarioEvent(NamedTuple):
    t_s: float
    kind: EventKind
    value: Optional[float] = None


@dataclass(slots=True)
class PlantState:
    """Physical state of the room, plus the fault-injection flags."""

    mains_on: bool = True
    genset: GensetState = GensetState.OFF
    genset_start_elapsed_ms: int = 0
    soc: float = 1.0
    fuel_l: float = 100.0
    room_temp_c: float = 32.0
    ambient_c: float = 32.0       # mutable via SetAmbient
    trimmer_gain: float = 1.0     # mutable via SetTrimmerGain
    controller_hung: bool = False
    bypass_active: bool = False   # mirror of the watchdog, for traces
    t_ms: int = 0
    tick: int = 0

    @property
    def t_s(self) -> float:
        return self.t_ms / 1000.0


def plant_init(params: PlantParams) -> PlantState:
    params.validate()
    fuel = params.fuel_capacity_l if params.initial_fuel_l is None else params.initial_fuel_l
    fuel = min(max(fuel, 0.0), params.fuel_capacity_l)
    temp = params.ambient_c if params.initial_room_temp_c is None else params.initial_room_temp_c
    return PlantState(
        mains_on=params.initial_mains_on,
        soc=params.initial_soc,
        fuel_l=fuel,
        room_temp_c=temp,
        ambient_c=params.ambient_c,
        trimmer_gain=params.trimmer_gain,
    )


def _interp_ocv(table, soc: float) -> float:
    if soc <= table[0][0]:
        return table[0][1]
    for (s0, v0), (s1, v1) in zip(table, table[1:]):
        if soc <= s1:
            return v0 + (soc - s0) * (v1 - v0) / (s1 - s0)
    return table[-1][1]


def battery_terminal_voltage(soc: float, discharging: bool, params: PlantParams) -> float:
    """Terminal volts from the OCV curve, sagged by I*R while discharging."""
    ocv = _interp_ocv(params.ocv_table, soc)
    if discharging:
        current = params.site_load_w / ocv
        return ocv - current * params.internal_resistance_ohm
    return ocv


def adc_from_battery_voltage(volts: float, trimmer_gain: float) -> AdcSample:
    """Sensor chain: trimmer scales the bank voltage into the ADC range.

    Nominal gain 1.0 lands the calibrated 16 counts per volt.
    """
    code = round(volts * 16.0 * trimmer_gain)
    code = min(max(code, 0), ADC_MAX)
    return AdcSample(AdcChannel.BATT1, code)


def adc_from_temperature(celsius: float) -> AdcSample:
    """Inverse of the 10 mV/degC sensor chain into the 5.00 V ADC."""
    code = round(celsius * 1024.0 / 500.0)
    code = min(max(code, 0), ADC_MAX)
    return AdcSample(AdcChannel.TEMP0, code)


def _dither(code: int, amount: int, tick: int) -> int:
    """Deterministic measurement noise: +amount on even ticks, - on odd."""
    if amount == 0:
        return code
    code += amount if (tick & 1) == 0 else -amount
    return min(max(code, 0), ADC_MAX)


def plant_step(
    state: PlantState, params: PlantParams, genset_cmd: bool, dt: float
) -> tuple[PlantState, ControllerInputs]:
    """Advance the room by one tick and read back the controller's inputs.

    `genset_cmd` is the start relay as the plant sees it (controller output
    or watchdog bypass, composed by the harness).
    """
    dt_h = dt / 3600.0

    # Genset: start delay, run, stall on empty tank or injected fault.
    g = state.genset
    if g is GensetState.FAULT_INJECTED:
        pass  # latched until a ClearGensetFault event
    elif not genset_cmd:
        state.genset = GensetState.OFF
        state.genset_start_elapsed_ms = 0
    elif state.fuel_l <= 0.0:
        state.genset = GensetState.OFF
        state.genset_start_elapsed_ms = 0
    elif g is GensetState.OFF:
        state.genset = GensetState.STARTING
        state.genset_start_elapsed_ms = round(dt * 1000)
        if state.genset_start_elapsed_ms >= round(params.genset_start_delay_s * 1000):
            state.genset = GensetState.RUNNING
    elif g is GensetState.STARTING:
        state.genset_start_elapsed_ms += round(dt * 1000)
        if state.genset_start_elapsed_ms >= round(params.genset_start_delay_s * 1000):
            state.genset = GensetState.RUNNING

    if state.genset is GensetState.RUNNING:
        state.fuel_l -= params.fuel_burn_lph * dt_h
        if state.fuel_l <= 0.0:
            state.fuel_l = 0.0
            state.genset = GensetState.OFF
            state.genset_start_elapsed_ms = 0

    # Power balance: mains, else genset, else the battery carries the site.
    genset_running = state.genset is GensetState.RUNNING
    battery_is_supply = not state.mains_on and not genset_running
    if battery_is_supply:
        state.soc -= params.site_load_w * dt_h / params.battery_capacity_wh
        if state.soc < 0.0:
            state.soc = 0.0
    else:
        state.soc += params.charge_power_w * dt_h / params.battery_capacity_wh
        if state.soc > 1.0:
            state.soc = 1.0

    # Room thermal: lumped capacity against ambient.
    state.room_temp_c += (
        dt
        * (params.heat_load_w - params.cooling_coeff_w_per_c * (state.room_temp_c - state.ambient_c))
        / params.room_thermal_capacity_j_per_c
    )

    state.t_ms += round(dt * 1000)
    state.tick += 1

    volts = battery_terminal_voltage(state.soc, battery_is_supply, params)
    batt = adc_from_battery_voltage(volts, state.trimmer_gain)
    temp = adc_from_temperature(state.room_temp_c)
    if params.adc_dither_counts:
        batt = AdcSample(batt.channel, _dither(batt.code, params.adc_dither_counts, state.tick))
        temp = AdcSample(temp.channel, _dither(temp.code, params.adc_dither_counts, state.tick))

    inputs = ControllerInputs(
        mains_fail=not state.mains_on,
        low_fuel=state.fuel_l <= params.low_fuel_fraction * params.fuel_capacity_l,
        genset_supply_present=genset_running,
        adc_temp=temp,
        adc_batt=batt,
    )
    return state, inputs


def apply_event(state: PlantState, event: ScenarioEvent, params: PlantParams) -> PlantState:
    """Apply a scripted plant event immediately."""
    kind = event.kind
    if kind is EventKind.MAINS_ON:
        state.mains_on = True
    elif kind is EventKind.MAINS_OFF:
        state.mains_on = False
    elif kind is EventKind.SET_FUEL:
        value = float(event.value)
        if value < 0.0:
            raise ValueError(f"fuel must be >= 0, got {value}")
        if value > params.fuel_capacity_l:
            log.warning(
                "SetFuel %.1f L exceeds tank capacity %.1f L, clamping",
                value, params.fuel_capacity_l,
            )
            value = params.fuel_capacity_l
        state.fuel_l = value
    elif kind is EventKind.INJECT_GENSET_FAULT:
        state.genset = GensetState.FAULT_INJECTED
        state.genset_start_elapsed_ms = 0
    elif kind is EventKind.CLEAR_GENSET_FAULT:
        if state.genset is GensetState.FAULT_INJECTED:
            state.genset = GensetState.OFF
    elif kind is EventKind.SET_AMBIENT:
        state.ambient_c = float(event.value)
    elif kind is EventKind.HANG_CONTROLLER:
        state.controller_hung = True
    elif kind is EventKind.RESUME_CONTROLLER:
        state.controller_hung = False
    elif kind is EventKind.SET_TRIMMER_GAIN:
        value = float(event.value)
        if value <= 0.0:
            raise ValueError(f"trimmer gain must be positive, got {value}")
        state.trimmer_gain = value
    else:  # pragma: no cover - enum is exhaustive
        raise ValueError(f"unhandled event kind {kind}")
    return state
