"""Raw ADC code to display-unit conversions.

Everything here mirrors what the 8-bit controller firmware computes: all
arithmetic is truncating integer arithmetic, no floats. The battery channel
is calibrated to 16 ADC counts per volt (10-bit ADC, 5.00 V reference,
trimmer scaled for a 64 V full scale), the temperature channel reads a
10 mV/degC analog sensor against the same reference.
"""

from __future__ import annotations

from enum import Enum
from typing import NamedTuple

ADC_MAX = 1023

TEMP_CLAMP_MIN_C = 0
TEMP_CLAMP_MAX_C = 150


class AdcChannel(Enum):
    """The two ADC inputs the controller actually samples."""

    TEMP0 = "Temp0"
    BATT1 = "Batt1"


class AdcSample(NamedTuple):
    channel: AdcChannel
    code: int  # 0..1023


class DisplayVoltage(NamedTuple):
    """Battery voltage as the firmware displays it: whole volts plus tenths."""

    whole: int   # 0..63
    tenths: int  # 0..9
    text: str    # e.g. "48.4"

    @property
    def total_tenths(self) -> int:
        """Voltage in tenths of a volt, the unit the thresholds use."""
        return self.whole * 10 + self.tenths


def _check_code(code: int) -> None:
    if not isinstance(code, int) or isinstance(code, bool):
        raise ValueError(f"ADC code must be an integer, got {code!r}")
    if not 0 <= code <= ADC_MAX:
        raise ValueError(f"ADC code {code} outside 0..{ADC_MAX}")


def battery_voltage_from_adc(code: int) -> DisplayVoltage:
    """Convert a raw battery-channel code to the displayed voltage.

    whole  = code / 16            (truncating)
    tenths = ((code mod 16) * 10) / 16   (truncating)

    The rendered text is the whole part, a period, then the tenths digit.
    Raises ValueError on a code outside 0..1023; the ADC model guarantees
    range, so an out-of-range code is a caller bug, never clamped.
    """
    _check_code(code)
    whole = code // 16
    tenths = ((code % 16) * 10) // 16
    return DisplayVoltage(whole, tenths, f"{whole}.{tenths}")


def temperature_from_adc(code: int) -> int:
    """Convert a raw temperature-channel code to whole degrees Celsius.

    The sensor outputs 10 mV/degC into a 5.00 V, 10-bit ADC, so
    celsius = code * 500 / 1024 (truncating), clamped to the sensor's
    usable 0..150 degC span (clamped, never wrapped).
    """
    _check_code(code)
    celsius = (code * 500) // 1024
    if celsius > TEMP_CLAMP_MAX_C:
        return TEMP_CLAMP_MAX_C
    if celsius < TEMP_CLAMP_MIN_C:
        return TEMP_CLAMP_MIN_C
    return celsius
