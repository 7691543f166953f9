"""4x20 character display renderer.

Pure functions from controller values to a frozen frame layout. Every frame
is exactly four lines of exactly twenty ASCII characters; the battery text
is placed verbatim from the conversion result, never recomputed here.
"""

from __future__ import annotations

from typing import NamedTuple

from .controller import (
    ALARM_NAMES,
    AlarmSet,
    ControllerMode,
    PRESET_FIELDS,
    ScreenCursor,
    Settings,
)
from .conversions import DisplayVoltage

COLS = 20
ROWS = 4

_SRC_CODE = {
    ControllerMode.MAINS_POWERED: "MAIN",
    ControllerMode.BATTERY_PHASE: "BATT",
    ControllerMode.GENSET_CRANKING: "CRNK",
    ControllerMode.GENSET_PHASE: "GEN",
    ControllerMode.GENSET_COOLDOWN: "COOL",
}


class LcdFrame(NamedTuple):
    lines: tuple[str, str, str, str]

    def text(self) -> str:
        return "\n".join(self.lines)


def _pad(line: str) -> str:
    if len(line) > COLS:
        raise ValueError(f"line overflows the display: {line!r}")
    return line.ljust(COLS)


def _frame(*lines: str) -> LcdFrame:
    assert len(lines) == ROWS
    return LcdFrame(tuple(_pad(l) for l in lines))


def render_main(
    battery: DisplayVoltage,
    temperature: int,
    mode: ControllerMode,
    alarms: AlarmSet,
) -> LcdFrame:
    """The monitoring screen: voltage, temperature, source, alarm summary."""
    line1 = f"VTMS  BATT: {battery.text:>4}V"
    line2 = f"TEMP: {temperature:>3}C  SRC:{_SRC_CODE[mode]:<4}"
    active = [name for name, on in zip(ALARM_NAMES, alarms) if on]
    if active:
        line3 = f"ALM: {active[0]}"
        extra = len(active) - 1
        if extra == 0:
            line4 = ""
        elif extra == 1:
            line4 = "+1 MORE ALARM"
        else:
            line4 = f"+{extra} MORE ALARMS"
    else:
        line3 = "STATUS: NORMAL"
        line4 = ""
    return _frame(line1, line2, line3, line4)


def _format_value(value: int, unit: str) -> str:
    if unit == "V":
        return f"{value // 10}.{value % 10}"
    if unit == "H":
        return str(value // 3600)
    return str(value)


def render_settings(settings: Settings, cursor: ScreenCursor) -> LcdFrame:
    """The preset editor: a three-row window over the preset list.

    The window is anchored so the selected field stays visible; a `>` marks
    the cursor row and a `*` marks an uncommitted edit value.
    """
    n = len(PRESET_FIELDS)
    window_start = min(cursor.field_index, n - 3)
    lines = ["SETTINGS"]
    for i in range(window_start, window_start + 3):
        f = PRESET_FIELDS[i]
        selected = i == cursor.field_index
        marker = ">" if selected else " "
        if selected and cursor.pending is not None:
            value, pend = cursor.pending, "*"
        else:
            value, pend = getattr(settings, f.attr), " "
        lines.append(f"{marker}{f.label:<10}{_format_value(value, f.unit):>6}{f.unit}{pend}")
    return _frame(*lines)
