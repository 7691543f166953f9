"""What the 4x20 panel shows as a site event unfolds.

Renders the controller's display frames for a scripted afternoon: normal
operation, a mains failure, a genset run with a low fuel warning, and a
walk through the settings screens.
"""

from vtms.controller import (
    ALARMS_NONE,
    AlarmSet,
    Button,
    ControllerMode,
    Settings,
    apply_button,
    controller_init,
)
from vtms.conversions import battery_voltage_from_adc
from vtms.lcd import render_main, render_settings


def show(title, frame):
    print(title)
    print("  +" + "-" * 20 + "+")
    for line in frame.lines:
        print(f"  |{line}|")
    print("  +" + "-" * 20 + "+\n")


show(
    "quiet afternoon, on mains:",
    render_main(battery_voltage_from_adc(775), 34, ControllerMode.MAINS_POWERED, ALARMS_NONE),
)

show(
    "grid drops, battery takes the site:",
    render_main(
        battery_voltage_from_adc(770), 35, ControllerMode.BATTERY_PHASE,
        AlarmSet(True, False, False, False, False, False),
    ),
)

show(
    "genset on load, fuel float just tripped:",
    render_main(
        battery_voltage_from_adc(816), 37, ControllerMode.GENSET_PHASE,
        AlarmSet(True, True, True, False, False, False),
    ),
)

state = controller_init(Settings(), 0)
apply_button(state, Button.SET)
show("operator opens the settings screens:", render_settings(state.settings, state.ui))

apply_button(state, Button.UP)
show("nudges the temperature alarm preset (uncommitted *):",
     render_settings(state.settings, state.ui))

for _ in range(5):
    apply_button(state, Button.BACK)  # abandon, leave
apply_button(state, Button.SET)
for _ in range(6):
    apply_button(state, Button.SET)  # cycle to the last preset
show("scrolled to the service-interval preset:",
     render_settings(state.settings, state.ui))
