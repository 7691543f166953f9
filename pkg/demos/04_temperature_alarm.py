"""High-temperature alarm with hysteresis: one clean on, one clean off.

The room heats toward ambient + heat_load/cooling_coeff. The alarm sets at
the first reading of 40 C and holds until a reading of 38 C, so readings
bouncing in between (sensor dither) cannot chatter the relay.
"""

from vtms.harness import Scenario, run_scenario
from vtms.plant import EventKind, ScenarioEvent

for dither in (0, 1):
    scenario = Scenario(
        name=f"temp-ramp-dither-{dither}",
        duration_s=7000.0,
        plant_overrides={
            "room_thermal_capacity_j_per_c": 2.0e4,
            "initial_room_temp_c": 32.0,
            "adc_dither_counts": dither,
        },
        events=[ScenarioEvent(4000.0, EventKind.SET_AMBIENT, 20.0)],
    )
    rows = run_scenario(scenario)
    edges = []
    prev = False
    for r in rows:
        if r.alarm_high_temperature != prev:
            edges.append((r.t_s, "ON" if r.alarm_high_temperature else "off", r.temperature_c))
        prev = r.alarm_high_temperature
    print(f"ADC dither +/-{dither} count(s): {len(edges)} transitions")
    for t, edge, temp in edges:
        print(f"  {t:7.1f} s  alarm {edge:3s} at reading {temp} C")
    print()

print("the 2 C hysteresis band spans ~4 ADC counts, so +/-1 count of")
print("measurement noise can never produce extra relay transitions")
