"""A full day without grid power: battery and genset alternate 6 h / 6 h.

Runs the mains-out-24h scenario (864k ticks) and summarizes the source
phases, fuel burn, and battery swing. Takes roughly ten seconds.
"""

import pathlib
import time

from vtms.harness import load_scenario_file, run_scenario

scenario_path = pathlib.Path(__file__).resolve().parent.parent / "scenarios" / "mains-out-24h.json"
scenario = load_scenario_file(str(scenario_path))

print(f"running {scenario.name} ({scenario.duration_s:.0f} s simulated)...")
t0 = time.perf_counter()
rows = run_scenario(scenario)
print(f"{len(rows)} ticks in {time.perf_counter() - t0:.1f} s wall\n")

print("source phases:")
cur, start = None, 0.0
for r in rows + [None]:
    mode = r.mode if r else None
    if mode != cur:
        if cur in ("BatteryPhase", "GensetPhase", "GensetCranking"):
            print(f"  {cur:16s} {start:9.1f} .. {prev_t:9.1f}  ({prev_t - start + 0.1:8.1f} s)")
        cur, start = mode, r.t_s if r else 0.0
    if r:
        prev_t = r.t_s

fuel_used = rows[0].fuel_l - rows[-1].fuel_l
socs = [r.soc for r in rows]
print(f"\nfuel burned: {fuel_used:.1f} L")
print(f"battery soc swing: {min(socs):.3f} .. {max(socs):.3f}")
print(f"room temperature peak: {max(r.room_temp_c for r in rows):.1f} C "
      f"(high-temp alarm seen: {any(r.alarm_high_temperature for r in rows)})")
