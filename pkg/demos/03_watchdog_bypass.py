"""The failsafe path: a dead controller must not leave the site dark.

The external watchdog misses heartbeats once the controller hangs, engages
the bypass after 2.0 s, and forces the genset start relay closed. When the
controller resumes, it reclaims authority on its first scan.
"""

from vtms.harness import Scenario, run_scenario
from vtms.plant import EventKind, ScenarioEvent

scenario = Scenario(
    name="hang-demo",
    duration_s=60.0,
    plant_overrides={"initial_soc": 0.9},
    events=[
        ScenarioEvent(0.0, EventKind.MAINS_OFF),
        ScenarioEvent(10.0, EventKind.HANG_CONTROLLER),
        ScenarioEvent(40.0, EventKind.RESUME_CONTROLLER),
    ],
)
rows = run_scenario(scenario)

marks = {}
marks["controller hangs"] = 10.1
marks["bypass engages"] = next(r.t_s for r in rows if r.bypass_active)
marks["genset running (forced)"] = next(
    r.t_s for r in rows if r.genset_supply and r.t_s > 10
)
marks["controller resumes"] = next(
    r.t_s for r in rows if r.t_s > 40 and not r.bypass_active
)
marks["genset released"] = next(
    r.t_s for r in rows if r.t_s > 40 and not r.genset_cmd
)

print("timeline:")
for label, t in marks.items():
    print(f"  {t:6.1f} s  {label}")

print("\ntick-level view around the bypass:")
for r in rows:
    if 11.9 <= r.t_s <= 12.3 or 16.9 <= r.t_s <= 17.2:
        print(
            f"  t={r.t_s:5.1f}  bypass={int(r.bypass_active)}  cmd={int(r.genset_cmd)}"
            f"  supply={int(r.genset_supply)}  mode={r.mode}"
        )
