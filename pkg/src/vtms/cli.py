"""Command-line entry points.

    vtms run <scenario-file> [--trace out.csv] [--until s] [--state file]
    vtms selftest
    vtms serve [--port N] [--time-scale X] [--scenario file] [--state file]

Exit codes: 0 success, 1 validation error, 2 internal invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections import Counter
from fractions import Fraction

from .controller import Settings
from .conversions import battery_voltage_from_adc, temperature_from_adc
from .harness import (
    DEFAULT_STATE_FILE,
    Scenario,
    ScenarioError,
    load_scenario_file,
    run_scenario,
    trace_bytes,
    write_trace,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INVARIANT = 2


def _cmd_run(args) -> int:
    scenario = load_scenario_file(args.scenario)
    rows = run_scenario(scenario, state_file=args.state, until_s=args.until)
    if args.trace:
        write_trace(rows, args.trace)
        print(f"wrote {len(rows)} rows to {args.trace}")
    modes = Counter(r.mode for r in rows)
    alarms_seen = sorted(
        name
        for name in (
            "alarm_mains_fail", "alarm_low_fuel", "alarm_genset_on_load",
            "alarm_high_temperature", "alarm_genset_fault", "alarm_service_hour",
        )
        if any(getattr(r, name) for r in rows)
    )
    print(f"scenario {scenario.name}: {len(rows)} ticks, {rows[-1].t_s:.1f} s simulated")
    print("modes: " + ", ".join(f"{m}={n}" for m, n in modes.most_common()))
    print("alarms raised: " + (", ".join(a[6:] for a in alarms_seen) or "none"))
    return EXIT_OK


def _cmd_selftest(args) -> int:
    failures = 0

    # Display-voltage arithmetic against the exact rational oracle.
    for code in range(1024):
        dv = battery_voltage_from_adc(code)
        volts = Fraction(code, 16)
        whole = int(volts)
        tenths = int((volts - whole) * 10)
        if (dv.whole, dv.tenths) != (whole, tenths):
            print(f"FAIL conversion oracle at code {code}: {dv} != {(whole, tenths)}")
            failures += 1
        err = volts - (dv.whole + Fraction(dv.tenths, 10))
        if not 0 <= err < Fraction(1, 10):
            print(f"FAIL tenths tightness at code {code}: err {err}")
            failures += 1
    print("conversion oracle: 1024 codes checked")

    # Temperature conversion bounds and monotonicity.
    prev = -1
    for code in range(1024):
        c = temperature_from_adc(code)
        if not 0 <= c <= 150 or c < min(prev, 150):
            print(f"FAIL temperature conversion at code {code}")
            failures += 1
        prev = c
    print("temperature conversion: 1024 codes checked")

    # Round-trip calibration on the 0.1 V grid.
    from .plant import adc_from_battery_voltage

    for k in range(400, 561):
        volts = k / 10.0
        dv = battery_voltage_from_adc(adc_from_battery_voltage(volts, 1.0).code)
        err = dv.whole + dv.tenths / 10.0 - volts
        if not -(0.1 + 1 / 32) < err <= 1 / 32:
            print(f"FAIL round-trip at {volts} V: shows {dv.text}")
            failures += 1
    print("round-trip calibration: 40.0..56.0 V checked")

    # Determinism of a short closed-loop run.
    probe = Scenario(name="selftest", duration_s=20.0)
    if trace_bytes(run_scenario(probe)) != trace_bytes(run_scenario(probe)):
        print("FAIL determinism: repeated runs differ")
        failures += 1
    else:
        print("determinism probe: repeated 20 s runs byte-identical")

    Settings().validate()
    if failures:
        print(f"selftest: {failures} failure(s)")
        return EXIT_INVARIANT
    print("selftest: all checks passed")
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .service import serve  # deferred: keeps batch runs free of the server

    scenario = load_scenario_file(args.scenario) if args.scenario else None
    serve(
        port=args.port,
        scenario=scenario,
        time_scale=args.time_scale,
        state_file=args.state,
        console_dir=args.console_dir,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vtms", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario to completion")
    p_run.add_argument("scenario", help="scenario file (JSON)")
    p_run.add_argument("--trace", help="write the per-tick trace CSV here")
    p_run.add_argument("--until", type=float, default=None, help="stop after this many simulated seconds")
    p_run.add_argument("--state", default=None, help="state file for persisted counters")
    p_run.set_defaults(func=_cmd_run)

    p_self = sub.add_parser("selftest", help="exhaustive conversion oracle and invariant checks")
    p_self.set_defaults(func=_cmd_selftest)

    p_serve = sub.add_parser("serve", help="run the live service")
    p_serve.add_argument("--port", type=int, default=8080)
    p_serve.add_argument("--time-scale", type=float, default=60.0, help="simulated seconds per wall second")
    p_serve.add_argument("--scenario", default=None, help="optional scenario providing params and scripted events")
    p_serve.add_argument("--state", default=DEFAULT_STATE_FILE, help="state file for persisted counters")
    p_serve.add_argument("--console-dir", default=None, help="serve a static operator console from this directory")
    p_serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, FileNotFoundError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except KeyboardInterrupt:
        return EXIT_OK
    except Exception as e:  # internal invariant violation
        log.exception("internal error")
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
