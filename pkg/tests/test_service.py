"""Live service tests: command path, batch equivalence, HTTP surface."""

import json
import time

import httpx
import pytest

from vtms.harness import (
    Scenario,
    event_tick,
    load_scenario_file,
    run_scenario,
)
from vtms.service import (
    COMMAND_KINDS,
    LiveServer,
    LiveSimulation,
    validate_command,
)


class TestCommandValidation:
    def test_unknown_kind_lists_valid(self):
        reason = validate_command("Explode", None)
        assert "unknown command kind" in reason
        assert "MainsOff" in reason

    def test_negative_fuel_rejected(self):
        assert validate_command("SetFuel", -5) == "fuel must be >= 0"

    def test_payload_presence_rules(self):
        assert validate_command("MainsOff", None) is None
        assert validate_command("MainsOff", 1) is not None
        assert validate_command("SetFuel", None) is not None
        assert validate_command("SetFuel", 35.5) is None
        assert validate_command("Pause", None) is None
        assert validate_command("Pause", 2) is not None

    def test_button_values(self):
        assert validate_command("PressButton", "Set") is None
        assert validate_command("PressButton", "Sideways") is not None

    def test_time_scale_bounds(self):
        assert validate_command("SetTimeScale", 3600) is None
        assert validate_command("SetTimeScale", 0) is not None

    def test_all_advertised_kinds_validate_something(self):
        for kind in COMMAND_KINDS:
            assert isinstance(kind, str)


class TestBatchLiveEquivalence:
    def test_golden_replayed_as_commands_matches_batch(self, scenario_dir):
        golden = load_scenario_file(str(scenario_dir / "golden.json"))
        batch_rows = run_scenario(golden)

        silent = Scenario(
            name=golden.name,
            duration_s=golden.duration_s,
            tick_ms=golden.tick_ms,
            settings_overrides=golden.settings_overrides,
            plant_overrides=golden.plant_overrides,
            events=[],
        )
        sim = LiveSimulation(silent, time_scale=1.0)
        schedule = {}
        for e in golden.events:
            schedule.setdefault(event_tick(e.t_s, golden.tick_ms), []).append(e)
        n_ticks = round(golden.duration_s * 1000) // golden.tick_ms
        for k in range(n_ticks):
            for e in schedule.get(k, ()):
                ack = sim._apply_command(e.kind.value, e.value)
                assert ack["accepted"], ack
            sim._advance(1)
        live_rows = list(sim.trace)
        assert len(live_rows) == len(batch_rows)
        assert live_rows == batch_rows


@pytest.fixture()
def server():
    sc = Scenario(name="test", duration_s=float("inf"))
    srv = LiveServer(port=0, scenario=sc, time_scale=60.0, state_file=None)
    srv.start()
    yield srv
    srv.stop()


def wait_until(predicate, timeout=5.0, interval=0.02):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        value = predicate()
        if value:
            return value
        time.sleep(interval)
    raise AssertionError("condition not met in time")


class TestHttpApi:
    def test_snapshot_shape(self, server):
        r = httpx.get(f"http://127.0.0.1:{server.port}/api/snapshot", timeout=5)
        assert r.status_code == 200
        snap = r.json()
        assert snap["controller"]["mode"] == "MainsPowered"
        assert set(snap["leds"]) == {
            "mains_fail", "low_fuel", "genset_on_load", "high_temperature",
            "genset_fault", "service_hour", "on_battery", "on_genset",
        }
        assert not any(snap["leds"].values())
        assert len(snap["lcd"]) == 4
        assert all(len(line) == 20 for line in snap["lcd"])
        assert "genset_start" in snap["relays"] and "bypass_active" in snap["relays"]
        assert snap["settings"]["temp_alarm_on_c"] == 40

    def test_command_round_trip_mains_off(self, server):
        base = f"http://127.0.0.1:{server.port}"
        r = httpx.post(f"{base}/api/command", json={"kind": "MainsOff"}, timeout=5)
        assert r.status_code == 200
        ack = r.json()
        assert ack["accepted"]
        assert "applied_at_t_s" in ack

        def mains_alarm_lit():
            snap = httpx.get(f"{base}/api/snapshot", timeout=5).json()
            return snap["leds"]["mains_fail"] and not snap["plant"]["mains_on"]

        wait_until(mains_alarm_lit)

    def test_bad_command_is_4xx_without_state_change(self, server):
        base = f"http://127.0.0.1:{server.port}"
        r = httpx.post(f"{base}/api/command", json={"kind": "SetFuel", "value": -5}, timeout=5)
        assert r.status_code == 400
        assert r.json() == {"accepted": False, "detail": "fuel must be >= 0"}
        snap = httpx.get(f"{base}/api/snapshot", timeout=5).json()
        assert snap["plant"]["fuel_l"] == 100.0

    def test_unknown_kind_rejected(self, server):
        base = f"http://127.0.0.1:{server.port}"
        r = httpx.post(f"{base}/api/command", json={"kind": "Nope"}, timeout=5)
        assert r.status_code == 400
        assert "unknown command kind" in r.json()["detail"]

    def test_pause_freezes_time(self, server):
        base = f"http://127.0.0.1:{server.port}"
        assert httpx.post(f"{base}/api/command", json={"kind": "Pause"}, timeout=5).json()["accepted"]
        time.sleep(0.05)
        a = httpx.get(f"{base}/api/snapshot", timeout=5).json()
        time.sleep(0.2)
        b = httpx.get(f"{base}/api/snapshot", timeout=5).json()
        assert a["t_s"] == b["t_s"]
        assert a == b
        assert httpx.post(f"{base}/api/command", json={"kind": "Resume"}, timeout=5).json()["accepted"]
        wait_until(
            lambda: httpx.get(f"{base}/api/snapshot", timeout=5).json()["t_s"] > a["t_s"]
        )

    def test_buttons_drive_settings_screen(self, server):
        base = f"http://127.0.0.1:{server.port}"
        r = httpx.post(
            f"{base}/api/command", json={"kind": "PressButton", "value": "Set"}, timeout=5
        )
        assert r.json()["accepted"]

        def settings_screen_visible():
            snap = httpx.get(f"{base}/api/snapshot", timeout=5).json()
            return snap["lcd"][0].startswith("SETTINGS")

        wait_until(settings_screen_visible)

    def test_time_scale_command(self, server):
        base = f"http://127.0.0.1:{server.port}"
        r = httpx.post(
            f"{base}/api/command", json={"kind": "SetTimeScale", "value": 600}, timeout=5
        )
        assert r.json()["accepted"]
        snap = wait_until(
            lambda: httpx.get(f"{base}/api/snapshot", timeout=5).json()
        )
        assert snap["time_scale"] == 600

    def test_stream_pushes_snapshots(self, server):
        base = f"http://127.0.0.1:{server.port}"
        got = []
        with httpx.stream("GET", f"{base}/api/stream?hz=30", timeout=5) as r:
            assert r.headers["content-type"].startswith("text/event-stream")
            for line in r.iter_lines():
                if line.startswith("data: "):
                    got.append(json.loads(line[6:]))
                    if len(got) >= 3:
                        break
        assert len(got) == 3
        assert all("lcd" in snap for snap in got)
        assert got[-1]["t_s"] >= got[0]["t_s"]

    def test_trace_slice_csv(self, server):
        base = f"http://127.0.0.1:{server.port}"
        wait_until(
            lambda: httpx.get(f"{base}/api/snapshot", timeout=5).json()["t_s"] >= 2.0
        )
        r = httpx.get(f"{base}/api/trace?from_s=0.5&to_s=1.0", timeout=5)
        assert r.status_code == 200
        lines = r.text.splitlines()
        assert lines[0].startswith("t_s,mode,")
        assert len(lines) == 1 + 6  # 0.5 .. 1.0 inclusive at 100 ms
        assert lines[1].startswith("0.500,")
        assert lines[-1].startswith("1.000,")

    def test_404_for_unknown_path(self, server):
        r = httpx.get(f"http://127.0.0.1:{server.port}/api/nope", timeout=5)
        assert r.status_code == 404


class TestPersistenceThroughService:
    def test_reset_service_hours_persists(self, tmp_path):
        state = str(tmp_path / "state")
        sc = Scenario(name="svc", duration_s=float("inf"))
        sim = LiveSimulation(sc, time_scale=1.0, state_file=state)
        sim.core.controller.genset_runtime_total_ms = 7_200_000
        ack = sim._apply_command("ResetServiceHours", None)
        assert ack["accepted"]
        sim._maybe_persist(force=True)
        from vtms.harness import restore_counters

        runtime, _ = restore_counters(state)
        assert runtime == 0.0
