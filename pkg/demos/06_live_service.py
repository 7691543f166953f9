"""Drive the live service the way the operator console does.

Starts the HTTP service in-process at 600x real time, injects a mains
failure, watches the panel react, then pauses the world. The same API is
what `vtms serve` exposes and the browser console consumes.
"""

import json
import time
import urllib.request

from vtms.harness import Scenario
from vtms.service import LiveServer

server = LiveServer(port=0, scenario=Scenario(name="demo", duration_s=float("inf")),
                    time_scale=600.0, state_file=None)
server.start()
base = f"http://127.0.0.1:{server.port}"


def get_snapshot():
    with urllib.request.urlopen(f"{base}/api/snapshot", timeout=5) as r:
        return json.loads(r.read())


def post(kind, value=None):
    body = json.dumps({"kind": kind, **({"value": value} if value is not None else {})})
    req = urllib.request.Request(
        f"{base}/api/command", body.encode(), {"Content-Type": "application/json"}
    )
    with urllib.request.urlopen(req, timeout=5) as r:
        return json.loads(r.read())


try:
    time.sleep(0.3)
    snap = get_snapshot()
    print(f"t={snap['t_s']:8.1f}s  mode={snap['controller']['mode']:14s}  "
          f"lcd[0]={snap['lcd'][0]!r}")

    print("\n-> MainsOff")
    print("   ack:", post("MainsOff"))
    time.sleep(0.5)
    snap = get_snapshot()
    lit = [name for name, on in snap["leds"].items() if on]
    print(f"t={snap['t_s']:8.1f}s  mode={snap['controller']['mode']:14s}  leds on: {lit}")

    print("\n-> SetFuel 18 (below the 20 L float)")
    print("   ack:", post("SetFuel", 18))
    time.sleep(0.5)
    snap = get_snapshot()
    lit = [name for name, on in snap["leds"].items() if on]
    print(f"t={snap['t_s']:8.1f}s  fuel={snap['plant']['fuel_l']:.1f}L  leds on: {lit}")

    print("\n-> Pause")
    post("Pause")
    a = get_snapshot()["t_s"]
    time.sleep(0.3)
    b = get_snapshot()["t_s"]
    print(f"   paused: t stayed at {a} (== {b}: {a == b})")

    print("\nrolling trace tail:")
    with urllib.request.urlopen(f"{base}/api/trace?from_s={a - 0.3:.1f}", timeout=5) as r:
        for line in r.read().decode().splitlines()[:4]:
            print("   " + line[:96])
finally:
    server.stop()
