"""BTS-room power controller simulator.

A deterministic, firmware-style model of the monitoring/transfer controller
used in telecom battery sites (mains / diesel genset / 48 V battery bank),
closed-looped against a simulated equipment room. Ships as a library plus a
scenario batch runner and a live operator service.
"""

__version__ = "0.1.0"
