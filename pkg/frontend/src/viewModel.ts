/**
 * Pure projection from a service snapshot to everything the panel draws.
 * No client-side simulation: the panel is a function of the latest accepted
 * snapshot, nothing else.
 */

import { LED_ORDER, Snapshot, snapshotSchemaError } from "./types.js";

export interface Lamp {
  name: string;
  lit: boolean;
}

export interface PanelViewModel {
  lcdLines: string[]; // 4 x 20, verbatim, trailing spaces intact
  ledLamps: Lamp[];   // six alarms in wire order, then on_battery, on_genset
  gauges: {
    battery_v: number;
    room_temp_c: number;
    soc_pct: number;
    fuel_pct: number;
  };
  relayBadges: { genset_start: boolean; bypass_active: boolean };
  simClock: string;
  timeScale: number;
  paused: boolean;
  mode: string;
  gensetState: string;
  serviceRuntimeS: number;
  settings: Record<string, number>;
  plantControls: { mainsOn: boolean; fuelL: number };
}

export class SnapshotSchemaError extends Error {}

const round1 = (x: number): number => Math.round(x * 10) / 10;

export function formatSimClock(tS: number): string {
  const total = Math.floor(tS);
  const h = Math.floor(total / 3600);
  const m = Math.floor((total % 3600) / 60);
  const s = total % 60;
  const pad = (n: number) => String(n).padStart(2, "0");
  return `${pad(h)}:${pad(m)}:${pad(s)}`;
}

export function buildViewModel(snapshot: Snapshot): PanelViewModel {
  const hole = snapshotSchemaError(snapshot);
  if (hole !== null) throw new SnapshotSchemaError(hole);

  return {
    lcdLines: snapshot.lcd.slice(),
    ledLamps: LED_ORDER.map((name) => ({ name, lit: snapshot.leds[name] })),
    gauges: {
      battery_v: round1(parseFloat(snapshot.controller.battery_text)),
      room_temp_c: round1(snapshot.plant.room_temp_c),
      soc_pct: round1(snapshot.plant.soc * 100),
      fuel_pct: round1((snapshot.plant.fuel_l / snapshot.plant.fuel_capacity_l) * 100),
    },
    relayBadges: {
      genset_start: snapshot.relays.genset_start,
      bypass_active: snapshot.relays.bypass_active,
    },
    simClock: formatSimClock(snapshot.t_s),
    timeScale: snapshot.time_scale,
    paused: snapshot.paused,
    mode: snapshot.controller.mode,
    gensetState: snapshot.plant.genset_state,
    serviceRuntimeS: snapshot.controller.service_runtime_s,
    settings: snapshot.settings,
    plantControls: {
      mainsOn: snapshot.plant.mains_on,
      fuelL: snapshot.plant.fuel_l,
    },
  };
}
