/**
 * Wire types for the live-service API, plus a runtime schema check so a
 * malformed snapshot turns into an error banner instead of a broken panel.
 */

export interface LedBits {
  mains_fail: boolean;
  low_fuel: boolean;
  genset_on_load: boolean;
  high_temperature: boolean;
  genset_fault: boolean;
  service_hour: boolean;
  on_battery: boolean;
  on_genset: boolean;
}

/** Alarm relay order is a wire contract shared with the trace columns. */
export const ALARM_ORDER = [
  "mains_fail",
  "low_fuel",
  "genset_on_load",
  "high_temperature",
  "genset_fault",
  "service_hour",
] as const;

export const LED_ORDER = [...ALARM_ORDER, "on_battery", "on_genset"] as const;

export interface Snapshot {
  t_s: number;
  time_scale: number;
  paused: boolean;
  lcd: string[];
  leds: LedBits;
  relays: { genset_start: boolean; bypass_active: boolean };
  plant: {
    mains_on: boolean;
    soc: number;
    fuel_l: number;
    fuel_capacity_l: number;
    room_temp_c: number;
    genset_state: string;
  };
  controller: {
    mode: string;
    battery_text: string;
    temperature_c: number;
    service_runtime_s: number;
  };
  settings: Record<string, number>;
}

export type ButtonName = "Up" | "Down" | "Set" | "Back";

export interface Command {
  kind: string;
  value?: number | string;
}

export interface CommandAck {
  accepted: boolean;
  detail: string;
  applied_at_t_s?: number;
}

/** Returns null for a schema-valid snapshot, else a description of the hole. */
export function snapshotSchemaError(x: unknown): string | null {
  if (typeof x !== "object" || x === null) return "snapshot is not an object";
  const s = x as Record<string, unknown>;
  for (const key of ["t_s", "time_scale"]) {
    if (typeof s[key] !== "number") return `missing numeric ${key}`;
  }
  if (!Array.isArray(s.lcd) || s.lcd.length !== 4) return "lcd is not 4 lines";
  for (const line of s.lcd as unknown[]) {
    if (typeof line !== "string" || line.length !== 20) {
      return "lcd line is not 20 characters";
    }
  }
  const leds = s.leds as Record<string, unknown> | undefined;
  if (typeof leds !== "object" || leds === null) return "missing leds";
  for (const name of LED_ORDER) {
    if (typeof leds[name] !== "boolean") return `missing led bit ${name}`;
  }
  const relays = s.relays as Record<string, unknown> | undefined;
  if (typeof relays?.genset_start !== "boolean" || typeof relays?.bypass_active !== "boolean") {
    return "missing relays";
  }
  const plant = s.plant as Record<string, unknown> | undefined;
  for (const key of ["soc", "fuel_l", "fuel_capacity_l", "room_temp_c"]) {
    if (typeof plant?.[key] !== "number") return `missing plant.${key}`;
  }
  const controller = s.controller as Record<string, unknown> | undefined;
  if (typeof controller?.mode !== "string" || typeof controller?.battery_text !== "string") {
    return "missing controller fields";
  }
  return null;
}
