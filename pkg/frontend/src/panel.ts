/**
 * DOM rendering for the operator panel. The LCD is a real character grid —
 * 80 fixed cells — so the 4x20 contract is visible, trailing spaces and all.
 */

import { PanelViewModel } from "./viewModel.js";

const LAMP_LABELS: Record<string, string> = {
  mains_fail: "MAINS FAIL",
  low_fuel: "LOW FUEL",
  genset_on_load: "GEN ON LOAD",
  high_temperature: "HIGH TEMP",
  genset_fault: "GEN FAULT",
  service_hour: "SERVICE HR",
  on_battery: "ON BATTERY",
  on_genset: "ON GENSET",
};

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class Panel {
  private lcdCells: HTMLElement[] = [];
  private lamps = new Map<string, HTMLElement>();
  private gaugeBars = new Map<string, { fill: HTMLElement; label: HTMLElement }>();
  private badges = new Map<string, HTMLElement>();
  private clock!: HTMLElement;
  private modeLabel!: HTMLElement;
  private pauseLabel!: HTMLElement;

  constructor(private readonly root: HTMLElement) {
    this.buildLcd();
    this.buildLamps();
    this.buildGauges();
    this.buildStatusRow();
  }

  private buildLcd(): void {
    const lcd = el("div", "lcd");
    for (let i = 0; i < 80; i++) {
      const cell = el("span", "lcd-cell", " ");
      this.lcdCells.push(cell);
      lcd.appendChild(cell);
    }
    this.root.appendChild(lcd);
  }

  private buildLamps(): void {
    const row = el("div", "lamp-row");
    for (const [name, label] of Object.entries(LAMP_LABELS)) {
      const lamp = el("div", "lamp");
      const dot = el("span", "lamp-dot");
      lamp.appendChild(dot);
      lamp.appendChild(el("span", "lamp-label", label));
      this.lamps.set(name, dot);
      row.appendChild(lamp);
    }
    this.root.appendChild(row);
  }

  private buildGauges(): void {
    const row = el("div", "gauge-row");
    const defs: Array<[string, string, number, number]> = [
      ["battery_v", "BATTERY V", 40, 56],
      ["room_temp_c", "ROOM degC", 0, 80],
      ["soc_pct", "SOC %", 0, 100],
      ["fuel_pct", "FUEL %", 0, 100],
    ];
    for (const [key, label, , ] of defs) {
      const gauge = el("div", "gauge");
      gauge.appendChild(el("div", "gauge-title", label));
      const bar = el("div", "gauge-bar");
      const fill = el("div", "gauge-fill");
      bar.appendChild(fill);
      gauge.appendChild(bar);
      const value = el("div", "gauge-value", "-");
      gauge.appendChild(value);
      this.gaugeBars.set(key, { fill, label: value });
      row.appendChild(gauge);
    }
    this.root.appendChild(row);
    this.gaugeRanges = Object.fromEntries(defs.map(([k, , lo, hi]) => [k, [lo, hi]]));
  }

  private gaugeRanges: Record<string, [number, number]> = {};

  private buildStatusRow(): void {
    const row = el("div", "status-row");
    this.clock = el("span", "sim-clock", "00:00:00");
    this.modeLabel = el("span", "mode-label", "-");
    this.pauseLabel = el("span", "pause-label", "");
    for (const name of ["genset_start", "bypass_active"]) {
      const badge = el("span", "relay-badge", name.replace("_", " ").toUpperCase());
      this.badges.set(name, badge);
      row.appendChild(badge);
    }
    row.appendChild(this.clock);
    row.appendChild(this.modeLabel);
    row.appendChild(this.pauseLabel);
    this.root.appendChild(row);
  }

  render(vm: PanelViewModel): void {
    const flat = vm.lcdLines.join("");
    for (let i = 0; i < 80; i++) {
      const ch = flat[i] ?? " ";
      if (this.lcdCells[i].textContent !== ch) this.lcdCells[i].textContent = ch;
    }
    for (const lamp of vm.ledLamps) {
      this.lamps.get(lamp.name)?.classList.toggle("lit", lamp.lit);
    }
    for (const [key, value] of Object.entries(vm.gauges)) {
      const gauge = this.gaugeBars.get(key);
      if (!gauge) continue;
      const [lo, hi] = this.gaugeRanges[key];
      const frac = Math.min(Math.max((value - lo) / (hi - lo), 0), 1);
      gauge.fill.style.width = `${(frac * 100).toFixed(1)}%`;
      gauge.label.textContent = value.toFixed(1);
    }
    this.badges.get("genset_start")?.classList.toggle("on", vm.relayBadges.genset_start);
    this.badges.get("bypass_active")?.classList.toggle("on", vm.relayBadges.bypass_active);
    this.clock.textContent = `${vm.simClock}  (x${vm.timeScale})`;
    this.modeLabel.textContent = vm.mode;
    this.pauseLabel.textContent = vm.paused ? "PAUSED" : "";
  }
}
