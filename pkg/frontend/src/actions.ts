/**
 * Maps every bench/panel control to the exact command message the service
 * accepts. The panel never mutates state itself; these are the only writes.
 */

import { ButtonName, Command } from "./types.js";

export type UiAction =
  | { type: "toggleMains"; mainsOn: boolean }
  | { type: "commitFuel"; liters: number }
  | { type: "toggleGensetFault"; faulted: boolean }
  | { type: "setAmbient"; celsius: number }
  | { type: "hangController" }
  | { type: "resumeController" }
  | { type: "pressButton"; button: ButtonName }
  | { type: "setTimeScale"; scale: number }
  | { type: "togglePause"; paused: boolean }
  | { type: "resetServiceHours" };

export function commandForAction(action: UiAction): Command {
  switch (action.type) {
    case "toggleMains":
      return { kind: action.mainsOn ? "MainsOff" : "MainsOn" };
    case "commitFuel":
      return { kind: "SetFuel", value: action.liters };
    case "toggleGensetFault":
      return { kind: action.faulted ? "ClearGensetFault" : "InjectGensetFault" };
    case "setAmbient":
      return { kind: "SetAmbient", value: action.celsius };
    case "hangController":
      return { kind: "HangController" };
    case "resumeController":
      return { kind: "ResumeController" };
    case "pressButton":
      return { kind: "PressButton", value: action.button };
    case "setTimeScale":
      return { kind: "SetTimeScale", value: action.scale };
    case "togglePause":
      return { kind: action.paused ? "Resume" : "Pause" };
    case "resetServiceHours":
      return { kind: "ResetServiceHours" };
  }
}
