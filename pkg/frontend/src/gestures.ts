// Operator gestures -> command messages.  Every gesture maps to exactly one
// CommandMessage; the switches B1/B2 latch their level, the cut button B3 is
// momentary (down = pressed, up = released).

import { ButtonId, CommandMessage } from "./protocol.js";

export type Gesture =
  | { kind: "toggle"; button: "B1" | "B2"; level: boolean }
  | { kind: "press"; button: "B3" }
  | { kind: "release"; button: "B3" }
  | { kind: "drag_end"; x_mm: number; y_mm: number }
  | { kind: "reset" }
  | { kind: "pause"; paused: boolean }
  | { kind: "speed"; value: number };

export function commandForGesture(g: Gesture): CommandMessage {
  switch (g.kind) {
    case "toggle":
      return { type: "button", id: g.button, value: g.level };
    case "press":
      return { type: "button", id: "B3", value: true };
    case "release":
      return { type: "button", id: "B3", value: false };
    case "drag_end":
      return { type: "set_target", x_mm: g.x_mm, y_mm: g.y_mm };
    case "reset":
      return { type: "reset" };
    case "pause":
      return { type: g.paused ? "pause" : "resume" };
    case "speed":
      return { type: "set_speed_scale", value: g.value };
  }
}

/** A timed gesture script (the operator's hands) and its expansion into the
 * exact command sequence the service receives.  This is what makes a manual
 * console session comparable against a scripted `fsm-demo` replay. */
export interface TimedGesture {
  t: number;
  gesture: Gesture;
}

export interface TimedCommand {
  t: number;
  command: CommandMessage;
}

export function expandScript(script: TimedGesture[]): TimedCommand[] {
  return [...script]
    .sort((a, b) => a.t - b.t)
    .map(({ t, gesture }) => ({ t, command: commandForGesture(gesture) }));
}

/** The canonical bimanual-eating sequence: home -> dish -> hand-set ->
 * cut -> home. */
export function eatingSequence(): TimedGesture[] {
  return [
    { t: 0.5, gesture: { kind: "toggle", button: "B1", level: true } },
    { t: 8.0, gesture: { kind: "toggle", button: "B2", level: true } },
    { t: 9.0, gesture: { kind: "drag_end", x_mm: -80.0, y_mm: 640.0 } },
    { t: 10.0, gesture: { kind: "toggle", button: "B2", level: false } },
    { t: 14.0, gesture: { kind: "press", button: "B3" } },
    { t: 15.5, gesture: { kind: "release", button: "B3" } },
    { t: 17.0, gesture: { kind: "toggle", button: "B1", level: false } },
  ];
}

/** The same sequence in the CLI's JSON-lines event-script form. */
export function toEventScriptLines(script: TimedGesture[]): string[] {
  return expandScript(script).map(({ t, command }) => {
    if (command.type === "button") {
      return JSON.stringify({ t, button: command.id, value: command.value });
    }
    return JSON.stringify({ t, command });
  });
}
