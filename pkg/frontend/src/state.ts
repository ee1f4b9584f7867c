// Client session state: a thin mirror of the latest server snapshot plus
// connection bookkeeping.  There is no client-side simulation and no local
// FSM inference; everything rendered comes from the last StateMessage.

import { CommandMessage, ServerMessage, StateMessage } from "./protocol.js";

export const STALE_AFTER_MS = 1000;

export interface UiSessionState {
  connected: boolean;
  lastState: StateMessage | null;
  lastReceivedAt: number | null;   // wall clock, ms
  lastError: string | null;
  lastAckTarget: [number, number] | null;
  // latched button levels as the operator set them (B3 is momentary and
  // not latched here)
  b1: boolean;
  b2: boolean;
  // target drag in progress (candidate pose, base-frame mm)
  dragCandidate: { x: number; y: number } | null;
  // commands that could not be sent while disconnected
  pending: CommandMessage[];
}

export function initialUiState(): UiSessionState {
  return {
    connected: false,
    lastState: null,
    lastReceivedAt: null,
    lastError: null,
    lastAckTarget: null,
    b1: false,
    b2: false,
    dragCandidate: null,
    pending: [],
  };
}

export function handleServerMessage(ui: UiSessionState, msg: ServerMessage,
                                    nowMs: number): UiSessionState {
  switch (msg.type) {
    case "hello":
    case "state":
      return { ...ui, lastState: msg, lastReceivedAt: nowMs, lastError: null };
    case "ack":
      return { ...ui, lastAckTarget: msg.clamped_target ?? ui.lastAckTarget };
    case "error":
      return { ...ui, lastError: msg.message };
  }
}

export function isStale(ui: UiSessionState, nowMs: number): boolean {
  return ui.lastReceivedAt === null ||
    nowMs - ui.lastReceivedAt > STALE_AFTER_MS;
}

/** Queue a command while offline; flushed in order on reconnect. */
export function queueCommand(ui: UiSessionState,
                             cmd: CommandMessage): UiSessionState {
  return { ...ui, pending: [...ui.pending, cmd] };
}

export function takePending(ui: UiSessionState):
    { ui: UiSessionState; commands: CommandMessage[] } {
  return { ui: { ...ui, pending: [] }, commands: ui.pending };
}

/** Target drags are only meaningful while the server is in setting mode. */
export function dragEnabled(ui: UiSessionState): boolean {
  return ui.lastState !== null && ui.lastState.fsm_state === "S3" &&
    !ui.lastState.flags.faulted;
}
