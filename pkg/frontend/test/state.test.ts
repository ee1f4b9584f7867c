import { describe, expect, it } from "vitest";

import { parseServerMessage, StateMessage } from "../src/protocol.js";
import { dragEnabled, handleServerMessage, initialUiState, isStale,
         queueCommand, takePending } from "../src/state.js";

function stateMsg(overrides: Partial<StateMessage> = {}): StateMessage {
  const base = parseServerMessage(JSON.stringify({
    type: "state", t: 0.5,
    theta_deg: [5, 10], phi_deg: [5, 10], k: [8000, 8000],
    ee_mm: [11.2, 1214.4], r: [0, 0], epsilon_r: [9.8, 9.4],
    fsm_state: "S1", in_transit: false, knife: false, paused: false,
    target_mm: null, requested_target_mm: null, clamped_target_mm: null,
    flags: { detected: false, faulted: false, saturated: false, limit_hit: false },
  })) as StateMessage;
  return { ...base, ...overrides };
}

describe("UiSessionState", () => {
  it("mirrors the latest state message and tracks staleness", () => {
    let ui = initialUiState();
    expect(isStale(ui, 0)).toBe(true);
    ui = handleServerMessage(ui, stateMsg(), 1000);
    expect(ui.lastState?.fsm_state).toBe("S1");
    expect(isStale(ui, 1500)).toBe(false);
    expect(isStale(ui, 2500)).toBe(true);   // > 1 s without data
  });

  it("keeps the last error until fresh data arrives", () => {
    let ui = initialUiState();
    ui = handleServerMessage(ui, { type: "error", message: "bad" }, 10);
    expect(ui.lastError).toBe("bad");
    ui = handleServerMessage(ui, stateMsg(), 20);
    expect(ui.lastError).toBeNull();
  });

  it("queues commands offline and flushes them in order", () => {
    let ui = initialUiState();
    ui = queueCommand(ui, { type: "button", id: "B1", value: true });
    ui = queueCommand(ui, { type: "reset" });
    const { ui: drained, commands } = takePending(ui);
    expect(commands.map((c) => c.type)).toEqual(["button", "reset"]);
    expect(drained.pending).toEqual([]);
  });

  it("enables target drags only in setting mode", () => {
    let ui = initialUiState();
    expect(dragEnabled(ui)).toBe(false);
    ui = handleServerMessage(ui, stateMsg({ fsm_state: "S2" }), 0);
    expect(dragEnabled(ui)).toBe(false);
    ui = handleServerMessage(ui, stateMsg({ fsm_state: "S3" }), 0);
    expect(dragEnabled(ui)).toBe(true);
    const faulted = stateMsg({ fsm_state: "S3" });
    faulted.flags = { ...faulted.flags, faulted: true };
    ui = handleServerMessage(ui, faulted, 0);
    expect(dragEnabled(ui)).toBe(false);
  });

  it("records the acknowledged clamped target", () => {
    let ui = initialUiState();
    ui = handleServerMessage(
      ui, { type: "ack", command: "set_target", clamped_target: [-40, 630] }, 0);
    expect(ui.lastAckTarget).toEqual([-40, 630]);
  });
});
