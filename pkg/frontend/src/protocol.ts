// Wire protocol of the session service (see ../docs/protocol.md).
// One JSON object per WebSocket text frame.

export interface StateFlags {
  detected: boolean;
  faulted: boolean;
  saturated: boolean;
  limit_hit: boolean;
}

export interface StateMessage {
  type: "state" | "hello";
  t: number;
  theta_deg: [number, number];
  phi_deg: [number, number];
  k: [number, number];
  ee_mm: [number, number];
  r: [number, number];
  epsilon_r: [number, number];
  fsm_state: "S1" | "S2" | "S3" | "S4";
  in_transit: boolean;
  knife: boolean;
  paused: boolean;
  target_mm: [number, number] | null;
  requested_target_mm: [number, number] | null;
  clamped_target_mm: [number, number] | null;
  flags: StateFlags;
}

export interface AckMessage {
  type: "ack";
  command: string;
  clamped_target: [number, number] | null;
}

export interface ErrorMessage {
  type: "error";
  message: string;
}

export type ServerMessage = StateMessage | AckMessage | ErrorMessage;

export type ButtonId = "B1" | "B2" | "B3";

export type CommandMessage =
  | { type: "button"; id: ButtonId; value: boolean }
  | { type: "set_target"; x_mm: number; y_mm: number }
  | { type: "reset" }
  | { type: "pause" }
  | { type: "resume" }
  | { type: "set_speed_scale"; value: number };

function isPair(v: unknown): v is [number, number] {
  return Array.isArray(v) && v.length === 2 &&
    typeof v[0] === "number" && typeof v[1] === "number";
}

/** Parse and validate one server frame; null for anything malformed. */
export function parseServerMessage(raw: string): ServerMessage | null {
  let obj: unknown;
  try {
    obj = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) return null;
  const msg = obj as Record<string, unknown>;
  switch (msg.type) {
    case "ack":
      return { type: "ack", command: String(msg.command ?? ""),
               clamped_target: isPair(msg.clamped_target) ? msg.clamped_target : null };
    case "error":
      return { type: "error", message: String(msg.message ?? "") };
    case "state":
    case "hello": {
      if (!isPair(msg.theta_deg) || !isPair(msg.ee_mm) || !isPair(msg.k) ||
          !isPair(msg.r) || !isPair(msg.epsilon_r) ||
          typeof msg.t !== "number" || typeof msg.fsm_state !== "string") {
        return null;
      }
      const flags = (msg.flags ?? {}) as Record<string, unknown>;
      return {
        type: msg.type,
        t: msg.t,
        theta_deg: msg.theta_deg,
        phi_deg: isPair(msg.phi_deg) ? msg.phi_deg : [0, 0],
        k: msg.k,
        ee_mm: msg.ee_mm,
        r: msg.r,
        epsilon_r: msg.epsilon_r,
        fsm_state: msg.fsm_state as StateMessage["fsm_state"],
        in_transit: Boolean(msg.in_transit),
        knife: Boolean(msg.knife),
        paused: Boolean(msg.paused),
        target_mm: isPair(msg.target_mm) ? msg.target_mm : null,
        requested_target_mm:
          isPair(msg.requested_target_mm) ? msg.requested_target_mm : null,
        clamped_target_mm:
          isPair(msg.clamped_target_mm) ? msg.clamped_target_mm : null,
        flags: {
          detected: Boolean(flags.detected),
          faulted: Boolean(flags.faulted),
          saturated: Boolean(flags.saturated),
          limit_hit: Boolean(flags.limit_hit),
        },
      };
    }
    default:
      return null;
  }
}

export function encodeCommand(cmd: CommandMessage): string {
  return JSON.stringify(cmd);
}
