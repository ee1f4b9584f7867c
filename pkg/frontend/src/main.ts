// Console entry point: WebSocket wiring, gesture handlers, render loop.
// Messages are coalesced to the latest state per animation frame; the only
// source of truth is the service.

import { commandForGesture, Gesture } from "./gestures.js";
import { CommandMessage, encodeCommand, parseServerMessage } from "./protocol.js";
import * as render from "./render.js";
import type { Viewport } from "./render.js";
import { dragEnabled, handleServerMessage, initialUiState, isStale,
         queueCommand, takePending, UiSessionState } from "./state.js";

let ui: UiSessionState = initialUiState();
let ws: WebSocket | null = null;
let reconnectDelay = 500;

const params = new URLSearchParams(window.location.search);
const host = params.get("host") ?? "127.0.0.1";
const port = params.get("port") ?? "8765";
const url = `ws://${host}:${port}`;

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const banner = document.getElementById("banner")!;
const statusEl = document.getElementById("status")!;
const residualEl = document.getElementById("residuals")!;
const gaugeK1 = document.getElementById("gauge-k1") as HTMLProgressElement;
const gaugeK2 = document.getElementById("gauge-k2") as HTMLProgressElement;
const b1 = document.getElementById("b1") as HTMLInputElement;
const b2 = document.getElementById("b2") as HTMLInputElement;
const b3 = document.getElementById("b3") as HTMLButtonElement;
const resetBtn = document.getElementById("reset") as HTMLButtonElement;
const pauseBtn = document.getElementById("pause") as HTMLInputElement;
const speed = document.getElementById("speed") as HTMLInputElement;

function send(cmd: CommandMessage) {
  if (ws && ws.readyState === WebSocket.OPEN) {
    ws.send(encodeCommand(cmd));
  } else {
    ui = queueCommand(ui, cmd);
  }
}

function gesture(g: Gesture) {
  send(commandForGesture(g));
}

function connect() {
  ws = new WebSocket(url);
  ws.onopen = () => {
    ui = { ...ui, connected: true };
    reconnectDelay = 500;
    const { ui: next, commands } = takePending(ui);
    ui = next;
    for (const cmd of commands) ws!.send(encodeCommand(cmd));
  };
  ws.onmessage = (ev: MessageEvent) => {
    const msg = parseServerMessage(String(ev.data));
    if (msg) ui = handleServerMessage(ui, msg, performance.now());
  };
  ws.onclose = () => {
    ui = { ...ui, connected: false };
    setTimeout(connect, reconnectDelay);
    reconnectDelay = Math.min(reconnectDelay * 2, 5000);
  };
  ws.onerror = () => ws?.close();
}

// -- gestures -----------------------------------------------------------------

b1.addEventListener("change", () =>
  gesture({ kind: "toggle", button: "B1", level: b1.checked }));
b2.addEventListener("change", () =>
  gesture({ kind: "toggle", button: "B2", level: b2.checked }));
b3.addEventListener("mousedown", () => gesture({ kind: "press", button: "B3" }));
b3.addEventListener("mouseup", () => gesture({ kind: "release", button: "B3" }));
b3.addEventListener("mouseleave", () => {
  if (b3.matches(":active")) gesture({ kind: "release", button: "B3" });
});
resetBtn.addEventListener("click", () => gesture({ kind: "reset" }));
pauseBtn.addEventListener("change", () =>
  gesture({ kind: "pause", paused: pauseBtn.checked }));
speed.addEventListener("change", () =>
  gesture({ kind: "speed", value: Number(speed.value) }));

let viewport: Viewport;

function resize() {
  canvas.width = canvas.clientWidth;
  canvas.height = canvas.clientHeight;
  viewport = render.fitViewport(canvas.width, canvas.height);
}
window.addEventListener("resize", resize);

let dragging = false;
canvas.addEventListener("mousedown", (ev) => {
  if (!dragEnabled(ui)) return;
  dragging = true;
  const p = render.fromCanvas(viewport, ev.offsetX, ev.offsetY);
  ui = { ...ui, dragCandidate: p };
});
canvas.addEventListener("mousemove", (ev) => {
  if (!dragging) return;
  ui = { ...ui, dragCandidate: render.fromCanvas(viewport, ev.offsetX, ev.offsetY) };
});
canvas.addEventListener("mouseup", () => {
  if (!dragging) return;
  dragging = false;
  if (ui.dragCandidate) {
    gesture({ kind: "drag_end", x_mm: ui.dragCandidate.x,
              y_mm: ui.dragCandidate.y });
  }
  ui = { ...ui, dragCandidate: null };
});

// -- render loop -----------------------------------------------------------------

function frame() {
  const stale = isStale(ui, performance.now());
  banner.style.display = stale ? "block" : "none";
  banner.textContent = ui.connected
    ? "stream stale (no data for over 1 s)"
    : `disconnected from ${url} — retrying; ${ui.pending.length} queued input(s)`;

  const s = ui.lastState;
  render.drawScene(ctx, viewport, s, ui.dragCandidate);
  if (s) {
    render.drawGauges(gaugeK1, gaugeK2, s);
    residualEl.textContent = render.residualText(s);
    const mode = s.in_transit ? " (transit)" : s.flags.faulted ? " (FAULT)" : "";
    statusEl.textContent =
      `t=${s.t.toFixed(2)} s   state ${s.fsm_state}${mode}   ` +
      `EE (${s.ee_mm[0].toFixed(1)}, ${s.ee_mm[1].toFixed(1)}) mm   ` +
      `knife ${s.knife ? "ON" : "off"}${s.paused ? "   PAUSED" : ""}` +
      (ui.lastError ? `   last error: ${ui.lastError}` : "");
    statusEl.className = s.flags.detected || s.flags.faulted ? "alert" : "";
  }
  requestAnimationFrame(frame);
}

resize();
connect();
requestAnimationFrame(frame);
