// Canvas renderer: top-down scene, arm, gauges, residual bars, status.

import { FACTORY_ARM, forwardKinematics, SCENE, sectorPolygon,
         stiffnessFraction, Point } from "./fk.js";
import { StateMessage } from "./protocol.js";

export const COLORS = {
  cooperative: "rgba(44, 160, 44, 0.45)",   // green
  extensive: "rgba(31, 119, 180, 0.18)",    // blue
  human: "rgba(214, 39, 40, 0.45)",         // red
  mainOutline: "#000000",                   // black
  link: "#333333",
  joint: "#555555",
  flash: "rgba(214, 39, 40, 0.35)",
  target: "#2ca02c",
  requested: "#999999",
};

export interface Viewport {
  width: number;
  height: number;
  scale: number;     // px per mm
  baseX: number;     // canvas px of the arm base
  baseY: number;
}

export function fitViewport(width: number, height: number): Viewport {
  // scene spans roughly x in [-1250, 700], y in [-150, 1300] mm
  const scale = Math.min(width / 1950, height / 1450);
  return { width, height, scale,
           baseX: width - 650 * scale, baseY: height - 120 * scale };
}

export function toCanvas(v: Viewport, p: Point): [number, number] {
  return [v.baseX + p.x * v.scale, v.baseY - p.y * v.scale];
}

export function fromCanvas(v: Viewport, px: number, py: number): Point {
  return { x: (px - v.baseX) / v.scale, y: (v.baseY - py) / v.scale };
}

function fillPolygon(ctx: CanvasRenderingContext2D, v: Viewport,
                     pts: Point[], style: string, outline?: string) {
  ctx.beginPath();
  pts.forEach((p, i) => {
    const [x, y] = toCanvas(v, p);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.closePath();
  ctx.fillStyle = style;
  ctx.fill();
  if (outline) {
    ctx.strokeStyle = outline;
    ctx.lineWidth = 1.4;
    ctx.stroke();
  }
}

function drawReachCloud(ctx: CanvasRenderingContext2D, v: Viewport) {
  // coarse reachable cloud of the factory arm (blue extensive workspace)
  ctx.fillStyle = COLORS.extensive;
  for (let t1 = 0; t1 <= 65; t1 += 2.5) {
    for (let t2 = 0; t2 <= 125; t2 += 2.5) {
      const { ee } = forwardKinematics(FACTORY_ARM, [t1, t2]);
      const [x, y] = toCanvas(v, ee);
      ctx.fillRect(x - 1.2, y - 1.2, 2.4, 2.4);
    }
  }
}

export function drawScene(ctx: CanvasRenderingContext2D, v: Viewport,
                          state: StateMessage | null,
                          dragCandidate: Point | null) {
  ctx.clearRect(0, 0, v.width, v.height);
  drawReachCloud(ctx, v);
  fillPolygon(ctx, v, sectorPolygon(SCENE.human), COLORS.human);
  fillPolygon(ctx, v, sectorPolygon(SCENE.main), "rgba(0,0,0,0)",
              COLORS.mainOutline);
  fillPolygon(ctx, v, sectorPolygon(SCENE.cooperative), COLORS.cooperative);

  // base marker
  const [bx, by] = toCanvas(v, { x: 0, y: 0 });
  ctx.fillStyle = "#000";
  ctx.beginPath();
  ctx.moveTo(bx, by - 8);
  ctx.lineTo(bx - 7, by + 6);
  ctx.lineTo(bx + 7, by + 6);
  ctx.closePath();
  ctx.fill();

  if (!state) return;

  const { elbow, ee } = forwardKinematics(FACTORY_ARM, state.theta_deg);
  ctx.lineCap = "round";
  ctx.strokeStyle = COLORS.link;
  ctx.lineWidth = Math.max(3, 9 * v.scale);
  ctx.beginPath();
  ctx.moveTo(bx, by);
  const [ex, ey] = toCanvas(v, elbow);
  ctx.lineTo(ex, ey);
  const [px, py] = toCanvas(v, ee);
  ctx.lineTo(px, py);
  ctx.stroke();
  for (const [jx, jy] of [[bx, by], [ex, ey]] as const) {
    ctx.fillStyle = COLORS.joint;
    ctx.beginPath();
    ctx.arc(jx, jy, Math.max(4, 11 * v.scale), 0, 2 * Math.PI);
    ctx.fill();
  }
  // knife marker
  ctx.fillStyle = state.knife ? "#d62728" : "#888";
  ctx.beginPath();
  ctx.arc(px, py, Math.max(3, 8 * v.scale), 0, 2 * Math.PI);
  ctx.fill();

  if (state.target_mm) {
    const [tx, ty] = toCanvas(v, { x: state.target_mm[0], y: state.target_mm[1] });
    ctx.strokeStyle = COLORS.target;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(tx, ty, 7, 0, 2 * Math.PI);
    ctx.stroke();
  }
  if (state.requested_target_mm) {
    const [rx, ry] = toCanvas(v, { x: state.requested_target_mm[0],
                                   y: state.requested_target_mm[1] });
    ctx.strokeStyle = COLORS.requested;
    ctx.setLineDash([3, 3]);
    ctx.strokeRect(rx - 5, ry - 5, 10, 10);
    ctx.setLineDash([]);
  }
  if (state.clamped_target_mm) {
    const [cx, cy] = toCanvas(v, { x: state.clamped_target_mm[0],
                                   y: state.clamped_target_mm[1] });
    ctx.fillStyle = COLORS.target;
    ctx.fillRect(cx - 4, cy - 4, 8, 8);
  }
  if (dragCandidate) {
    const [dx, dy] = toCanvas(v, dragCandidate);
    ctx.strokeStyle = "#ff7f0e";
    ctx.beginPath();
    ctx.arc(dx, dy, 9, 0, 2 * Math.PI);
    ctx.stroke();
  }

  if (state.flags.detected || state.flags.faulted) {
    ctx.fillStyle = COLORS.flash;
    ctx.fillRect(0, 0, v.width, v.height);
  }
}

export function drawGauges(k1El: HTMLElement, k2El: HTMLElement,
                           state: StateMessage) {
  (k1El as HTMLProgressElement).value = stiffnessFraction(state.k[0]);
  (k2El as HTMLProgressElement).value = stiffnessFraction(state.k[1]);
}

export function residualText(state: StateMessage): string {
  const f = (x: number) => x.toFixed(2).padStart(7);
  return `r1 ${f(state.r[0])} / ±${state.epsilon_r[0].toFixed(1)} N·m   ` +
         `r2 ${f(state.r[1])} / ±${state.epsilon_r[1].toFixed(1)} N·m`;
}
