// Canvas rendering of one state frame: workspace bounds, robot glyphs with a
// heading tick, density-reference halos, and a score/parameter readout.

import { StateMessage, isStateMessage, ServerMessage } from "./protocol.js";
import { Transform, makeTransform, toScreen } from "./transform.js";

// density kernel width used by the server; halos are drawn at 1 and 2 sigma
const KERNEL_SIGMA = 0.12;
const ROBOT_RADIUS = 0.02;

/** The subset of CanvasRenderingContext2D the renderer uses; tests supply a
 * recording fake. */
export interface Canvas2D {
  fillStyle: string | unknown;
  strokeStyle: string | unknown;
  lineWidth: number;
  font: string;
  globalAlpha: number;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  fill(): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
}

export interface RenderResult {
  drawn: boolean;
  transform: Transform | null;
}

export function render(
  ctx: Canvas2D,
  msg: ServerMessage | null,
  width: number,
  height: number,
): RenderResult {
  ctx.clearRect(0, 0, width, height);
  if (msg === null || !isStateMessage(msg)) {
    drawBadge(ctx, "no valid state", width);
    return { drawn: false, transform: null };
  }
  const state = msg as StateMessage;
  const transform = makeTransform(state.params.bounds, width, height);

  drawBounds(ctx, transform);
  for (const ref of state.density_refs) {
    drawHalo(ctx, transform, ref.x, ref.y, ref.w);
  }
  for (const robot of state.robots) {
    drawRobot(ctx, transform, robot.x, robot.y, robot.theta);
  }
  drawReadout(ctx, state);
  if (state.params.status === "paused") {
    drawBadge(ctx, "PAUSED", width);
  }
  return { drawn: true, transform };
}

function drawBounds(ctx: Canvas2D, t: Transform): void {
  const [left, right, bottom, top] = t.bounds;
  const [x0, y0] = toScreen(t, left, top);
  const [x1, y1] = toScreen(t, right, bottom);
  ctx.strokeStyle = "#444";
  ctx.lineWidth = 2;
  ctx.strokeRect(x0, y0, x1 - x0, y1 - y0);
}

function drawRobot(
  ctx: Canvas2D,
  t: Transform,
  x: number,
  y: number,
  theta: number,
): void {
  const [sx, sy] = toScreen(t, x, y);
  const r = Math.max(ROBOT_RADIUS * t.scale, 3);
  ctx.fillStyle = "#1565c0";
  ctx.beginPath();
  ctx.arc(sx, sy, r, 0, 2 * Math.PI);
  ctx.fill();
  // heading tick from center to rim (screen y is flipped)
  ctx.strokeStyle = "#fff";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.moveTo(sx, sy);
  ctx.lineTo(sx + 1.6 * r * Math.cos(theta), sy - 1.6 * r * Math.sin(theta));
  ctx.stroke();
}

function drawHalo(
  ctx: Canvas2D,
  t: Transform,
  x: number,
  y: number,
  weight: number,
): void {
  const [sx, sy] = toScreen(t, x, y);
  const alpha = Math.min(0.15 + 0.03 * weight, 0.6);
  for (const mult of [2, 1]) {
    ctx.fillStyle = "#e65100";
    ctx.globalAlpha = alpha / mult;
    ctx.beginPath();
    ctx.arc(sx, sy, mult * KERNEL_SIGMA * t.scale, 0, 2 * Math.PI);
    ctx.fill();
  }
  ctx.globalAlpha = 1;
}

function drawReadout(ctx: Canvas2D, state: StateMessage): void {
  const p = state.params;
  ctx.fillStyle = "#222";
  ctx.font = "12px monospace";
  ctx.fillText(
    `t=${state.t.toFixed(1)}s  score=${state.score.toFixed(3)}  ` +
      `d_s=${p.d_s}  gamma=${p.gamma}  alpha=${p.alpha}  kappa=${p.kappa}`,
    8,
    16,
  );
}

function drawBadge(ctx: Canvas2D, text: string, width: number): void {
  ctx.fillStyle = "#b71c1c";
  ctx.fillRect(width - 110, 6, 104, 22);
  ctx.fillStyle = "#fff";
  ctx.font = "12px sans-serif";
  ctx.fillText(text, width - 102, 21);
}
