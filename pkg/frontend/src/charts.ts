// Canvas strip charts over the bounded history buffers: the switch-cue
// prediction with its alarm threshold and cue/alarm markers, and the four
// joint-activity predictions. X axis is the retained 60 s window.

import { RingBuffer } from "./ringBuffer";
import { UiState, HISTORY_TICKS } from "./uiState";
import { JOINT_NAMES } from "./armView";

const JOINT_COLORS = ["#4cc2ff", "#ffb454", "#8aff80", "#ff7ab8"];
const Y_MAX = 0.5; // normalized-prediction display ceiling

function xAt(i: number, width: number): number {
  return (i / (HISTORY_TICKS - 1)) * width;
}

function yAt(value: number, height: number): number {
  const clamped = Math.max(0, Math.min(Y_MAX, value));
  return height - (clamped / Y_MAX) * height;
}

function drawSeries(
  ctx: CanvasRenderingContext2D,
  buffer: RingBuffer<number>,
  width: number,
  height: number,
  color: string,
): void {
  if (!buffer.size) return;
  ctx.beginPath();
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.6;
  const offset = HISTORY_TICKS - buffer.size; // right-align a partial window
  for (let i = 0; i < buffer.size; i++) {
    const x = xAt(offset + i, width);
    const y = yAt(buffer.get(i)!, height);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  }
  ctx.stroke();
}

export function drawSwitchChart(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  ui: UiState,
): void {
  ctx.clearRect(0, 0, width, height);
  const thetaOn = ui.latest ? ui.latest.advisor.theta_on ?? 0.09 : 0.09;

  // alarm shading and cue markers first, series on top
  const offset = HISTORY_TICKS - ui.alarms.size;
  ctx.fillStyle = "rgba(255, 196, 0, 0.15)";
  for (let i = 0; i < ui.alarms.size; i++) {
    if (ui.alarms.get(i)) ctx.fillRect(xAt(offset + i, width), 0, width / HISTORY_TICKS + 1, height);
  }
  ctx.strokeStyle = "rgba(255,255,255,0.75)";
  ctx.lineWidth = 1;
  for (let i = 0; i < ui.pulses.size; i++) {
    if (ui.pulses.get(i)) {
      const x = xAt(HISTORY_TICKS - ui.pulses.size + i, width);
      ctx.beginPath();
      ctx.moveTo(x, 0);
      ctx.lineTo(x, height);
      ctx.stroke();
    }
  }

  const thresholdY = yAt(thetaOn, height);
  ctx.strokeStyle = "#e05555";
  ctx.setLineDash([6, 4]);
  ctx.beginPath();
  ctx.moveTo(0, thresholdY);
  ctx.lineTo(width, thresholdY);
  ctx.stroke();
  ctx.setLineDash([]);

  const series = ui.predictions.get("switch_event");
  if (series) drawSeries(ctx, series, width, height, "#b88cff");
}

export function drawJointChart(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  ui: UiState,
): void {
  ctx.clearRect(0, 0, width, height);
  JOINT_NAMES.forEach((name, joint) => {
    const series = ui.predictions.get(`joint_${name}`);
    if (series) drawSeries(ctx, series, width, height, JOINT_COLORS[joint]);
  });
}
