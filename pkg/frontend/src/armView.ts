// 2-D schematic of the 4-actuator arm: shoulder swing, elbow and wrist
// flexion, gripper jaws. The joint the drive channel currently controls is
// highlighted; the advisor's suggested next joint gets a dashed halo.

import { StateMessage } from "./protocol";

export const JOINT_NAMES = ["shoulder", "elbow", "wrist", "gripper"];
const JOINT_COLORS = ["#4cc2ff", "#ffb454", "#8aff80", "#ff7ab8"];

interface Point {
  x: number;
  y: number;
}

function segmentEnd(from: Point, angle: number, length: number): Point {
  return { x: from.x + length * Math.cos(angle), y: from.y + length * Math.sin(angle) };
}

export function drawArm(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  state: StateMessage | null,
  connected: boolean,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.save();
  if (!connected) ctx.globalAlpha = 0.3;

  const joints = state ? state.joints : [0.5, 0.5, 0.5, 0.5];
  const active = state ? state.active : -1;
  const suggested = state ? state.advisor.sugg : -1;

  const base: Point = { x: width * 0.5, y: height * 0.82 };
  const upper = height * 0.3;
  const fore = height * 0.24;
  const hand = height * 0.13;

  // map normalized positions to angles (radians, screen y grows downward)
  const shoulderAngle = -Math.PI / 2 + (joints[0] - 0.5) * (Math.PI * 0.7);
  const elbowAngle = shoulderAngle + (joints[1] - 0.5) * (Math.PI * 0.8);
  const wristAngle = elbowAngle + (joints[2] - 0.5) * (Math.PI * 0.7);
  const jaw = 0.08 + joints[3] * 0.35; // gripper opening half-angle

  const elbowAt = segmentEnd(base, shoulderAngle, upper);
  const wristAt = segmentEnd(elbowAt, elbowAngle, fore);
  const tip = segmentEnd(wristAt, wristAngle, hand * 0.55);

  ctx.lineWidth = 7;
  ctx.lineCap = "round";
  ctx.strokeStyle = "#9aa7b5";
  for (const [from, to] of [
    [base, elbowAt],
    [elbowAt, wristAt],
    [wristAt, tip],
  ] as [Point, Point][]) {
    ctx.beginPath();
    ctx.moveTo(from.x, from.y);
    ctx.lineTo(to.x, to.y);
    ctx.stroke();
  }

  // gripper jaws from the wrist tip
  ctx.lineWidth = 4;
  for (const side of [-1, 1]) {
    const jawEnd = segmentEnd(tip, wristAngle + side * jaw, hand * 0.6);
    ctx.beginPath();
    ctx.moveTo(tip.x, tip.y);
    ctx.lineTo(jawEnd.x, jawEnd.y);
    ctx.stroke();
  }

  const centers: Point[] = [base, elbowAt, wristAt, tip];
  centers.forEach((center, joint) => {
    ctx.beginPath();
    ctx.arc(center.x, center.y, joint === active ? 11 : 7, 0, Math.PI * 2);
    ctx.fillStyle = joint === active ? JOINT_COLORS[joint] : "#3c4754";
    ctx.fill();
    if (joint === active) {
      ctx.lineWidth = 2;
      ctx.strokeStyle = "#ffffff";
      ctx.stroke();
    }
    if (joint === suggested) {
      ctx.beginPath();
      ctx.setLineDash([4, 3]);
      ctx.arc(center.x, center.y, 16, 0, Math.PI * 2);
      ctx.strokeStyle = JOINT_COLORS[joint];
      ctx.lineWidth = 2;
      ctx.stroke();
      ctx.setLineDash([]);
    }
  });

  ctx.restore();
}
