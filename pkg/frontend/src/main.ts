// Cockpit entry point: wire the WebSocket client, the pilot inputs and the
// render loop together. Keyboard and slider stand in for muscle contraction
// intensity; every gesture maps to exactly one wire command.

import { CockpitClient } from "./client";
import { UiState } from "./uiState";
import { drawArm, JOINT_NAMES } from "./armView";
import { drawSwitchChart, drawJointChart } from "./charts";
import { keyDownCommand, keyUpCommand, sliderCommand, DriveState } from "./input";
import { autonomyCommand, learningCommand, switchCommand, Autonomy } from "./protocol";

const params = new URLSearchParams(window.location.search);
const wsUrl = params.get("ws") ?? "ws://127.0.0.1:8765";

const ui = new UiState();
const drive: DriveState = { level: 0 };
const client = new CockpitClient(wsUrl);

const el = (id: string) => document.getElementById(id)!;
const canvas2d = (id: string) => {
  const canvas = el(id) as HTMLCanvasElement;
  return { canvas, ctx: canvas.getContext("2d")! };
};

const arm = canvas2d("arm");
const switchChart = canvas2d("switch-chart");
const jointChart = canvas2d("joint-chart");

client.onStatus = (connected) => {
  ui.setConnected(connected);
  el("cockpit").classList.toggle("disconnected", !connected);
  el("conn-label").textContent = connected
    ? `connected (${ui.role ?? "..."})`
    : "disconnected";
};
client.onMessage = (message) => {
  ui.apply(message);
  if (message.type === "ack" && message.cmd === "connect") {
    el("conn-label").textContent = `connected (${message.detail})`;
  }
};
client.connect();

el("reconnect").addEventListener("click", () => client.connect());

// -- pilot input ------------------------------------------------------------

document.addEventListener("keydown", (event) => {
  if (event.target instanceof HTMLInputElement && event.target.type !== "range") return;
  const command = keyDownCommand(event.key, event.repeat, drive);
  if (command) {
    event.preventDefault();
    client.send(command);
    if (command.cmd === "drive") syncSlider();
  }
});
document.addEventListener("keyup", (event) => {
  const command = keyUpCommand(event.key, drive);
  if (command) {
    client.send(command);
    syncSlider();
  }
});

const slider = el("drive-slider") as HTMLInputElement;
slider.addEventListener("input", () => {
  client.send(sliderCommand(Number(slider.value), drive));
});
function syncSlider(): void {
  slider.value = String(Math.round(drive.level * 100));
}

el("switch-button").addEventListener("click", () => client.send(switchCommand()));

for (const level of ["manual", "suggest", "auto"] as Autonomy[]) {
  el(`autonomy-${level}`).addEventListener("change", () => {
    client.send(autonomyCommand(level));
  });
}

const learningToggle = el("learning-toggle") as HTMLInputElement;
learningToggle.addEventListener("change", () => {
  client.send(learningCommand(learningToggle.checked));
});

// -- render loop --------------------------------------------------------------

function render(): void {
  drawArm(arm.ctx, arm.canvas.width, arm.canvas.height, ui.latest, ui.connected);
  drawSwitchChart(switchChart.ctx, switchChart.canvas.width, switchChart.canvas.height, ui);
  drawJointChart(jointChart.ctx, jointChart.canvas.width, jointChart.canvas.height, ui);

  const latest = ui.latest;
  el("active-label").textContent = latest ? JOINT_NAMES[latest.active] : "-";
  el("suggested-badge").textContent = latest ? JOINT_NAMES[latest.advisor.sugg] : "-";
  el("alarm-badge").classList.toggle("alarm-on", !!latest?.advisor.alarm);
  el("lead-label").textContent =
    ui.lastLeadTicks === null ? "-" : `${((ui.lastLeadTicks * 1000) / 15).toFixed(0)} ms`;
  el("false-alarm-label").textContent = String(ui.falseAlarms);
  el("switch-count").textContent = String(ui.switchCount);
  el("override-count").textContent = String(ui.overrideCount);
  el("tick-label").textContent = latest ? String(latest.tick) : "-";

  const radio = latest && document.querySelector<HTMLInputElement>(
    `#autonomy-${ui.autonomy}`,
  );
  if (radio && !radio.checked) radio.checked = true;
  if (learningToggle.checked !== ui.learning) learningToggle.checked = ui.learning;

  el("toasts").innerHTML = ui.toasts
    .map((toast) => `<div class="toast ${toast.kind}">${toast.text}</div>`)
    .join("");

  requestAnimationFrame(render);
}
requestAnimationFrame(render);
