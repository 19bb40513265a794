// Client-side session state: the latest telemetry snapshot plus bounded
// history for the strip charts. Everything here is derived from server
// messages; the cockpit computes no predictions of its own.

import { RingBuffer } from "./ringBuffer";
import { ServerMessage, StateMessage } from "./protocol";

export const HISTORY_TICKS = 900; // 60 s at 15 Hz
const LEAD_WINDOW_TICKS = 15; // 1 s: a rise older than this with no cue is false

export interface Toast {
  kind: "ack" | "error";
  text: string;
}

export class UiState {
  connected = false;
  role: string | null = null;
  latest: StateMessage | null = null;
  autonomy = "manual";
  learning = true;

  // chart history, one sample per engine tick
  ticks = new RingBuffer<number>(HISTORY_TICKS);
  predictions = new Map<string, RingBuffer<number>>();
  pulses = new RingBuffer<number>(HISTORY_TICKS); // 0/1 per tick
  alarms = new RingBuffer<number>(HISTORY_TICKS); // 0/1 per tick

  // lead-time accounting from events
  lastLeadTicks: number | null = null;
  falseAlarms = 0;
  switchCount = 0;
  autoSwitchCount = 0;
  overrideCount = 0;
  private pendingRises: number[] = [];

  toasts: Toast[] = [];

  apply(message: ServerMessage): void {
    switch (message.type) {
      case "state":
        this.applyState(message);
        break;
      case "event":
        this.applyEvent(message.kind, message.tick);
        break;
      case "ack":
        if (message.cmd === "connect") {
          this.role = message.detail;
        } else {
          this.pushToast({ kind: "ack", text: `${message.cmd}: ${message.detail}` });
        }
        break;
      case "error":
        this.pushToast({ kind: "error", text: message.reason });
        break;
    }
  }

  private applyState(state: StateMessage): void {
    this.latest = state;
    this.autonomy = state.autonomy;
    this.learning = state.learning;
    this.ticks.push(state.tick);
    for (const [qid, value] of Object.entries(state.pred)) {
      let buffer = this.predictions.get(qid);
      if (!buffer) {
        buffer = new RingBuffer<number>(HISTORY_TICKS);
        this.predictions.set(qid, buffer);
      }
      buffer.push(value);
    }
    this.pulses.push(state.pulse);
    this.alarms.push(state.advisor.alarm ? 1 : 0);

    if (state.pulse) {
      // match the cue to the most recent pending rise within the window
      const eligible = this.pendingRises.filter(
        (rise) => state.tick - rise <= LEAD_WINDOW_TICKS,
      );
      if (eligible.length) {
        this.lastLeadTicks = state.tick - eligible[eligible.length - 1];
      }
      this.pendingRises = [];
    } else {
      const expired = this.pendingRises.filter(
        (rise) => state.tick - rise > LEAD_WINDOW_TICKS,
      );
      this.falseAlarms += expired.length;
      this.pendingRises = this.pendingRises.filter(
        (rise) => state.tick - rise <= LEAD_WINDOW_TICKS,
      );
    }
  }

  private applyEvent(kind: string, tick: number): void {
    if (kind === "alarm_rise") {
      this.pendingRises.push(tick);
    } else if (kind === "switch") {
      this.switchCount++;
    } else if (kind === "override") {
      this.overrideCount++;
    }
  }

  private pushToast(toast: Toast): void {
    this.toasts.push(toast);
    if (this.toasts.length > 4) this.toasts.shift();
  }

  setConnected(connected: boolean): void {
    this.connected = connected;
    if (!connected) this.role = null;
  }
}
