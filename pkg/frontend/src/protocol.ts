// Wire protocol types matching the engine's telemetry/command schema.
// One JSON object per WebSocket frame in both directions.

export interface StateMessage {
  type: "state";
  tick: number;
  joints: number[];
  vels: number[];
  active: number;
  pulse: number;
  emg: { drive: number; switch: number };
  pred: Record<string, number>;
  advisor: {
    alarm: boolean;
    rose: boolean;
    rank: number[];
    sugg: number;
    action: string;
    lead_tick: number | null;
    theta_on?: number;
  };
  autonomy: string;
  learning: boolean;
}

export interface EventMessage {
  type: "event";
  kind: "switch" | "alarm_rise" | "override";
  tick: number;
  to?: number;
  provenance?: string;
}

export interface AckMessage {
  type: "ack";
  cmd: string;
  detail: string;
}

export interface ErrorMessage {
  type: "error";
  cmd: string | null;
  reason: string;
}

export type ServerMessage = StateMessage | EventMessage | AckMessage | ErrorMessage;

export type Autonomy = "manual" | "suggest" | "auto";

export interface Command {
  cmd: string;
  value?: number | string;
}

export function parseMessage(raw: string): ServerMessage | null {
  let obj: unknown;
  try {
    obj = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) return null;
  const type = (obj as { type?: unknown }).type;
  if (type === "state" || type === "event" || type === "ack" || type === "error") {
    return obj as ServerMessage;
  }
  return null;
}

export const driveCommand = (value: number): Command => ({
  cmd: "drive",
  value: Math.max(-1, Math.min(1, value)),
});

export const switchCommand = (): Command => ({ cmd: "switch" });

export const autonomyCommand = (level: Autonomy): Command => ({
  cmd: "set-autonomy",
  value: level,
});

export const learningCommand = (on: boolean): Command => ({
  cmd: "toggle-learning",
  value: on ? "on" : "off",
});
