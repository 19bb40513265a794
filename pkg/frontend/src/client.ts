// Thin WebSocket wrapper: parse frames, forward commands, auto-reconnect.

import { Command, parseMessage, ServerMessage } from "./protocol";

export class CockpitClient {
  private socket: WebSocket | null = null;
  private url: string;
  private reconnectTimer: number | null = null;

  onMessage: (message: ServerMessage) => void = () => {};
  onStatus: (connected: boolean) => void = () => {};

  constructor(url: string) {
    this.url = url;
  }

  connect(): void {
    if (this.socket) this.socket.close();
    const socket = new WebSocket(this.url);
    this.socket = socket;
    socket.onopen = () => this.onStatus(true);
    socket.onmessage = (event) => {
      const message = parseMessage(String(event.data));
      if (message) this.onMessage(message);
    };
    socket.onclose = () => {
      this.onStatus(false);
      this.scheduleReconnect();
    };
    socket.onerror = () => socket.close();
  }

  private scheduleReconnect(): void {
    if (this.reconnectTimer !== null) return;
    this.reconnectTimer = window.setTimeout(() => {
      this.reconnectTimer = null;
      this.connect();
    }, 1500);
  }

  send(command: Command): boolean {
    if (!this.socket || this.socket.readyState !== WebSocket.OPEN) return false;
    this.socket.send(JSON.stringify(command));
    return true;
  }
}
