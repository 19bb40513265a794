"""Live telemetry and command intake over a local WebSocket port.

One full-duplex channel per client carries JSON text frames, one message per
frame. The engine runs paced in its own thread and never waits on a client:
each client owns a bounded queue that drops oldest messages when the consumer
stalls, and commands enter a bounded queue that the engine drains only at tick
boundaries.

Wire schema (all frames are single JSON objects):

  server -> client
    {"type": "state", "tick": n, "joints": [...], "vels": [...], "active": j,
     "pulse": 0|1, "emg": {"drive": x, "switch": x},
     "pred": {question_id: normalized_prediction, ...},
     "advisor": {"alarm": b, "rose": b, "rank": [...], "sugg": j,
                  "action": s, "lead_tick": n|null},
     "autonomy": "manual"|"suggest"|"auto", "learning": b}
    {"type": "event", "kind": "switch"|"alarm_rise"|"override", "tick": n, ...}
    {"type": "ack", "cmd": s, "detail": s}
    {"type": "error", "cmd": s|null, "reason": s}

  client -> server
    {"cmd": "drive", "value": -1.0..1.0}
    {"cmd": "switch"}
    {"cmd": "set-autonomy", "value": "manual"|"suggest"|"auto"}
    {"cmd": "toggle-learning", "value": "on"|"off"}
    {"cmd": "save-model", "value": path}
"""

from __future__ import annotations

import asyncio
import collections
import json
import threading
import time

from websockets.asyncio.server import serve as ws_serve

from .engine import Engine, TickResult
from .sessionio import ModelFile, SessionLog

TELEMETRY_QUEUE_LEN = 256
COMMAND_QUEUE_LEN = 64
_POLL_SECONDS = 0.005


def state_message(engine: Engine, result: TickResult) -> dict:
    s = result.sample
    return {
        "type": "state",
        "tick": s.step,
        "joints": [float(v) for v in s.joint_pos],
        "vels": [float(v) for v in s.joint_vel],
        "active": s.active_joint,
        "pulse": int(s.switch_pulse),
        "emg": {
            "drive": result.processed.ch_drive,
            "switch": result.processed.ch_switch,
        },
        "pred": {
            qid: row.normalized for qid, row in result.snapshot.questions.items()
        },
        "advisor": {
            "alarm": result.advisor.timing_alarm,
            "rose": result.advisor.alarm_rose,
            "rank": list(result.advisor.ranking),
            "sugg": result.advisor.suggested_joint,
            "action": result.advisor.action.value,
            "lead_tick": result.advisor.lead_candidate_tick,
            "theta_on": engine.config.advisor.theta_on,
        },
        "autonomy": engine.advisor.autonomy.value if engine.advisor else "disabled",
        "learning": engine.learning,
    }


class _Client:
    def __init__(self, role: str):
        self.role = role
        self.queue: collections.deque = collections.deque(maxlen=TELEMETRY_QUEUE_LEN)


class CockpitServer:
    """Engine thread + asyncio WebSocket fan-out; first client is the pilot."""

    def __init__(self, engine: Engine, host: str = "127.0.0.1", port: int = 8765,
                 max_ticks: int | None = None):
        self.engine = engine
        self.host = host
        self.port = port
        self.max_ticks = max_ticks
        self.bound_port: int | None = None
        self._clients: list[_Client] = []
        self._clients_lock = threading.Lock()
        self._commands: collections.deque = collections.deque(maxlen=COMMAND_QUEUE_LEN)
        self._stop = threading.Event()
        self._ready = threading.Event()
        self._engine_thread: threading.Thread | None = None
        self._ws_thread: threading.Thread | None = None
        self._loop: asyncio.AbstractEventLoop | None = None

    # -- engine side ---------------------------------------------------------

    def _broadcast(self, message: dict) -> None:
        with self._clients_lock:
            for client in self._clients:
                client.queue.append(message)

    def _on_tick(self, engine: Engine, result: TickResult) -> None:
        self._broadcast(state_message(engine, result))
        for event in result.events:
            self._broadcast({"type": "event", **event})
        while engine.pending_model_saves:
            path = engine.pending_model_saves.pop(0)
            ModelFile.from_horde(engine.horde, engine.fingerprint).save(path)

    def _drain_commands(self):
        out = []
        while self._commands:
            out.append(self._commands.popleft())
        return out

    def _engine_main(self) -> None:
        n = self.max_ticks if self.max_ticks is not None else 1 << 62
        period = 1.0 / self.engine.config.tick_rate_hz
        next_deadline = time.monotonic() + period
        try:
            for _ in range(n):
                if self._stop.is_set():
                    break
                for command, reply in self._drain_commands():
                    ok, message = self.engine.apply_command(command)
                    reply(ok, message)
                result = self.engine.tick()
                self._on_tick(self.engine, result)
                now = time.monotonic()
                if now < next_deadline:
                    time.sleep(next_deadline - now)
                next_deadline += period
        finally:
            if self.engine.log_writer is not None:
                self.engine.log_writer.flush()
            self._stop.set()

    # -- websocket side --------------------------------------------------------

    async def _sender(self, websocket, client: _Client) -> None:
        while not self._stop.is_set():
            sent = False
            while client.queue:
                message = client.queue.popleft()
                await websocket.send(json.dumps(message))
                sent = True
            if not sent:
                await asyncio.sleep(_POLL_SECONDS)

    async def _handler(self, websocket) -> None:
        with self._clients_lock:
            role = "pilot" if not any(c.role == "pilot" for c in self._clients) else "observer"
            client = _Client(role)
            self._clients.append(client)
        client.queue.append({"type": "ack", "cmd": "connect", "detail": role})
        sender = asyncio.create_task(self._sender(websocket, client))
        try:
            async for raw in websocket:
                try:
                    command = json.loads(raw)
                    if not isinstance(command, dict) or "cmd" not in command:
                        raise ValueError("frame must be an object with a 'cmd' field")
                except ValueError as e:
                    client.queue.append(
                        {"type": "error", "cmd": None, "reason": f"bad frame: {e}"}
                    )
                    continue
                if client.role != "pilot":
                    client.queue.append(
                        {"type": "error", "cmd": command.get("cmd"),
                         "reason": "observer connections cannot send commands"}
                    )
                    continue
                name = command.get("cmd")

                def reply(ok: bool, message: str, _name=name):
                    if ok:
                        client.queue.append({"type": "ack", "cmd": _name, "detail": message})
                    else:
                        client.queue.append({"type": "error", "cmd": _name, "reason": message})

                self._commands.append((command, reply))
        finally:
            sender.cancel()
            with self._clients_lock:
                self._clients.remove(client)

    async def _ws_main(self) -> None:
        async with ws_serve(self._handler, self.host, self.port) as server:
            self.bound_port = server.sockets[0].getsockname()[1] if server.sockets else self.port
            self._ready.set()
            while not self._stop.is_set():
                await asyncio.sleep(0.05)

    def _ws_thread_main(self) -> None:
        asyncio.run(self._ws_main())

    # -- lifecycle ---------------------------------------------------------------

    def start(self) -> None:
        self._ws_thread = threading.Thread(target=self._ws_thread_main, daemon=True)
        self._ws_thread.start()
        if not self._ready.wait(timeout=5.0):
            raise RuntimeError("websocket server failed to start")
        self._engine_thread = threading.Thread(target=self._engine_main, daemon=True)
        self._engine_thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._engine_thread is not None:
            self._engine_thread.join(timeout=5.0)
        if self._ws_thread is not None:
            self._ws_thread.join(timeout=5.0)

    def wait(self) -> None:
        if self._engine_thread is not None:
            while self._engine_thread.is_alive():
                self._engine_thread.join(timeout=0.5)
        self.stop()


class ReplayStreamer:
    """Streams a recorded session over the same wire schema at the session rate."""

    def __init__(self, log: SessionLog, host: str = "127.0.0.1", port: int = 8765):
        self.log = log
        self.host = host
        self.port = port
        self.bound_port: int | None = None
        self._clients: list[_Client] = []
        self._lock = threading.Lock()
        self._stop = threading.Event()
        self._ready = threading.Event()
        self._thread: threading.Thread | None = None

    def _record_message(self, record) -> dict:
        a = record.advisor
        return {
            "type": "state",
            "tick": record.step,
            "joints": [float(v) for v in record.sample.joint_pos],
            "vels": [float(v) for v in record.sample.joint_vel],
            "active": record.sample.active_joint,
            "pulse": int(record.sample.switch_pulse),
            "emg": {"drive": record.processed.ch_drive, "switch": record.processed.ch_switch},
            "pred": {qid: norm for qid, (raw, norm, _d) in record.predictions.items()},
            "advisor": {
                "alarm": a["alarm"], "rose": a["rose"], "rank": a["rank"],
                "sugg": a["sugg"], "action": a["action"], "lead_tick": a["lead_tick"],
            },
            "autonomy": "replay",
            "learning": False,
        }

    async def _sender(self, websocket, client: _Client) -> None:
        while not self._stop.is_set():
            sent = False
            while client.queue:
                await websocket.send(json.dumps(client.queue.popleft()))
                sent = True
            if not sent:
                await asyncio.sleep(_POLL_SECONDS)

    async def _handler(self, websocket) -> None:
        client = _Client("observer")
        with self._lock:
            self._clients.append(client)
        client.queue.append({"type": "ack", "cmd": "connect", "detail": "replay"})
        sender = asyncio.create_task(self._sender(websocket, client))
        try:
            async for raw in websocket:
                client.queue.append(
                    {"type": "error", "cmd": None,
                     "reason": "mode conflict: replay sessions accept no commands"}
                )
        finally:
            sender.cancel()
            with self._lock:
                self._clients.remove(client)

    async def _pump(self) -> None:
        period = 1.0 / self.log.header.tick_rate_hz
        for record in self.log.records:
            if self._stop.is_set():
                return
            message = self._record_message(record)
            with self._lock:
                for client in self._clients:
                    client.queue.append(message)
            await asyncio.sleep(period)

    async def _main(self) -> None:
        async with ws_serve(self._handler, self.host, self.port) as server:
            self.bound_port = server.sockets[0].getsockname()[1] if server.sockets else self.port
            self._ready.set()
            await self._pump()
            self._stop.set()

    def start(self) -> None:
        self._thread = threading.Thread(target=lambda: asyncio.run(self._main()), daemon=True)
        self._thread.start()
        if not self._ready.wait(timeout=5.0):
            raise RuntimeError("replay server failed to start")

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5.0)

    def wait(self) -> None:
        if self._thread is not None:
            while self._thread.is_alive():
                self._thread.join(timeout=0.5)
