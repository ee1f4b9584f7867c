"""Real-time session service over WebSocket.

The simulation loop runs in one task and owns all mutable state; network I/O
communicates with it exclusively through queues (commands in, snapshots out).
Messages are JSON text, one document per frame; the schema is documented in
docs/protocol.md.  A session keeps running with no clients connected, and
malformed commands get an error reply without disturbing the loop.

Wall-clock pacing uses a fixed-tick schedule with drift correction: simulated
dt stays exactly the configured value regardless of scheduling jitter.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import logging
import time

from .config import SimConfig
from .session import Session

log = logging.getLogger(__name__)


class SessionServer:
    def __init__(self, config: SimConfig, host: str = "127.0.0.1",
                 port: int = 8765):
        self.config = config
        self.host = host
        self.port = port
        self.session = Session(config, log_rows=False)
        self.clients: set = set()
        self._commands: asyncio.Queue = asyncio.Queue()
        self._stop = asyncio.Event()

    async def _sim_loop(self):
        dt = self.config.rates.sim_dt
        stream_every = max(1, int(round(1.0 / (self.config.rates.stream_hz * dt))))
        next_tick = time.perf_counter()
        tick_count = 0
        while not self._stop.is_set():
            # drain commands between ticks, replying per command
            while not self._commands.empty():
                ws, msg = self._commands.get_nowait()
                reply = self.session.handle_command(msg)
                if ws is not None:
                    await self._safe_send(ws, json.dumps(reply))
            self.session.tick()
            tick_count += 1
            if tick_count % stream_every == 0 and self.clients:
                payload = json.dumps(self.session.state_message())
                await asyncio.gather(*(self._safe_send(ws, payload)
                                       for ws in list(self.clients)))
            next_tick += dt
            delay = next_tick - time.perf_counter()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                # behind schedule: resynchronize without compressing sim dt
                next_tick = time.perf_counter()
                await asyncio.sleep(0)

    async def _safe_send(self, ws, payload: str):
        try:
            await ws.send(payload)
        except Exception:
            self.clients.discard(ws)

    async def _handler(self, ws):
        self.clients.add(ws)
        log.info("client connected (%d total)", len(self.clients))
        try:
            hello = dict(self.session.state_message())
            hello["type"] = "hello"
            hello["protocol"] = 1
            await ws.send(json.dumps(hello))
            async for raw in ws:
                try:
                    msg = json.loads(raw)
                    if not isinstance(msg, dict):
                        raise ValueError("command must be a JSON object")
                except ValueError as e:
                    await self._safe_send(ws, json.dumps(
                        {"type": "error", "message": f"bad message: {e}"}))
                    continue
                await self._commands.put((ws, msg))
        finally:
            self.clients.discard(ws)
            log.info("client disconnected (%d total)", len(self.clients))

    async def run(self):
        import websockets
        async with websockets.serve(self._handler, self.host, self.port):
            log.info("serving on ws://%s:%d", self.host, self.port)
            sim = asyncio.create_task(self._sim_loop())
            try:
                await self._stop.wait()
            finally:
                sim.cancel()
                with contextlib.suppress(asyncio.CancelledError):
                    await sim

    def stop(self):
        self._stop.set()


def serve(config: SimConfig, host: str = "127.0.0.1", port: int = 8765):
    server = SessionServer(config, host, port)
    try:
        asyncio.run(server.run())
    except KeyboardInterrupt:
        pass
