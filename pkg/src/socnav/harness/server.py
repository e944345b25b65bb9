"""WebSocket transport for the session engine.

One client at a time; each WebSocket text frame carries exactly one JSON
SessionMessage (newline-free, so the stream is also valid NDJSON if bridged
onto a plain socket). The simulation pauses whenever no client is connected
and resumes on reconnect.
"""

from __future__ import annotations

import asyncio
import json
import logging

import websockets

from .session import PROTOCOL_VERSION, SessionEngine

log = logging.getLogger(__name__)


class SessionServer:
    def __init__(self, engine: SessionEngine, host: str, port: int, tick_hz: float):
        self.engine = engine
        self.host = host
        self.port = port
        self.tick_hz = tick_hz
        self._client = None
        self._started = asyncio.Event()

    async def _send(self, ws, message: dict) -> None:
        await ws.send(json.dumps(message))

    async def _handler(self, ws) -> None:
        if self._client is not None:
            await self._send(ws, {"v": PROTOCOL_VERSION, "type": "info", "kind": "error",
                                  "text": "session busy: one client at a time"})
            await ws.close()
            return
        self._client = ws
        log.info("client connected")
        recv_task = asyncio.create_task(self._recv_loop(ws))
        try:
            period = 1.0 / self.tick_hz
            loop = asyncio.get_running_loop()
            next_tick = loop.time()
            while True:
                if recv_task.done():
                    break
                for msg in self.engine.tick():
                    await self._send(ws, msg)
                next_tick += period
                delay = next_tick - loop.time()
                if delay > 0:
                    await asyncio.sleep(delay)
                else:
                    next_tick = loop.time()
        except websockets.ConnectionClosed:
            pass
        finally:
            recv_task.cancel()
            self._client = None
            log.info("client disconnected; simulation paused")

    async def _recv_loop(self, ws) -> None:
        async for raw in ws:
            try:
                msg = json.loads(raw)
            except json.JSONDecodeError:
                await self._send(ws, {"v": PROTOCOL_VERSION, "type": "info", "kind": "error",
                                      "text": "malformed message: not JSON"})
                continue
            for reply in self.engine.handle_message(msg):
                await self._send(ws, reply)

    async def run(self) -> None:
        async with websockets.serve(self._handler, self.host, self.port):
            self._started.set()
            log.info("session server on ws://%s:%d", self.host, self.port)
            await asyncio.Future()


def serve_forever(engine: SessionEngine, host: str, port: int, tick_hz: float) -> None:
    server = SessionServer(engine, host, port, tick_hz)
    asyncio.run(server.run())
