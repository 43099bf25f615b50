"""TCP and WebSocket front doors.

Both carry the same 40-byte-header binary protocol: TCP as a raw byte
stream reassembled by StreamDecoder, WebSocket as one complete message
per WS binary frame. The WS listener also serves the bundled browser
client under /app so a demo needs no separate web server.
"""

from __future__ import annotations

import asyncio
import logging
import mimetypes
from pathlib import Path

from websockets.asyncio.server import Server, ServerConnection, serve as ws_serve
from websockets.datastructures import Headers
from websockets.exceptions import ConnectionClosed
from websockets.http11 import Request, Response

from wayfinder.gateway.service import ClientConnection, Gateway
from wayfinder.protocol import Message, MsgType, ProtocolError, decode_exact, encode_message
from wayfinder.protocol.codec import StreamDecoder
from wayfinder.protocol.payloads import ErrorPayload

log = logging.getLogger(__name__)


async def _send_protocol_error(send, exc: ProtocolError) -> None:
    # Best effort: the peer violated framing, but our write side is fine.
    payload = ErrorPayload(code="protocol", detail=f"{exc.field}: {exc}").encode()
    try:
        await send(encode_message(Message(MsgType.ERROR, payload=payload)))
    except Exception:
        pass


# -- TCP ---------------------------------------------------------------------


async def handle_tcp_connection(
    gateway: Gateway, reader: asyncio.StreamReader, writer: asyncio.StreamWriter
) -> None:
    async def send_bytes(data: bytes) -> None:
        writer.write(data)
        await writer.drain()

    async def close() -> None:
        writer.close()
        try:
            await writer.wait_closed()
        except (ConnectionError, OSError):
            pass

    conn = ClientConnection(send_bytes, close)
    decoder = StreamDecoder()
    try:
        while True:
            data = await reader.read(65536)
            if not data:
                break
            try:
                messages = decoder.feed(data)
            except ProtocolError as exc:
                await _send_protocol_error(send_bytes, exc)
                break
            for message in messages:
                await gateway.on_message(conn, message)
            if conn.closed:
                break
    except (ConnectionError, OSError):
        pass
    finally:
        await gateway.on_disconnect(conn)
        await conn.close()


# -- WebSocket ----------------------------------------------------------------

_TEXT_TYPES = {".html": "text/html", ".js": "text/javascript", ".css": "text/css"}


def _static_response(static_dir: Path, request_path: str) -> Response:
    rel = request_path[len("/app") :].lstrip("/") or "index.html"
    root = static_dir.resolve()
    target = (root / rel).resolve()
    if root not in target.parents and target != root:
        return _plain_response(403, "forbidden")
    if not target.is_file():
        return _plain_response(404, "not found")
    ctype = _TEXT_TYPES.get(target.suffix) or mimetypes.guess_type(target.name)[0]
    headers = Headers()
    headers["Content-Type"] = ctype or "application/octet-stream"
    body = target.read_bytes()
    headers["Content-Length"] = str(len(body))
    return Response(200, "OK", headers, body)


def _plain_response(status: int, text: str) -> Response:
    body = text.encode()
    headers = Headers()
    headers["Content-Type"] = "text/plain"
    headers["Content-Length"] = str(len(body))
    reasons = {403: "Forbidden", 404: "Not Found", 426: "Upgrade Required"}
    return Response(status, reasons.get(status, "Error"), headers, body)


def make_process_request(static_dir: Path | None):
    def process_request(connection: ServerConnection, request: Request) -> Response | None:
        path = request.path.split("?", 1)[0]
        if path == "/app" or path.startswith("/app/"):
            if static_dir is None:
                return _plain_response(404, "no static directory configured")
            return _static_response(static_dir, path)
        if request.headers.get("Upgrade", "").lower() != "websocket":
            # a plain HTTP probe outside /app: answer instead of failing
            # the handshake with a traceback in the log
            return _plain_response(426, "WebSocket endpoint; the browser app is under /app")
        return None  # proceed with the WebSocket handshake

    return process_request


async def handle_ws_connection(gateway: Gateway, websocket: ServerConnection) -> None:
    async def send_bytes(data: bytes) -> None:
        await websocket.send(data)

    async def close() -> None:
        await websocket.close()

    conn = ClientConnection(send_bytes, close)
    try:
        async for raw in websocket:
            if isinstance(raw, str):
                # the protocol is binary only; a text frame is a violation
                await websocket.close(code=1003, reason="binary protocol")
                break
            try:
                message = decode_exact(raw)
            except ProtocolError as exc:
                await _send_protocol_error(send_bytes, exc)
                break
            await gateway.on_message(conn, message)
            if conn.closed:
                break
    except ConnectionClosed:
        pass
    finally:
        await gateway.on_disconnect(conn)
        await conn.close()


# -- combined server -----------------------------------------------------------


class GatewayServer:
    """Owns the listening sockets. Ports may be 0 (ephemeral); the bound
    ports are available after start() for tests and log lines."""

    def __init__(self, gateway: Gateway, host: str = "127.0.0.1"):
        self.gateway = gateway
        self.host = host
        self.tcp_server: asyncio.Server | None = None
        self.ws_server: Server | None = None
        self.tcp_port: int | None = None
        self.ws_port: int | None = None

    async def start(self, tcp_port: int | None, ws_port: int | None) -> None:
        if tcp_port is not None:
            self.tcp_server = await asyncio.start_server(
                lambda r, w: handle_tcp_connection(self.gateway, r, w), self.host, tcp_port
            )
            self.tcp_port = self.tcp_server.sockets[0].getsockname()[1]
        if ws_port is not None:
            static_dir = self.gateway.config.static_dir
            self.ws_server = await ws_serve(
                lambda ws: handle_ws_connection(self.gateway, ws),
                self.host,
                ws_port,
                process_request=make_process_request(
                    Path(static_dir) if static_dir else None
                ),
            )
            self.ws_port = self.ws_server.sockets[0].getsockname()[1]
        self.gateway.start_sweeper()

    async def stop(self) -> None:
        if self.tcp_server is not None:
            self.tcp_server.close()
            await self.tcp_server.wait_closed()
            self.tcp_server = None
        if self.ws_server is not None:
            self.ws_server.close()
            await self.ws_server.wait_closed()
            self.ws_server = None
        await self.gateway.aclose()


async def run_server(gateway: Gateway, host: str, tcp_port: int | None, ws_port: int | None):
    server = GatewayServer(gateway, host)
    await server.start(tcp_port, ws_port)
    if server.tcp_port is not None:
        log.info("TCP listening on %s:%d", host, server.tcp_port)
    if server.ws_port is not None:
        log.info("WebSocket listening on %s:%d", host, server.ws_port)
    try:
        await asyncio.Future()
    finally:
        await server.stop()
