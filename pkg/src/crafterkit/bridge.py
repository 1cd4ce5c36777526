"""Length-prefixed JSON wire protocol for driving environments remotely.

Framing: u32 little-endian body length, then a UTF-8 JSON body. Requests
are {"op": ..., "id": ..., "args": {...}}; every request gets exactly one
response {"id", "ok", "payload" | "error"}. One environment per
connection, requests processed strictly in order. Malformed framing closes
the connection; malformed JSON or bad arguments produce structured error
responses. See docs/wire.md for byte-level examples.
"""

from __future__ import annotations

import base64
import json
import socketserver
import struct
import sys

from .errors import SteppedTerminal
from .mechanics import (ACHIEVEMENTS, ACTION_NAMES, Action, EnvConfig, reset,
                        step)
from .render import FRAME_H, FRAME_W, render

MAX_BODY = 16 * 1024 * 1024
PROTOCOL_VERSION = 1


def spec_payload() -> dict:
    return {
        "protocol": PROTOCOL_VERSION,
        "actions": list(ACTION_NAMES),
        "achievements": list(ACHIEVEMENTS),
        "frame": {"width": FRAME_W, "height": FRAME_H, "channels": 3},
        "config_defaults": EnvConfig().to_dict(),
    }


class ProtocolError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class FramingError(Exception):
    """Unrecoverable framing problem: the connection must close."""


class EnvSession:
    """Protocol state machine for one connection."""

    def __init__(self):
        self.state = None

    def handle(self, request: dict) -> dict:
        if not isinstance(request, dict):
            raise ProtocolError("BadRequest", "request must be an object")
        op = request.get("op")
        rid = request.get("id")
        args = request.get("args") or {}
        if not isinstance(args, dict):
            raise ProtocolError("BadRequest", "args must be an object")
        try:
            if op == "spec":
                payload = spec_payload()
            elif op == "reset":
                payload = self._reset(args)
            elif op == "step":
                payload = self._step(args)
            elif op == "render":
                payload = self._render(args)
            elif op == "close":
                payload = {"closed": True}
            else:
                raise ProtocolError("UnknownOp", f"unknown op {op!r}")
        except ProtocolError as e:
            return {"id": rid, "ok": False,
                    "error": {"code": e.code, "message": str(e)}}
        return {"id": rid, "ok": True, "payload": payload}

    def _reset(self, args: dict) -> dict:
        seed = args.get("seed", 0)
        if not isinstance(seed, int):
            raise ProtocolError("BadRequest", "seed must be an integer")
        config = EnvConfig()
        if "config" in args:
            try:
                config = EnvConfig.from_dict({**config.to_dict(), **args["config"]})
            except (TypeError, ValueError) as e:
                raise ProtocolError("BadConfig", str(e)) from e
        self.state = reset(seed, config)
        payload = {"step": 0, "done": False, "seed": seed}
        if args.get("render"):
            payload["frame_b64"] = _frame_b64(self.state)
        return payload

    def _step(self, args: dict) -> dict:
        if self.state is None:
            raise ProtocolError("NotReset", "step before reset")
        action = args.get("action")
        if isinstance(action, str):
            if action not in ACTION_NAMES:
                raise ProtocolError("BadAction", f"unknown action {action!r}")
            action = ACTION_NAMES.index(action)
        if not isinstance(action, int) or not 0 <= action < len(Action):
            raise ProtocolError("BadAction", f"bad action {args.get('action')!r}")
        try:
            r = step(self.state, action)
        except SteppedTerminal as e:
            raise ProtocolError("SteppedTerminal", str(e)) from e
        payload = {
            "reward": r.reward,
            "done": r.done,
            "step": self.state.step_count,
            "unlocked": list(r.info["unlocked"]),
            "events": list(r.info["events"]),
            "effective_action": ACTION_NAMES[int(r.info["effective_action"])],
            "death_cause": r.info["death_cause"],
        }
        if args.get("render"):
            payload["frame_b64"] = _frame_b64(self.state)
        return payload

    def _render(self, args: dict) -> dict:
        if self.state is None:
            raise ProtocolError("NotReset", "render before reset")
        return {"frame_b64": _frame_b64(self.state),
                "width": FRAME_W, "height": FRAME_H, "channels": 3}


def _frame_b64(state) -> str:
    return base64.b64encode(render(state).tobytes()).decode("ascii")


def read_message(read_exact) -> dict | None:
    """One framed JSON message via read_exact(n) -> bytes; None at EOF."""
    header = read_exact(4)
    if header is None or len(header) == 0:
        return None
    if len(header) != 4:
        raise FramingError("truncated length prefix")
    (length,) = struct.unpack("<I", header)
    if length == 0 or length > MAX_BODY:
        raise FramingError(f"bad body length {length}")
    body = read_exact(length)
    if body is None or len(body) != length:
        raise FramingError("truncated body")
    try:
        return json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ProtocolError("BadJson", f"unparseable body: {e}") from e


def write_message(write, obj: dict) -> None:
    body = json.dumps(obj, separators=(",", ":")).encode("utf-8")
    write(struct.pack("<I", len(body)) + body)


def serve_stream(read_exact, write) -> None:
    """Run one session over a byte stream until close/EOF/framing error."""
    session = EnvSession()
    while True:
        try:
            request = read_message(read_exact)
        except FramingError:
            return
        except ProtocolError as e:
            write_message(write, {"id": None, "ok": False,
                                  "error": {"code": e.code, "message": str(e)}})
            continue
        if request is None:
            return
        response = session.handle(request)
        write_message(write, response)
        if isinstance(request, dict) and request.get("op") == "close":
            return


class _TCPHandler(socketserver.BaseRequestHandler):
    def handle(self):
        sock = self.request

        def read_exact(n):
            buf = b""
            while len(buf) < n:
                try:
                    chunk = sock.recv(n - len(buf))
                except OSError:
                    return None
                if not chunk:
                    return buf if buf else None
                buf += chunk
            return buf

        def write(data):
            try:
                sock.sendall(data)
            except OSError:
                raise FramingError("peer closed") from None

        try:
            serve_stream(read_exact, write)
        except FramingError:
            pass


class BridgeServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


def serve_tcp(host: str = "127.0.0.1", port: int = 0,
              ready_callback=None) -> None:
    """Blocking TCP server; one isolated environment per connection."""
    with BridgeServer((host, port), _TCPHandler) as server:
        if ready_callback is not None:
            ready_callback(server.server_address)
        server.serve_forever()


def serve_stdio() -> None:
    """Single session over stdin/stdout (binary)."""
    stdin = sys.stdin.buffer
    stdout = sys.stdout.buffer

    def read_exact(n):
        data = stdin.read(n)
        return data

    def write(data):
        stdout.write(data)
        stdout.flush()

    serve_stream(read_exact, write)


def serve(transport: str = "stdio", host: str = "127.0.0.1",
          port: int = 7331, ready_callback=None) -> None:
    if transport == "stdio":
        serve_stdio()
    elif transport == "tcp":
        serve_tcp(host, port, ready_callback)
    else:
        raise ValueError(f"unknown transport {transport!r}")
