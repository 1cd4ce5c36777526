"""Wire protocol client.

Framing is a u32 little-endian length prefix followed by a UTF-8 JSON
body; each request gets exactly one response with a matching id. The
client mirrors the server's state machine (reset before step) only in
that it surfaces the server's structured errors as ProtocolError.
"""

from __future__ import annotations

import base64
import json
import socket
import struct

import numpy as np

FRAME_SHAPE = (144, 144, 3)


class ProtocolError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class RemoteEnv:
    """One remote environment over one connection."""

    def __init__(self, address, timeout: float = 30.0):
        if isinstance(address, str):
            host, _, port = address.rpartition(":")
            address = (host or "127.0.0.1", int(port))
        self.sock = socket.create_connection(address, timeout=timeout)
        self._next_id = 0
        self.spec_info = self.call("spec")
        self.action_names = self.spec_info["actions"]

    # --- wire plumbing ---

    def call(self, op: str, **args) -> dict:
        self._next_id += 1
        rid = self._next_id
        body = json.dumps({"op": op, "id": rid, "args": args},
                          separators=(",", ":")).encode()
        self.sock.sendall(struct.pack("<I", len(body)) + body)
        response = self._read_message()
        if response.get("id") != rid:
            raise ProtocolError("BadResponse", f"id mismatch: {response!r}")
        if not response.get("ok"):
            err = response.get("error") or {}
            raise ProtocolError(err.get("code", "Unknown"),
                                err.get("message", ""))
        return response["payload"]

    def _read_message(self) -> dict:
        header = self._read_exact(4)
        (length,) = struct.unpack("<I", header)
        return json.loads(self._read_exact(length))

    def _read_exact(self, n: int) -> bytes:
        buf = b""
        while len(buf) < n:
            chunk = self.sock.recv(n - len(buf))
            if not chunk:
                raise ConnectionError("server closed the connection")
            buf += chunk
        return buf

    # --- environment surface ---

    def reset(self, seed: int, config: dict | None = None,
              render: bool = False) -> dict:
        args = {"seed": seed, "render": render}
        if config:
            args["config"] = config
        payload = self.call("reset", **args)
        if render:
            payload["frame"] = _decode_frame(payload.pop("frame_b64"))
        return payload

    def step(self, action, render: bool = False):
        """Returns (observation, reward, done, info); observation is the
        decoded frame when render=True, else None."""
        payload = self.call("step", action=action, render=render)
        obs = _decode_frame(payload.pop("frame_b64")) if render else None
        info = {k: payload[k] for k in
                ("unlocked", "events", "effective_action", "death_cause", "step")}
        return obs, payload["reward"], payload["done"], info

    def render(self) -> np.ndarray:
        payload = self.call("render")
        return _decode_frame(payload["frame_b64"])

    def close(self) -> None:
        try:
            self.call("close")
        except (ProtocolError, ConnectionError, OSError):
            pass
        self.sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _decode_frame(b64: str) -> np.ndarray:
    raw = base64.b64decode(b64)
    return np.frombuffer(raw, dtype=np.uint8).reshape(FRAME_SHAPE)


def connect(address, timeout: float = 30.0) -> RemoteEnv:
    return RemoteEnv(address, timeout=timeout)
