"""Wire protocol: length-delimited text frames, one JSON object each.

A frame is the ASCII decimal byte length of the UTF-8 payload, a newline,
then the payload.  See docs/protocol.md for the message schema.
"""

from __future__ import annotations

import json
import socket

PROTOCOL_VERSION = 1

MESSAGE_TYPES = {
    "hello", "state", "cursor_add", "cursor_update", "cursor_remove",
    "set_param", "pause", "resume", "error",
}

_MAX_FRAME = 1 << 20


def encode_frame(msg: dict) -> bytes:
    payload = json.dumps(msg, separators=(",", ":")).encode()
    return str(len(payload)).encode() + b"\n" + payload


def error_msg(reason: str) -> dict:
    return {"type": "error", "v": PROTOCOL_VERSION, "reason": reason}


class FrameReader:
    """Incremental frame parser over a stream socket."""

    def __init__(self, sock: socket.socket):
        self._sock = sock
        self._buf = b""

    def read(self) -> dict | None:
        """Block until one full frame arrives; None on clean EOF.

        Raises ValueError on a malformed frame header or payload.
        """
        while True:
            nl = self._buf.find(b"\n")
            if nl >= 0:
                header = self._buf[:nl]
                if not header.isdigit():
                    raise ValueError(f"bad frame header: {header[:32]!r}")
                length = int(header)
                if length > _MAX_FRAME:
                    raise ValueError("frame too large")
                if len(self._buf) >= nl + 1 + length:
                    payload = self._buf[nl + 1:nl + 1 + length]
                    self._buf = self._buf[nl + 1 + length:]
                    msg = json.loads(payload.decode())
                    if not isinstance(msg, dict):
                        raise ValueError("frame payload must be a JSON object")
                    return msg
            elif len(self._buf) > 32:
                raise ValueError("bad frame header: no length line")
            chunk = self._sock.recv(65536)
            if not chunk:
                if self._buf:
                    raise ValueError("truncated frame at EOF")
                return None
            self._buf += chunk
