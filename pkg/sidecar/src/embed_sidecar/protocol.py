"""Wire framing for the embedding service.

Every record is a 4-byte big-endian unsigned length followed by that many
bytes of UTF-8 encoded JSON. See PROTOCOL.md for the record schemas; this
module only frames and unframes.
"""

from __future__ import annotations

import json
import struct

PROTOCOL_VERSION = 1
_LEN = struct.Struct(">I")
MAX_RECORD_BYTES = 64 * 1024 * 1024


class ProtocolError(Exception):
    """The byte stream violated the framing (not a per-record error)."""


def encode_record(record: dict) -> bytes:
    payload = json.dumps(record, ensure_ascii=False).encode("utf-8")
    return _LEN.pack(len(payload)) + payload


def send_record(stream, record: dict) -> None:
    stream.sendall(encode_record(record))


def recv_record(stream) -> dict | None:
    """Read one record; None on clean end-of-stream at a frame boundary."""
    header = _recv_exact(stream, _LEN.size, allow_eof=True)
    if header is None:
        return None
    (length,) = _LEN.unpack(header)
    if length > MAX_RECORD_BYTES:
        raise ProtocolError(f"record of {length} bytes exceeds the limit")
    payload = _recv_exact(stream, length, allow_eof=False)
    try:
        record = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"record is not UTF-8 JSON: {exc}") from exc
    if not isinstance(record, dict):
        raise ProtocolError("record must be a JSON object")
    return record


def _recv_exact(stream, n: int, allow_eof: bool) -> bytes | None:
    buf = b""
    while len(buf) < n:
        part = stream.recv(n - len(buf))
        if not part:
            if allow_eof and not buf:
                return None
            raise ProtocolError("connection closed mid-record")
        buf += part
    return buf
