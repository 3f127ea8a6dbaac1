"""Client for the out-of-process embedding sidecar.

Wire format (shared with the sidecar server, documented in
sidecar/PROTOCOL.md): every record is a 4-byte big-endian unsigned length
followed by that many bytes of UTF-8 JSON. On connect the server sends one
handshake record advertising model id, vector dimension and pooling mode;
afterwards each request record is answered by exactly one response record,
in order.
"""

from __future__ import annotations

import json
import socket
import struct

import numpy as np

from .errors import SidecarEncoderError, SidecarTransportError
from .features import TextEmbedding
from .preprocess import ContentChunk

PROTOCOL_VERSION = 1
_LEN = struct.Struct(">I")
MAX_RECORD_BYTES = 64 * 1024 * 1024


def send_record(sock: socket.socket, record: dict) -> None:
    payload = json.dumps(record, ensure_ascii=False).encode("utf-8")
    sock.sendall(_LEN.pack(len(payload)) + payload)


def recv_record(sock: socket.socket) -> dict:
    header = _recv_exact(sock, _LEN.size)
    (length,) = _LEN.unpack(header)
    if length > MAX_RECORD_BYTES:
        raise SidecarTransportError(f"record of {length} bytes exceeds the limit")
    return json.loads(_recv_exact(sock, length).decode("utf-8"))


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        try:
            part = sock.recv(n - len(buf))
        except OSError as exc:
            raise SidecarTransportError(f"connection failed: {exc}") from exc
        if not part:
            raise SidecarTransportError("connection closed mid-record")
        buf += part
    return buf


def parse_endpoint(endpoint: str) -> tuple[str, int]:
    host, _, port = endpoint.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"endpoint must look like host:port, got {endpoint!r}")
    return host, int(port)


class SidecarEncoder:
    """Text encoder backed by a running sidecar process.

    Transport problems (unreachable endpoint, broken stream) raise
    SidecarTransportError; a well-formed error response from the sidecar
    raises SidecarEncoderError.
    """

    kind = "sidecar"

    def __init__(self, endpoint: str, timeout: float = 30.0):
        self.endpoint = endpoint
        self.timeout = timeout
        self._sock: socket.socket | None = None
        self._counter = 0
        self.model_id: str | None = None
        self.dim: int | None = None
        self.pooling: str | None = None

    def connect(self) -> dict:
        host, port = parse_endpoint(self.endpoint)
        try:
            sock = socket.create_connection((host, port), timeout=self.timeout)
        except OSError as exc:
            raise SidecarTransportError(
                f"cannot reach sidecar at {self.endpoint}: {exc}"
            ) from exc
        handshake = recv_record(sock)
        if handshake.get("type") != "handshake":
            sock.close()
            raise SidecarTransportError("peer did not send a handshake record")
        self._sock = sock
        self.model_id = handshake.get("model_id")
        self.dim = int(handshake["dim"])
        self.pooling = handshake.get("pooling")
        return handshake

    @property
    def encoder_id(self) -> str:
        if self.model_id is None:
            self.connect()
        return f"sidecar-{self.model_id}-{self.pooling}"

    def close(self) -> None:
        if self._sock is not None:
            self._sock.close()
            self._sock = None

    def embed(self, text: str) -> tuple[np.ndarray, bool]:
        """Embed one text; returns (vector, truncated).

        Embedding is a pure request, so one reconnect-and-retry on a
        transport failure is safe (at-most-once effects hold trivially).
        """
        try:
            return self._embed_once(text)
        except SidecarTransportError:
            self.close()
            self.connect()
            return self._embed_once(text)

    def _embed_once(self, text: str) -> tuple[np.ndarray, bool]:
        if self._sock is None:
            self.connect()
        self._counter += 1
        request_id = f"r{self._counter}"
        try:
            send_record(self._sock, {"request_id": request_id, "text": text})
        except OSError as exc:
            raise SidecarTransportError(f"send failed: {exc}") from exc
        response = recv_record(self._sock)
        if response.get("request_id") != request_id:
            raise SidecarTransportError(
                f"response id {response.get('request_id')!r} does not match {request_id!r}"
            )
        if "error" in response:
            raise SidecarEncoderError(response["error"])
        vector = np.asarray(response["vector"], dtype=float)
        if vector.shape != (self.dim,) or not np.all(np.isfinite(vector)):
            raise SidecarEncoderError(
                f"sidecar returned a malformed vector of shape {vector.shape}"
            )
        return vector, bool(response.get("truncated", False))

    def encode(self, chunk: ContentChunk) -> TextEmbedding:
        vector, _ = self.embed(chunk.text)
        return TextEmbedding(vector)

    def encode_text(self, text: str) -> TextEmbedding:
        vector, _ = self.embed(text)
        return TextEmbedding(vector)

    def spec(self) -> dict:
        return {"kind": self.kind, "endpoint": self.endpoint}

    def __enter__(self) -> "SidecarEncoder":
        if self._sock is None:
            self.connect()
        return self

    def __exit__(self, *exc) -> None:
        self.close()
