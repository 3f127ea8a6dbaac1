"""Socket server for the embedding service.

Each connection gets the handshake record first, then a strict one-response
per-request loop in request order. A malformed request record yields an
error response carrying whatever request id could be recovered; the stream
keeps serving. Connections are handled in parallel threads; requests within
one connection are serial.
"""

from __future__ import annotations

import socket
import threading

from .backends import POOLING, make_backend
from .protocol import PROTOCOL_VERSION, ProtocolError, recv_record, send_record


class EmbedServer:
    def __init__(self, backend, host: str = "127.0.0.1", port: int = 0):
        self.backend = backend
        self._server = socket.create_server((host, port))
        self.host, self.port = self._server.getsockname()[:2]
        self._threads: list[threading.Thread] = []
        self._accept_thread: threading.Thread | None = None
        self._closing = False

    @property
    def endpoint(self) -> str:
        return f"{self.host}:{self.port}"

    def handshake_record(self) -> dict:
        return {
            "type": "handshake",
            "protocol_version": PROTOCOL_VERSION,
            "model_id": self.backend.model_id,
            "dim": self.backend.dim,
            "pooling": POOLING,
        }

    def _handle_request(self, record: dict) -> dict:
        request_id = record.get("request_id")
        if not isinstance(request_id, str):
            return {"request_id": None, "error": "missing or non-string request_id"}
        text = record.get("text")
        if not isinstance(text, str):
            return {"request_id": request_id, "error": "missing or non-string text"}
        try:
            vector, truncated = self.backend.embed(text)
        except Exception as exc:  # backend failure must not kill the stream
            return {"request_id": request_id, "error": f"encoder failure: {exc}"}
        return {"request_id": request_id, "vector": vector, "truncated": truncated}

    def _serve_connection(self, conn: socket.socket) -> None:
        with conn:
            try:
                send_record(conn, self.handshake_record())
                while True:
                    record = recv_record(conn)
                    if record is None:
                        return
                    send_record(conn, self._handle_request(record))
            except (ProtocolError, OSError):
                return  # framing broke or the peer vanished; drop the connection

    def serve_forever(self) -> None:
        while not self._closing:
            try:
                conn, _ = self._server.accept()
            except OSError:
                return
            t = threading.Thread(target=self._serve_connection, args=(conn,), daemon=True)
            t.start()
            self._threads.append(t)

    def start_background(self) -> None:
        self._accept_thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._accept_thread.start()

    def close(self) -> None:
        self._closing = True
        self._server.close()


def serve(endpoint: str, backend_name: str = "mock") -> None:
    """Blocking entry point: serve the given backend on host:port."""
    host, _, port = endpoint.rpartition(":")
    server = EmbedServer(make_backend(backend_name), host or "127.0.0.1", int(port))
    print(f"embed-sidecar: {server.handshake_record()} on {server.endpoint}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.close()


class _StdStream:
    """Adapts binary stdin/stdout to the socket recv/sendall interface."""

    def __init__(self, rfile, wfile):
        self._r, self._w = rfile, wfile

    def recv(self, n: int) -> bytes:
        return self._r.read(n) or b""

    def sendall(self, data: bytes) -> None:
        self._w.write(data)
        self._w.flush()


def serve_stdio(backend_name: str = "mock", rfile=None, wfile=None) -> None:
    """Serve one session over standard streams with the same framing."""
    import sys

    stream = _StdStream(rfile or sys.stdin.buffer, wfile or sys.stdout.buffer)
    backend = make_backend(backend_name)
    shim = EmbedServer.__new__(EmbedServer)
    shim.backend = backend
    send_record(stream, shim.handshake_record())
    try:
        while True:
            record = recv_record(stream)
            if record is None:
                return
            send_record(stream, shim._handle_request(record))
    except ProtocolError:
        return
