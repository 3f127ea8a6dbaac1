"""Out-of-process embedding service: frozen 768-dim pooled text vectors."""

from .backends import DIM, MAX_TOKENS, POOLING, MockBackend, make_backend
from .protocol import PROTOCOL_VERSION, ProtocolError, recv_record, send_record
from .server import EmbedServer, serve, serve_stdio

__version__ = "0.1.0"

__all__ = [
    "DIM",
    "MAX_TOKENS",
    "POOLING",
    "PROTOCOL_VERSION",
    "EmbedServer",
    "MockBackend",
    "ProtocolError",
    "make_backend",
    "recv_record",
    "send_record",
    "serve",
    "serve_stdio",
]
