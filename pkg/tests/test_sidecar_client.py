import json
import socket
import struct
import threading

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from authattr.errors import SidecarEncoderError, SidecarTransportError
from authattr.preprocess import ContentChunk
from authattr.sidecar_client import SidecarEncoder, parse_endpoint, recv_record, send_record

_LEN = struct.Struct(">I")


class MockPeer:
    """Minimal in-test peer speaking the length-prefixed JSON protocol.

    Embeds text as a deterministic 8-dim vector of character statistics so
    round-trips are checkable without any model.
    """

    DIM = 8

    def __init__(self, fail_on: str | None = None, garble_handshake: bool = False):
        self.fail_on = fail_on
        self.garble_handshake = garble_handshake
        self.seen: list[str] = []
        self._server = socket.create_server(("127.0.0.1", 0))
        self.port = self._server.getsockname()[1]
        self._thread = threading.Thread(target=self._serve, daemon=True)
        self._thread.start()

    @property
    def endpoint(self) -> str:
        return f"127.0.0.1:{self.port}"

    def embed(self, text: str) -> list[float]:
        vec = [0.0] * self.DIM
        for i, ch in enumerate(text):
            vec[i % self.DIM] += (ord(ch) % 997) / 997.0
        vec[0] += len(text)
        return vec

    def _serve(self):
        while True:
            try:
                conn, _ = self._server.accept()
            except OSError:
                return
            with conn:
                try:
                    if self.garble_handshake:
                        send_record(conn, {"type": "not-a-handshake"})
                    else:
                        send_record(
                            conn,
                            {
                                "type": "handshake",
                                "model_id": "mock-peer",
                                "dim": self.DIM,
                                "pooling": "mean",
                                "protocol_version": 1,
                            },
                        )
                    while True:
                        req = recv_record(conn)
                        text = req.get("text", "")
                        self.seen.append(text)
                        if self.fail_on is not None and self.fail_on in text:
                            send_record(
                                conn,
                                {"request_id": req.get("request_id"), "error": "mock failure"},
                            )
                            continue
                        send_record(
                            conn,
                            {
                                "request_id": req.get("request_id"),
                                "vector": self.embed(text),
                                "truncated": len(text.split()) > 512,
                            },
                        )
                except (SidecarTransportError, OSError):
                    continue

    def close(self):
        self._server.close()


@pytest.fixture()
def peer():
    p = MockPeer()
    yield p
    p.close()


class TestProtocol:
    def test_handshake_populates_encoder(self, peer):
        with SidecarEncoder(peer.endpoint) as enc:
            assert enc.dim == MockPeer.DIM
            assert enc.model_id == "mock-peer"
            assert enc.pooling == "mean"
            assert enc.encoder_id == "sidecar-mock-peer-mean"

    def test_embedding_round_trip(self, peer):
        with SidecarEncoder(peer.endpoint) as enc:
            vec, truncated = enc.embed("hello sidecar")
            assert not truncated
            assert np.allclose(vec, peer.embed("hello sidecar"))
            assert peer.seen[-1] == "hello sidecar"

    def test_encode_chunk_interface(self, peer):
        with SidecarEncoder(peer.endpoint) as enc:
            chunk = ContentChunk(("alpha", "beta"), 0)
            emb = enc.encode(chunk)
            assert emb.vector.shape == (MockPeer.DIM,)

    def test_long_text_truncation_flag(self, peer):
        with SidecarEncoder(peer.endpoint) as enc:
            _, truncated = enc.embed(" ".join(["word"] * 1000))
            assert truncated

    @settings(max_examples=40, deadline=None)
    @given(st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=400))
    def test_unicode_round_trips_losslessly(self, text):
        peer = MockPeer()
        try:
            with SidecarEncoder(peer.endpoint) as enc:
                enc.embed(text)
                assert peer.seen[-1] == text
        finally:
            peer.close()

    def test_requests_answered_in_order(self, peer):
        with SidecarEncoder(peer.endpoint) as enc:
            for i in range(10):
                vec, _ = enc.embed(f"text number {i}")
                assert np.allclose(vec, peer.embed(f"text number {i}"))


class TestErrors:
    def test_unreachable_endpoint_is_transport_error(self):
        probe = socket.create_server(("127.0.0.1", 0))
        port = probe.getsockname()[1]
        probe.close()  # now guaranteed closed
        enc = SidecarEncoder(f"127.0.0.1:{port}", timeout=0.5)
        with pytest.raises(SidecarTransportError):
            enc.connect()

    def test_peer_error_is_encoder_error(self):
        peer = MockPeer(fail_on="poison")
        try:
            with SidecarEncoder(peer.endpoint) as enc:
                enc.embed("fine text")
                with pytest.raises(SidecarEncoderError):
                    enc.embed("poison pill")
        finally:
            peer.close()

    def test_bad_handshake_is_transport_error(self):
        peer = MockPeer(garble_handshake=True)
        try:
            with pytest.raises(SidecarTransportError):
                SidecarEncoder(peer.endpoint).connect()
        finally:
            peer.close()

    def test_endpoint_parsing(self):
        assert parse_endpoint("127.0.0.1:8000") == ("127.0.0.1", 8000)
        with pytest.raises(ValueError):
            parse_endpoint("no-port-here")

    def test_retry_reconnects_after_dropped_connection(self, peer):
        enc = SidecarEncoder(peer.endpoint)
        enc.connect()
        enc._sock.close()  # simulate the connection dying under the client
        vec, _ = enc.embed("after reconnect")
        assert np.allclose(vec, peer.embed("after reconnect"))
        enc.close()


class TestFraming:
    def test_record_round_trip_over_socketpair(self):
        a, b = socket.socketpair()
        try:
            payload = {"request_id": "r1", "text": "snowman ☃ and emoji \U0001f40d"}
            send_record(a, payload)
            assert recv_record(b) == payload
        finally:
            a.close()
            b.close()

    def test_truncated_stream_raises_transport_error(self):
        a, b = socket.socketpair()
        try:
            blob = json.dumps({"x": 1}).encode()
            a.sendall(_LEN.pack(len(blob) + 10) + blob)
            a.close()
            with pytest.raises(SidecarTransportError):
                recv_record(b)
        finally:
            b.close()
