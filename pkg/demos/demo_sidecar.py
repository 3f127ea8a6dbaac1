"""Talk to the embedding sidecar through the primary-side client.

Uses the model-free mock backend so the demo runs anywhere; point the
server at a real checkpoint with:

    embed-sidecar --endpoint 127.0.0.1:7700 --model distilbert-base-uncased

and pass --encoder sidecar --sidecar-endpoint 127.0.0.1:7700 to the
authattr CLI to use it for dataset building and training.
"""

from embed_sidecar.backends import MockBackend
from embed_sidecar.server import EmbedServer

from authattr.sidecar_client import SidecarEncoder

server = EmbedServer(MockBackend())
server.start_background()
print(f"sidecar listening on {server.endpoint}")

try:
    with SidecarEncoder(server.endpoint) as enc:
        print(f"handshake: model={enc.model_id} dim={enc.dim} pooling={enc.pooling}")

        vec, truncated = enc.embed("a short abstract about nothing in particular")
        print(f"short text -> {vec.shape[0]}-dim vector, truncated={truncated}")

        vec2, _ = enc.embed("a short abstract about nothing in particular")
        print(f"identical text is bitwise stable: {(vec == vec2).all()}")

        long_text = " ".join(["token"] * 1000)
        _, truncated = enc.embed(long_text)
        print(f"1000-word text -> truncated={truncated}")
finally:
    server.close()
