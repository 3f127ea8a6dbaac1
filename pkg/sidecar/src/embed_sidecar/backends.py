"""Embedding backends: the frozen transformer and a model-free mock.

A backend embeds one text into a fixed 768-dim vector and reports whether
the input was truncated at the 512-token limit. Backends must be pure
functions of their input within a process: identical text, identical bytes.
"""

from __future__ import annotations

import hashlib
import math

DIM = 768
MAX_TOKENS = 512
POOLING = "mean"


class MockBackend:
    """Deterministic stand-in used by the test suite and for protocol work
    without the model weights.

    Tokenizes on whitespace, embeds each token as a seeded hash vector and
    mean-pools, mirroring the real backend's shape and truncation contract.
    """

    model_id = "mock-768"
    dim = DIM

    def _token_vector(self, position: int, token: str) -> list[float]:
        # position-salted so word order matters, like the real model
        out = []
        counter = 0
        while len(out) < DIM:
            digest = hashlib.sha256(f"{counter}|{position}|{token}".encode()).digest()
            for i in range(0, len(digest) - 7, 8):
                v = int.from_bytes(digest[i : i + 8], "big") / 2**63 - 1.0
                out.append(v)
                if len(out) == DIM:
                    break
            counter += 1
        return out

    def embed(self, text: str) -> tuple[list[float], bool]:
        tokens = text.split()
        truncated = len(tokens) > MAX_TOKENS
        tokens = tokens[:MAX_TOKENS]
        if not tokens:
            # the empty sequence still has a deterministic embedding
            return self._token_vector(0, "\x00empty"), False
        acc = [0.0] * DIM
        for pos, t in enumerate(tokens):
            vec = self._token_vector(pos, t)
            for i in range(DIM):
                acc[i] += vec[i]
        n = len(tokens)
        return [a / n for a in acc], truncated


class DistilBertBackend:
    """Frozen pre-trained transformer, mean-pooled final hidden states.

    Imports torch/transformers lazily so the package installs and serves
    the mock without them. Weights are never updated.
    """

    dim = DIM

    def __init__(self, model_name: str = "distilbert-base-uncased"):
        import torch
        from transformers import AutoModel, AutoTokenizer

        self._torch = torch
        self.model_id = model_name
        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        self.model = AutoModel.from_pretrained(model_name)
        self.model.eval()

    def embed(self, text: str) -> tuple[list[float], bool]:
        torch = self._torch
        full = self.tokenizer(text, truncation=False)
        truncated = len(full["input_ids"]) > MAX_TOKENS
        enc = self.tokenizer(
            text, truncation=True, max_length=MAX_TOKENS, return_tensors="pt"
        )
        with torch.no_grad():
            hidden = self.model(**enc).last_hidden_state[0]  # (tokens, 768)
            mask = enc["attention_mask"][0].unsqueeze(-1)
            pooled = (hidden * mask).sum(dim=0) / mask.sum().clamp(min=1)
        vector = [float(x) for x in pooled]
        if len(vector) != DIM or any(math.isnan(v) or math.isinf(v) for v in vector):
            raise RuntimeError("model produced an invalid vector")
        return vector, truncated


def make_backend(name: str):
    if name == "mock":
        return MockBackend()
    return DistilBertBackend(name)
