"""
Deterministic fallback embedder for raw headlines.

Sentence encoders are external to this pipeline; this bag-of-tokens hasher
only exists so demo runs can start from headlines. Tokens are hashed with
BLAKE2b (not Python's salted `hash`) so embeddings are stable across runs.
"""

from __future__ import annotations
import hashlib
import re
from typing import List

import numpy as np

from utils.errors import InvalidConfig
from utils.news.config import DEFAULT_EMBED_DIM, TOKEN_PATTERN


class TokenHashEmbedder:
    """Hash each lower-cased token into one of d buckets, then L2-normalize."""

    def __init__(self, dim: int = DEFAULT_EMBED_DIM):
        if dim < 1:
            raise InvalidConfig("Embedding dimension must be >= 1")
        self.dim = dim
        self._pattern = re.compile(TOKEN_PATTERN)

    def tokenize(self, text: str) -> List[str]:
        return self._pattern.findall(text.lower())

    def bucket(self, token: str) -> int:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little") % self.dim

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        for token in self.tokenize(text):
            vec[self.bucket(token)] += 1.0
        norm = np.linalg.norm(vec)
        return vec / norm if norm > 0 else vec
