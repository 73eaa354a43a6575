"""
Embedding texts offline
=======================

The default provider hashes character n-grams into a fixed-size unit vector,
so everything here runs without a network. Vectors can be cached on disk by
content hash; a remote provider plugs into the same interface.
"""

import tempfile

import numpy as np

from polyvector import Embedder, ProviderConfig, cosine, truncate

embedder = Embedder(ProviderConfig(target_dim=256))
texts = ["Art. 69 da Constituição", "art. 69", "soberania popular", "urn:lex:br:federal:constituicao:1988-10-05;1988!art69"]
vecs = embedder.embed_batch(texts)
print(np.round(vecs @ vecs.T, 3))

# Prefix truncation with renormalization keeps unit length.
short = truncate(vecs[0], 32)
print(short.shape, np.linalg.norm(short))
print("cosine of truncated pair:", round(cosine(truncate(vecs[0], 32), truncate(vecs[1], 32)), 3))

with tempfile.TemporaryDirectory() as cache:
    cfg = ProviderConfig(cache_path=cache)
    a = Embedder(cfg).embed_batch(texts)
    b = Embedder(cfg).embed_batch(texts)  # served from disk
    print("cached vectors identical:", np.array_equal(a, b))
