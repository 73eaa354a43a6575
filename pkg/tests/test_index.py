import hashlib

import numpy as np
import pytest

from polyvector import CRFB, Embedder, ProviderConfig, UnitKind, enumerate_units
from polyvector.chunking import Chunk
from polyvector.index import (
    METHODS,
    EmbeddingRecord,
    IndexManifest,
    IndexStoreError,
    PolyIndex,
    build_index,
    build_method_index,
    get_method,
    method_inputs,
)


def random_index(n, dim, rng, quantize=None, token_choices=(10, 20, 30)):
    vecs = rng.normal(size=(n, dim))
    if quantize:
        vecs = np.round(vecs * quantize) / quantize  # coarse grid makes exact ties likely
        vecs[np.all(vecs == 0, axis=1), 0] = 1.0
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    chunk = Chunk(id="c", text="t", token_count=1, tag="ART", display_label="c", embed_input="t")
    ids = [f"r{i:06d}" for i in range(n)]
    rng.shuffle(ids)  # record order differs from id order
    records = [
        EmbeddingRecord(record_id=ids[i], tag="ART", payload_chunk_id="c", display_label=str(i),
                        token_count=int(rng.choice(token_choices)))
        for i in range(n)
    ]
    manifest = IndexManifest("x", "flat", False, n, 1, dim, "float64", "p", {}, "simple")
    return PolyIndex(manifest, records, vecs, {"c": chunk})


def naive_knn(index, q, k):
    """Full scan with a Python sort on (-similarity, -tokens, record_id), sims tied to 12 places."""
    rows = []
    for rec, v in zip(index.records, index.vectors):
        sim = float(np.dot(v, q) / (np.linalg.norm(v) * np.linalg.norm(q)))
        rows.append((-float(np.round(sim, 12)), -rec.token_count, rec.record_id, rec, sim))
    rows.sort(key=lambda r: r[:3])
    return [(r[3], r[4]) for r in rows[:k]]


def test_knn_equals_naive_scan():
    rng = np.random.default_rng(5)
    index = random_index(1000, 256, rng)
    for _ in range(100):
        q = rng.normal(size=256)
        k = int(rng.integers(1, 60))
        got = index.knn(q, k)
        want = naive_knn(index, q, k)
        assert [r.record_id for r, _ in got] == [r.record_id for r, _ in want]
        assert np.allclose([s for _, s in got], [s for _, s in want], rtol=0, atol=1e-12)


def test_knn_tie_break_with_duplicates():
    rng = np.random.default_rng(9)
    index = random_index(400, 4, rng, quantize=1)
    for _ in range(50):
        q = np.round(rng.normal(size=4))
        if not q.any():
            q[0] = 1
        got = index.knn(q, 400)
        want = naive_knn(index, q, 400)
        sims = [s for _, s in got]
        assert len(set(np.round(sims, 12))) < len(sims)  # ties really occur
        assert [r.record_id for r, _ in got] == [r.record_id for r, _ in want]


def test_stored_vector_ranks_first():
    rng = np.random.default_rng(1)
    index = random_index(300, 32, rng)
    hit, sim = index.knn(index.vectors[17], 1)[0]
    assert hit is index.records[17]
    assert sim == pytest.approx(1.0, abs=1e-12)


def test_k_saturates():
    rng = np.random.default_rng(2)
    index = random_index(20, 8, rng)
    assert len(index.knn(rng.normal(size=8), 500)) == 20
    with pytest.raises(ValueError):
        index.knn(rng.normal(size=8), 0)
    with pytest.raises(ValueError):
        index.knn(rng.normal(size=7), 3)


def test_single_chunk_no_references():
    chunk = Chunk(id="c", text="Texto.", token_count=2, tag="ART", display_label="c", embed_input="Texto.")
    index = build_index([chunk], [], Embedder(ProviderConfig()), get_method("b"))
    assert index.manifest.record_count == 1
    with pytest.raises(ValueError):
        build_index([], [], Embedder(ProviderConfig()), get_method("b"))


def test_unknown_method():
    with pytest.raises(ValueError):
        get_method("z")


@pytest.mark.parametrize("method_id", list(METHODS))
def test_record_count_identity(excerpt, method_id):
    tree, report = excerpt
    method = METHODS[method_id]
    chunks, refs = method_inputs(tree, CRFB, method)
    index = build_index(chunks, refs, Embedder(ProviderConfig()), method)
    units = report.total_units
    assert index.manifest.record_count == len(chunks) + (3 * units if method.poly else 0)
    if method.strategy == "flat":
        assert len(chunks) == report.unit_count_by_kind["article"]
    if method.strategy == "multilayer":
        assert len(chunks) == units


def test_reference_records_point_at_unit_payloads(excerpt):
    tree, _ = excerpt
    index = build_method_index(tree, CRFB, get_method("g"), Embedder(ProviderConfig()))
    content = {r.payload_chunk_id for r in index.records if r.tag not in ("LBL", "URN", "I+L")}
    for r in index.records:
        assert r.payload_chunk_id in index.chunks
        if r.tag in ("LBL", "URN", "I+L"):
            assert r.payload_chunk_id in content
            if r.tag == "URN":
                assert r.display_label == index.chunks[r.payload_chunk_id].urn


def test_blind_poly_payloads_include_unit_chunks(excerpt):
    tree, _ = excerpt
    index = build_method_index(tree, CRFB, get_method("e"), Embedder(ProviderConfig()))
    n_units = len(enumerate_units(tree, set(UnitKind)))
    blind = [c for c in index.chunks.values() if c.tag == "Blind"]
    assert len(index.chunks) == len(blind) + n_units


def _digest(directory):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(directory.iterdir())}


def test_save_load_round_trip(excerpt, tmp_path):
    tree, _ = excerpt
    index = build_method_index(tree, CRFB, get_method("h"), Embedder(ProviderConfig()), out_dir=tmp_path / "h")
    loaded = PolyIndex.load(tmp_path / "h")
    assert loaded.manifest == index.manifest
    assert loaded.records == index.records
    assert loaded.chunks == index.chunks
    assert np.array_equal(loaded.vectors, index.vectors)
    q = index.vectors[3]
    assert [r.record_id for r, _ in loaded.knn(q, 10)] == [r.record_id for r, _ in index.knn(q, 10)]


def test_rebuild_with_warm_cache_is_byte_identical(excerpt, tmp_path):
    tree, _ = excerpt
    cfg = ProviderConfig(cache_path=str(tmp_path / "cache"))
    build_method_index(tree, CRFB, get_method("g"), Embedder(cfg), out_dir=tmp_path / "one")
    build_method_index(tree, CRFB, get_method("g"), Embedder(cfg), out_dir=tmp_path / "two")
    assert _digest(tmp_path / "one") == _digest(tmp_path / "two")


def test_float32_storage(excerpt, tmp_path):
    tree, _ = excerpt
    build_method_index(tree, CRFB, get_method("b"), Embedder(ProviderConfig()), dtype="float32",
                       out_dir=tmp_path / "b")
    loaded = PolyIndex.load(tmp_path / "b")
    assert loaded.vectors.dtype == np.float32
    assert (tmp_path / "b" / "vectors.bin").stat().st_size == loaded.manifest.record_count * loaded.dim * 4


def test_load_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        PolyIndex.load(tmp_path / "missing")
    rng = np.random.default_rng(0)
    index = random_index(5, 4, rng)
    with pytest.raises(IndexStoreError):
        PolyIndex(index.manifest, index.records[:4], index.vectors, index.chunks)
