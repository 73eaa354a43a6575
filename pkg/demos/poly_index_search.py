"""
Searching a poly-vector index
=============================

The same statute is indexed with and without reference records. A query that
is just a unit's label or URN lands on that unit only when the index carries
those records.
"""

from polyvector import METHODS, SYNTHETIC_NORM, Embedder, ProviderConfig, UnitKind, build_method_index, build_urn, enumerate_units, parse_document, retrieve, synthetic_statute

tree, report = parse_document(synthetic_statute(30), SYNTHETIC_NORM)
embedder = Embedder(ProviderConfig())

target = next(u for u in enumerate_units(tree, {UnitKind.INCISO}))
urn = build_urn(target, tree, SYNTHETIC_NORM).value
print("query:", urn)

for method_id in ("c", "g"):
    method = METHODS[method_id]
    index = build_method_index(tree, SYNTHETIC_NORM, method, embedder)
    result = retrieve(urn, index, embedder, method)
    top = result.items[0]
    print(f"method {method_id}: {index.manifest.record_count} records, top hit {top.display_label!r} "
          f"via {top.tag} at {top.similarity:.4f}, hit={top.chunk_id == 'unit:' + target.id}")
