"""
Three ways to cut a statute
===========================

Blind windows ignore structure; flat chunks are whole articles; multilayer
chunks give every unit (article, caput, paragraph, inciso, alínea) its own
chunk. Reference records add three more entries per unit.
"""

from pathlib import Path

from polyvector import CRFB, UnitKind, enumerate_units, parse_document
from polyvector.chunking import blind_windows, chunk_blind, chunk_flat, chunk_multilayer, make_reference_records

source = (Path(__file__).parents[1] / "tests" / "fixtures" / "crfb_excerpt.txt").read_text(encoding="utf-8")
tree, report = parse_document(source, CRFB)

# Window arithmetic first: 1200 tokens with 800-token windows and 400 overlap.
print(blind_windows(1200, 800, 400))

blind = chunk_blind(tree, 200, 100)
flat = chunk_flat(tree, CRFB)
multi = chunk_multilayer(tree, CRFB)
refs = make_reference_records(enumerate_units(tree, set(UnitKind)), tree, CRFB)

for name, chunks in [("blind", blind), ("flat", flat), ("multilayer", multi)]:
    print(f"{name:10s} content={len(chunks):4d}  with references={len(chunks) + len(refs):4d}")

first = refs[:3]
for ref in first:
    print(f"{ref.tag:4s} -> {ref.payload.id}: {ref.embed_input}")
