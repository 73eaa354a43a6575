"""
Parsing a statute and naming its units
======================================

A statute is read into a tree of structural units. Every unit gets a
human-readable label and a urn:lex identifier derived from its position.
"""

from pathlib import Path

from polyvector import CRFB, UnitKind, build_identifier_plus_label, build_label, build_urn, enumerate_units, parse_document

source = (Path(__file__).parents[1] / "tests" / "fixtures" / "crfb_excerpt.txt").read_text(encoding="utf-8")
tree, report = parse_document(source, CRFB)

print(f"{report.total_units} units, {len(report.warnings)} warnings")
for kind, count in sorted(report.unit_count_by_kind.items()):
    print(f"  {kind:15s} {count}")

# Walk the provisions of one article and show the three identities each unit carries.
units = enumerate_units(tree, set(UnitKind))
art60 = [u for u in units if build_urn(u, tree, CRFB).value.split("!")[-1].startswith("art60")]
for unit in art60:
    print(build_label(unit, tree, CRFB).canonical)
    print("   ", build_urn(unit, tree, CRFB).value)
    print("   ", build_identifier_plus_label(unit, tree, CRFB))
