"""
Running the method matrix
=========================

Eight methods (three chunking strategies, with and without reference
records, with and without query normalization) are run over the bundled
query suite. Output files land in a temporary directory.
"""

import tempfile
from pathlib import Path

from polyvector.cli import cmd_eval, cmd_ingest
from polyvector.evaluation import read_tables

excerpt = Path(__file__).parents[1] / "tests" / "fixtures" / "crfb_excerpt.txt"
with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    cmd_ingest(excerpt, tmp / "tree")
    cmd_eval(tmp / "tree" / "tree.json", tmp / "out")
    for path in sorted((tmp / "out").iterdir()):
        if path.is_file():
            print(path.name)
    rows = read_tables(tmp / "out" / "tables.csv")
    for row in rows[:8]:
        print(f"{row['query']} {row['method']:34s} segments={row['segments']:3d} tokens={row['tokens']:5d} "
              f"max={row['max']:.4f} expected rank={row['expected_rank']}")
    print((tmp / "out" / "heatmap_max_similarity.csv").read_text())
