"""
Choosing how much context to keep
=================================

Ranked candidates are accepted while fewer than the minimum number of
segments are held, then while they stay within a fraction of the best
similarity and the token budget is not yet spent.
"""

import numpy as np

from polyvector import SelectionPolicy, select_context
from polyvector.retrieval import Candidate

rng = np.random.default_rng(3)
sims = np.sort(rng.uniform(0.45, 0.75, size=20))[::-1]
tokens = rng.integers(100, 1500, size=20)
candidates = [Candidate(f"c{i}", "ART", f"Art. {i + 1}", float(s), int(t), record_id=f"{i:03d}")
              for i, (s, t) in enumerate(zip(sims, tokens))]

for policy in [SelectionPolicy(), SelectionPolicy(token_budget=8000), SelectionPolicy(drop_fraction=0.05)]:
    m = select_context(candidates, policy).metrics
    print(f"{policy}: {m.segments} segments, {m.total_tokens} tokens, "
          f"sims {m.min:.4f}..{m.max:.4f}, mean {m.mean:.4f}, sd {m.stddev:.4f}")
