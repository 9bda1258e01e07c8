# %% [markdown]
# # Knowledge bases
# A knowledge base is either a full joint table or a Bayesian network.
# Both load from JSON and both answer single-variable queries P(X=x | E).

# %%
from pathlib import Path

import numpy as np

from ppq import EnumerationOracle, SVQuery, load_kb_file
from ppq.model import expand_joint, factorize_joint, random_bayes_net
from ppq.query import Literal

KBS = Path(__file__).resolve().parent.parent / "kbs"

demo2 = load_kb_file(KBS / "demo2.json")
print(demo2.kind, [v.name for v in demo2.variables])
print(expand_joint(demo2))

# %%
# P(a | b) = 0.3 / (0.3 + 0.4)
oracle = EnumerationOracle(demo2)
a, b = Literal(0, 0), Literal(1, 0)
print("P(a | b) =", oracle.sv_prob(SVQuery(a, (b,))))

# %% [markdown]
# Multi-valued variables work the same way. `paint` has a three-valued colour
# and a four-valued shade that depends on it.

# %%
paint = load_kb_file(KBS / "paint.json")
table = expand_joint(paint)
print(paint.shape, table.sum())
print("P(colour) =", table.sum(axis=(1, 2)).round(3))

# %%
# A joint table can be turned into an equivalent network and back.
rng = np.random.default_rng(0)
bn = random_bayes_net(5, rng)
flat = expand_joint(bn)
again = expand_joint(factorize_joint(type(bn).from_joint(bn.variables, flat.ravel())))
print("max difference after round trip:", np.abs(flat - again).max())
