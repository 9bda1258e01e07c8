# %% [markdown]
# # A derivation, step by step
# Four independent fair coins and the query P(x1 | x2 given x3 | !x4).
# Enumerating all 16 rows gives 0.5625 / 0.75 = 0.75.

# %%
from pathlib import Path

from ppq import Evaluator, load_kb_file

kb = load_kb_file(Path(__file__).resolve().parent.parent / "kbs" / "indep4.json")
query = "P(x1 | x2 given x3 | !x4)"

off = Evaluator(kb, cache=False, trace=True).evaluate(query)
print(off.trace.render())
print("SV calls without cache:", off.stats.sv_calls)

# %% [markdown]
# The term `!x3 & x4` is computed twice above: once inside the numerator
# and once for the evidence. With the cache on, the second time is free.

# %%
on = Evaluator(kb, cache=True, trace=True).evaluate(query)
print(on.trace.render())
print("SV calls with cache:", on.stats.sv_calls, "cache hits:", on.stats.cache_hits)
