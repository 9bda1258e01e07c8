# %% [markdown]
# # How many oracle calls?
# The cost of a query is driven by m (literal references) and q (negations
# spanning two or more variables); m * 2**q calls always suffice.

# %%
from ppq import Evaluator
from ppq.bench import run_bench
from ppq.model import independent_kb
from ppq.query import And, Lit, Literal, Not

for family in ("form1", "form2", "form3", "form4"):
    rows = run_bench(family, range(4, 33, 4), timing=False)
    print(family, [(r.m, r.sv_calls_cache_off) for r in rows])

# %% [markdown]
# The nested family stacks one negation inside another. Only one of them is
# ever at the top level, so each split peels off a single level and the count
# grows as 1 + m(m-1)/2, well under the m * 2**q bound.

# %%
for r in run_bench("nested", range(3, 12), timing=False):
    print(f"m={r.m:2}  q={r.q:2}  calls={r.sv_calls_cache_off:3}  bound={r.predicted_bound}")

# %% [markdown]
# Exponential growth shows up when the negations sit side by side instead.
# With absorption of negated literals turned off, a conjunction of m
# negated literals costs m * 2**(m-1) calls without the cache.

# %%
for m in range(2, 11):
    kb = independent_kb(m)
    p = And(tuple(Not(Lit(Literal(i, 0))) for i in range(m)))
    calls = Evaluator(kb, cache=False, absorb=False).eval_marginal(p).stats.sv_calls
    print(f"m={m:2}  calls={calls:5}  m*2^(m-1)={m * 2 ** (m - 1):5}  ratio to m: {calls / m:g}")
