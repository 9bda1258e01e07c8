# %% [markdown]
# # Queries and their normal forms
# Queries are written as `P(target given evidence)` with `&`, `|` and `!`.
# Before evaluation every `|` is rewritten with de Morgan's law and stacked
# negations are collapsed.

# %%
from ppq.model import independent_kb
from ppq.query import (
    count_spanning_negations,
    eliminate_redundant_negations,
    format_prop,
    format_query,
    parse,
    to_cn_form,
)

kb = independent_kb(4)
q = parse("P(x1 | x2 given x3 | !x4)", kb)
print(format_query(q, kb))
print(q.target)

# %%
for text in ["x1 | x2", "(x1 | x2) & (x3 | !x4)", "!!x1", "!(!(x1 & x2))", "!(x1 & !(x2 & !x3))"]:
    p = parse(text, kb).target
    cn = to_cn_form(p)
    nr = eliminate_redundant_negations(cn)
    print(f"{text:24} -> {format_prop(nr, kb):32} spanning negations: {count_spanning_negations(nr)}")

# %% [markdown]
# Negating a single literal never needs a `Not` node. The rewrite above keeps
# it as `x1!=t`; the evaluator then reads a binary `x1!=t` as `x1=f` and
# a multi-valued `name!=v` as one excluded value.
