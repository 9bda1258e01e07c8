import json

import numpy as np
import pytest

from conftest import enumerate_conditional, enumerate_prob
from ppq.engine import Evaluator, classify_query_form, predicted_call_bound
from ppq.errors import UndefinedConditionalError
from ppq.model import KnowledgeBase, independent_kb, random_bayes_net, random_joint_kb
from ppq.oracle import EnumerationOracle, StrictSVOracle
from ppq.query import (
    And,
    Lit,
    Literal,
    Not,
    Or,
    QueryExpr,
    count_references,
    format_literal,
    parse,
    parse_prop,
    random_proposition,
)
from ppq.trace import DerivationNode


def P(kb, text, **kw):
    return Evaluator(kb, **kw).evaluate(text)


# -- worked values --------------------------------------------------------------


def test_conditional_demo2(demo2):
    # 0.3 / 0.7 over the four-row joint
    assert P(demo2, "P(a given b)").value == pytest.approx(3 / 7, abs=1e-15)


def test_conditional_worked_example_shape(indep4):
    # 16-row sum: P((x1|x2) & (x3|!x4)) = 0.5625, P(x3|!x4) = 0.75
    r = P(indep4, "P(x1 | x2 given x3 | !x4)")
    assert r.value == pytest.approx(0.75, abs=1e-12)
    assert enumerate_conditional(indep4, parse("P(x1 | x2 given x3 | !x4)", indep4)) == pytest.approx(0.75)


def test_contradictory_evidence(demo2):
    with pytest.raises(UndefinedConditionalError):
        P(demo2, "P(a given b & !b)")


def test_marginal_examples(demo2):
    r = P(demo2, "a & !a", cache=False)
    assert r.value == 0 and r.stats.sv_calls == 0
    assert P(demo2, "a | b").value == pytest.approx(0.9, abs=1e-15)
    ev = Evaluator(demo2)
    assert ev.chain_rule(()) == 1.0
    assert ev.oracle.calls == 0


def test_chain_rule_examples(demo2):
    ev = Evaluator(demo2, cache=False)
    assert ev.chain_rule((Literal(0, 0), Literal(1, 0))) == pytest.approx(0.3, abs=1e-15)
    assert ev.oracle.calls == 2
    ev.oracle.counter.reset()
    assert ev.chain_rule((Literal(1, 0),)) == pytest.approx(0.7, abs=1e-15)
    assert ev.oracle.calls == 1


def test_chain_rule_zero_short_circuit():
    kb = KnowledgeBase.from_network(
        [("a", ("t", "f")), ("b", ("t", "f")), ("c", ("t", "f"))],
        [("a", [], [[0.5, 0.5]]), ("b", [], [[0.5, 0.5]]), ("c", [], [[0.0, 1.0]])])
    r = P(kb, "a & b & c", cache=False)
    assert r.value == 0.0
    assert r.stats.sv_calls == 1


def test_eliminate_negation_examples(demo2):
    a, b = Lit(Literal(0, 0)), Lit(Literal(1, 0))
    ev = Evaluator(demo2, cache=False, absorb=False)
    # P(true) - P(a) with P(a) = 0.3 + 0.2
    assert ev.eliminate_negation(Not(a)) == pytest.approx(0.5, abs=1e-15)
    ev = Evaluator(demo2, cache=False)
    assert ev.eliminate_negation(Not(And((a, b)))) == pytest.approx(0.7, abs=1e-15)
    assert ev.eliminate_negation(And((Not(And((a, b))), b))) == pytest.approx(0.4, abs=1e-15)
    assert ev.stats.negation_eliminations == 2  # direct calls accumulate
    with pytest.raises(ValueError):
        ev.eliminate_negation(And((a, b)))


def test_double_negation_inputs(demo2):
    assert P(demo2, "!!a").value == pytest.approx(0.5, abs=1e-15)
    r = P(demo2, "!(!(a & b))", cache=False)
    assert r.value == pytest.approx(0.3, abs=1e-15)
    assert r.stats.negation_eliminations == 0 and r.stats.sv_calls == 2


def test_multivalued_queries(paint):
    cases = [
        "P(color=red | shade!=black given glossy)",
        "P(color!=red & color!=blue)",
        "P(shade!=black & shade!=dark given color!=green)",
        "P(!(color=red & glossy) | shade=mid given shade!=light)",
    ]
    for text in cases:
        q = parse(text, paint)
        expected = enumerate_conditional(paint, q)
        for oracle in (None, StrictSVOracle(EnumerationOracle(paint))):
            for cache in (True, False):
                got = Evaluator(paint, oracle, cache=cache).evaluate(q).value
                assert got == pytest.approx(expected, abs=1e-12), text


def test_strict_oracle_never_sees_negatives(paint):
    ev = Evaluator(paint, StrictSVOracle(EnumerationOracle(paint)), cache=False)
    r = ev.evaluate("P(shade!=black & shade!=dark & color!=red)")
    assert r.stats.negation_eliminations >= 2
    assert r.value == pytest.approx(
        enumerate_prob(paint, parse_prop("shade!=black & shade!=dark & color!=red", paint)), abs=1e-12)


def test_cache_persists_across_queries(demo2):
    ev = Evaluator(demo2)
    first = ev.evaluate("a | b")
    again = ev.evaluate("a | b")
    assert again.value == first.value
    assert again.stats.sv_calls == 0 and again.stats.cache_hits == 1
    ev.clear_cache()
    assert ev.evaluate("a | b").stats.sv_calls == first.stats.sv_calls


# -- forms and bounds -------------------------------------------------------------


def test_classify_forms():
    a, b, c, d = (Lit(Literal(i, 0)) for i in range(4))
    assert classify_query_form(And((a, b, c))) == classify_query_form(And((a, b, c)))
    f1 = classify_query_form(And((a, b, c)))
    assert (f1.form, f1.k) == ("Form1", 3)
    f2 = classify_query_form(Or((a, b)))
    assert (f2.form, f2.k) == ("Form2", 2)
    f3 = classify_query_form(Or((And((a, b)), And((c, d)))))
    assert (f3.form, f3.r, f3.s) == ("Form3", 2, (2, 2))
    f4 = classify_query_form(And((Or((a, b)), Or((c, d)))))
    assert (f4.form, f4.r, f4.s) == ("Form4", 2, (2, 2))
    assert classify_query_form(Not(And((a, b)))).form == "General"
    assert classify_query_form(a).form == "Form1"


@pytest.mark.parametrize("m, q, bound", [(4, 0, 4), (4, 1, 8), (6, 5, 192)])
def test_predicted_bound(m, q, bound):
    assert predicted_call_bound(m, q) == bound


def test_predicted_bound_guards():
    with pytest.raises(OverflowError):
        predicted_call_bound(1, 63)
    with pytest.raises(ValueError):
        predicted_call_bound(0, 1)


@pytest.mark.parametrize("k", [1, 2, 5, 13])
def test_form1_and_form2_call_counts(k):
    kb = independent_kb(k)
    lits = tuple(Lit(Literal(i, 0)) for i in range(k))
    conj = lits[0] if k == 1 else And(lits)
    disj = lits[0] if k == 1 else Or(lits)
    assert Evaluator(kb, cache=False).eval_marginal(conj).stats.sv_calls == k
    assert Evaluator(kb, cache=False).eval_marginal(disj).stats.sv_calls == k


# -- randomized properties -------------------------------------------------------------


def random_case(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    kb = random_joint_kb(n, rng) if seed % 2 else random_bayes_net(n, rng)
    target = random_proposition(kb, rng, depth=4, max_refs=6)
    evidence = random_proposition(kb, rng, depth=4, max_refs=4) if rng.random() < 0.6 else None
    return kb, QueryExpr(target, evidence)


def all_nodes(node):
    return [] if node is None else list(node.walk())


@pytest.mark.parametrize("seed", range(120))
def test_random_queries_match_enumeration(seed):
    kb, q = random_case(seed)
    assert count_references(q.target) + (count_references(q.evidence) if q.evidence else 0) <= 10
    if q.evidence is not None and enumerate_prob(kb, q.evidence) < 1e-12:
        pytest.skip("impossible evidence")
    expected = enumerate_conditional(kb, q)
    off = Evaluator(kb, cache=False, trace=True).evaluate(q)
    on = Evaluator(kb, cache=True).evaluate(q)
    assert abs(off.value - expected) <= 1e-9
    assert abs(on.value - off.value) <= 1e-12
    assert on.stats.sv_calls <= off.stats.sv_calls
    assert off.stats.sv_calls <= off.stats.predicted_bound
    for node in all_nodes(off.trace):
        if node.rule == "NegElim":
            assert len(node.children) == 2
            assert abs(node.value - (node.children[0].value - node.children[1].value)) <= 1e-12


@pytest.mark.parametrize("seed", range(60))
def test_complement_law(seed):
    kb, q = random_case(seed)
    ev = Evaluator(kb)
    total = ev.eval_marginal(q.target).value + ev.eval_marginal(Not(q.target)).value
    assert total == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("seed", range(40))
def test_absorption_off_and_strict_agree(seed):
    kb, q = random_case(seed)
    if q.evidence is not None and enumerate_prob(kb, q.evidence) < 1e-12:
        pytest.skip("impossible evidence")
    base = Evaluator(kb).evaluate(q).value
    assert Evaluator(kb, absorb=False).evaluate(q).value == pytest.approx(base, abs=1e-9)
    strict = StrictSVOracle(EnumerationOracle(kb))
    assert Evaluator(kb, strict).evaluate(q).value == pytest.approx(base, abs=1e-9)


@pytest.mark.parametrize("seed", range(30))
def test_contradictory_conjunctions_cost_nothing(seed):
    rng = np.random.default_rng(seed)
    kb = random_joint_kb(5, rng)
    v = int(rng.integers(5))
    others = random_proposition(kb, rng, depth=3, max_refs=4)
    p = And((Lit(Literal(v, 0)), others, Lit(Literal(v, 1))))
    r = Evaluator(kb, cache=False).eval_marginal(p)
    assert r.value == 0.0 and r.stats.sv_calls == 0


# -- traces -------------------------------------------------------------------------


def test_trace_structure_and_json(indep4):
    r = P(indep4, "P(x1 | x2 given x3 | !x4)", trace=True)
    root = r.trace
    assert root.rule == "Step1" and len(root.children) == 2
    again = DerivationNode.from_dict(json.loads(root.to_json()))
    assert again == root
    for node in root.walk():
        if node.expression not in ("true", "false"):
            parse(node.expression, indep4)
        for expr, _ in node.factors:
            parse(expr, indep4)


def test_trace_factor_product(indep4):
    r = P(indep4, "x1 & !x2 & x3", trace=True, cache=False)
    (node,) = r.trace.leaves()
    assert node.rule == "ChainRuleFactor"
    assert [e for e, _ in node.factors] == ["x3", "!x2 given x3", "x1 given !x2 & x3"]
    assert np.prod([v for _, v in node.factors]) == node.value


def test_contradiction_trace(demo2):
    r = P(demo2, "a & !a", trace=True)
    assert r.trace.rule == "Contradiction" and r.trace.children == [] and r.trace.value == 0


def test_format_literal_binary(demo2):
    assert format_literal(Literal(0, 1), demo2) == "!a"
    assert format_literal(Literal(0, 0, False), demo2) == "a!=t"


@pytest.mark.parametrize("seed", range(40))
def test_random_multivalued_queries_match_enumeration(seed):
    rng = np.random.default_rng(1000 + seed)
    n = int(rng.integers(2, 6))
    kb = random_bayes_net(n, rng, sizes=rng.integers(2, 5, size=n).tolist())
    q = QueryExpr(random_proposition(kb, rng, depth=4, max_refs=6),
                  random_proposition(kb, rng, depth=3, max_refs=3))
    if enumerate_prob(kb, q.evidence) < 1e-12:
        pytest.skip("impossible evidence")
    expected = enumerate_conditional(kb, q)
    for cache in (True, False):
        assert Evaluator(kb, cache=cache).evaluate(q).value == pytest.approx(expected, abs=1e-9)
    strict = StrictSVOracle(EnumerationOracle(kb))
    assert Evaluator(kb, strict).evaluate(q).value == pytest.approx(expected, abs=1e-9)
