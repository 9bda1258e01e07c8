import itertools

import numpy as np
import pytest

from ppq.errors import CapabilityError, InvalidSVQueryError, ZeroEvidenceError
from ppq.model import KnowledgeBase, expand_joint, joint_probability, random_bayes_net, random_joint_kb
from ppq.oracle import (
    CountingOracle,
    EnumerationOracle,
    SVQuery,
    counting_oracle,
    strict_sv_wrapper,
    sv_prob,
)
from ppq.query import Literal

A_T, A_F, B_T, B_F = Literal(0, 0), Literal(0, 1), Literal(1, 0), Literal(1, 1)


def loop_conditional(kb, target, evidence):
    """P(target | evidence) by a plain loop over assignments."""
    def holds(lt, idx):
        return (idx[lt.var] == lt.value) == lt.positive

    num = den = 0.0
    for idx in itertools.product(*(range(v.size) for v in kb.variables)):
        if all(holds(e, idx) for e in evidence):
            p = joint_probability(kb, idx)
            den += p
            if holds(target, idx):
                num += p
    return num / den


def test_demo2_values(demo2):
    assert sv_prob(demo2, SVQuery(A_T, (B_T,))) == pytest.approx(3 / 7, abs=1e-15)
    assert sv_prob(demo2, SVQuery(B_T)) == pytest.approx(0.7, abs=1e-15)
    assert sv_prob(demo2, SVQuery(B_T, (A_F,))) == pytest.approx(0.8, abs=1e-15)


def test_target_in_evidence_rejected():
    with pytest.raises(InvalidSVQueryError):
        SVQuery(A_T, (A_T,))
    with pytest.raises(InvalidSVQueryError):
        SVQuery(B_T, (A_T, A_F))


def test_zero_evidence():
    kb = KnowledgeBase.from_joint([("a", ("t", "f")), ("b", ("t", "f"))], [0.5, 0.0, 0.5, 0.0])
    with pytest.raises(ZeroEvidenceError):
        sv_prob(kb, SVQuery(A_T, (B_F,)))


def test_negative_literals_supported(paint):
    color_not_red = Literal(0, 0, positive=False)
    glossy = Literal(2, 0)
    assert sv_prob(paint, SVQuery(color_not_red, (glossy,))) == pytest.approx(
        loop_conditional(paint, color_not_red, (glossy,)), abs=1e-14)


def test_counting_oracle(demo2):
    inner = EnumerationOracle(demo2)
    counted = counting_oracle(inner)
    assert counted.calls == 0
    qs = [SVQuery(A_T, (B_T,)), SVQuery(B_T), SVQuery(B_T, (A_F,))]
    for q in qs:
        assert counted.sv_prob(q) == inner.sv_prob(q)
    assert counted.calls == 3
    assert counted.counter.by_evidence_length == {1: 2, 0: 1}


def test_counting_counts_failures():
    kb = KnowledgeBase.from_joint([("a", ("t", "f")), ("b", ("t", "f"))], [0.5, 0.0, 0.5, 0.0])
    counted = CountingOracle(EnumerationOracle(kb))
    with pytest.raises(ZeroEvidenceError):
        counted.sv_prob(SVQuery(A_T, (B_F,)))
    assert counted.calls == 1


def test_strict_wrapper(demo2):
    strict = strict_sv_wrapper(EnumerationOracle(demo2))
    assert not strict.capabilities.supports_negative_literals
    assert EnumerationOracle.capabilities.supports_negative_literals
    assert strict.sv_prob(SVQuery(A_T, (B_T,))) == pytest.approx(3 / 7, abs=1e-15)
    with pytest.raises(CapabilityError):
        strict.sv_prob(SVQuery(A_T, (B_T.negated(),)))
    with pytest.raises(CapabilityError):
        strict.sv_prob(SVQuery(A_T.negated()))


def _random_literals(kb, rng, k):
    vars_ = rng.choice(kb.n, size=k, replace=False)
    out = []
    for v in vars_:
        size = kb.variables[v].size
        out.append(Literal(int(v), int(rng.integers(size)), bool(size == 2 or rng.random() < 0.6)))
    return out


@pytest.mark.parametrize("seed", range(25))
def test_normalization_over_values(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    kb = random_bayes_net(n, rng, sizes=rng.integers(2, 4, size=n).tolist())
    oracle = EnumerationOracle(kb)
    x, *evidence = _random_literals(kb, rng, int(rng.integers(1, min(n, 4) + 1)))
    total = sum(oracle.sv_prob(SVQuery(Literal(x.var, v), tuple(evidence)))
                for v in range(kb.variables[x.var].size))
    assert total == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("seed", range(25))
def test_bn_and_expanded_joint_agree(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    bn = random_bayes_net(n, rng, sizes=rng.integers(2, 4, size=n).tolist())
    flat = KnowledgeBase.from_joint(bn.variables, expand_joint(bn).ravel())
    o_bn, o_joint = EnumerationOracle(bn), EnumerationOracle(flat)
    for _ in range(20):
        target, *evidence = _random_literals(bn, rng, int(rng.integers(1, n + 1)))
        q = SVQuery(target, tuple(evidence))
        a, b = o_bn.sv_prob(q), o_joint.sv_prob(q)
        assert abs(a - b) <= 1e-12
        assert abs(a - loop_conditional(bn, target, evidence)) <= 1e-12


def test_bn_oracle_scales_to_many_independent_variables():
    from ppq.model import independent_kb

    kb = independent_kb(60, 0.5)
    lits = tuple(Literal(i, 0) for i in range(1, 60))
    assert EnumerationOracle(kb).sv_prob(SVQuery(Literal(0, 0), lits)) == pytest.approx(0.5)


def test_decorator_transparent_on_random_kb():
    rng = np.random.default_rng(3)
    kb = random_joint_kb(5, rng)
    inner = EnumerationOracle(kb)
    counted = CountingOracle(EnumerationOracle(kb))
    for _ in range(30):
        target, *evidence = _random_literals(kb, rng, int(rng.integers(1, 5)))
        q = SVQuery(target, tuple(evidence))
        assert counted.sv_prob(q) == inner.sv_prob(q)
    assert counted.calls == 30
