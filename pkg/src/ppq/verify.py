"""Cross-check the evaluator against brute-force summation of the joint."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import Evaluator
from .errors import PPQError, UndefinedConditionalError
from .model import KnowledgeBase, expand_joint, random_bayes_net, random_joint_kb
from .oracle import EnumerationOracle, SVQuery
from .query import Proposition, QueryExpr, format_query, make_and, random_proposition, truth_mask

TOLERANCE = 1e-9
# brute-force evidence mass below this is treated as an impossible condition
DEGENERATE_MASS = 1e-12


def brute_force_marginal(kb: KnowledgeBase, p: Proposition, joint: np.ndarray | None = None) -> float:
    joint = expand_joint(kb) if joint is None else joint
    return float(joint[truth_mask(p, kb)].sum())


def brute_force(kb: KnowledgeBase, query: QueryExpr, joint: np.ndarray | None = None) -> float:
    """P(S1 | S2) by summing the full joint; raises if P(S2) is zero."""
    joint = expand_joint(kb) if joint is None else joint
    if query.evidence is None:
        return brute_force_marginal(kb, query.target, joint)
    den = brute_force_marginal(kb, query.evidence, joint)
    if den <= 0.0:
        raise UndefinedConditionalError("evidence has zero probability")
    return brute_force_marginal(kb, make_and([query.target, query.evidence]), joint) / den


def random_kb(n: int, rng: np.random.Generator, kind: str = "joint") -> KnowledgeBase:
    if kind == "joint":
        return random_joint_kb(n, rng)
    if kind == "bn":
        return random_bayes_net(n, rng)
    raise ValueError(f"unknown KB kind {kind!r}")


def random_query(kb: KnowledgeBase, rng: np.random.Generator, max_refs: int = 10) -> QueryExpr:
    """Target of depth <= 4 and optional evidence of depth <= 4, at most ``max_refs`` literals."""
    target_refs = int(rng.integers(1, max_refs))
    target = random_proposition(kb, rng, depth=4, max_refs=target_refs)
    evidence = None
    if rng.random() < 0.6:
        evidence = random_proposition(kb, rng, depth=4, max_refs=max_refs - target_refs)
    return QueryExpr(target, evidence)


def random_suite(n: int = 6, trials: int = 500, seed: int = 7, kind: str = "joint"):
    """Yield ``(trial, kb, query)`` triples; trial t is drawn from rng([seed, t])."""
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        kb = random_kb(n, rng, kind)
        yield t, kb, random_query(kb, rng)


class FaultyOracle(EnumerationOracle):
    """Test hook: every answer is off by ``shift``."""

    def __init__(self, kb, shift=0.01):
        super().__init__(kb)
        self.shift = shift

    def sv_prob(self, q: SVQuery) -> float:
        return super().sv_prob(q) + self.shift


@dataclass
class VerifyReport:
    n: int
    trials: int
    seed: int
    kind: str
    comparisons: int = 0
    degenerate: int = 0
    max_deviation: float = 0.0
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures and self.max_deviation <= TOLERANCE

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [
            f"{status}: {self.comparisons} comparisons ({self.degenerate} zero-evidence) "
            f"over {self.trials} {self.kind} KBs, n={self.n}, seed={self.seed}; "
            f"max |ppq - brute force| = {self.max_deviation:.3g} (tolerance {TOLERANCE:g})"
        ]
        if self.failures:
            lines.append("first failure: " + self.failures[0])
        return "\n".join(lines)


def run_verify(n: int = 6, trials: int = 500, seed: int = 7, kind: str = "joint",
               fault: float | None = None, cache: bool = True) -> VerifyReport:
    if n > 12:
        raise ValueError("verify supports n <= 12")
    report = VerifyReport(n, trials, seed, kind)
    for t, kb, query in random_suite(n, trials, seed, kind):
        oracle = FaultyOracle(kb, fault) if fault is not None else None
        ev = Evaluator(kb, oracle, cache=cache)
        where = f"seed={seed} trial={t} query={format_query(query, kb)}"
        joint = expand_joint(kb)
        try:
            expected = brute_force(kb, query, joint)
        except UndefinedConditionalError:
            expected = None
        if expected is not None and query.evidence is not None and \
                brute_force_marginal(kb, query.evidence, joint) < DEGENERATE_MASS:
            expected = None
        try:
            got = ev.evaluate(query).value
        except UndefinedConditionalError:
            got = None
        except PPQError as exc:
            report.failures.append(f"{where}: {type(exc).__name__}: {exc}")
            continue
        report.comparisons += 1
        if expected is None:
            report.degenerate += 1
            continue
        if got is None:
            report.failures.append(f"{where}: engine reported zero evidence, brute force {expected!r}")
            continue
        dev = abs(got - expected)
        report.max_deviation = max(report.max_deviation, dev)
        if dev > TOLERANCE:
            report.failures.append(f"{where}: ppq {got!r} vs brute force {expected!r}")
    return report
