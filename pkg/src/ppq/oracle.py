"""Single-variable (SV) probability oracles.

An SV oracle answers P(target | e1 & ... & ek) for one literal ``target``
and a conjunction of evidence literals.  The engine reduces every query to
calls of this form and never looks inside the knowledge base itself.

Two reference backends share :class:`EnumerationOracle`:

* joint tables are summed directly with boolean masks;
* Bayesian networks are summed by exact factor elimination over the
  ancestral set of the literals, so the bench knowledge bases with 50+
  independent variables stay cheap.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .errors import CapabilityError, InvalidSVQueryError, ZeroEvidenceError
from .model import KnowledgeBase
from .query import Literal, literal_mask

ZERO_THRESHOLD = 1e-300


def is_zero(p: float) -> bool:
    return p == 0.0 or p < ZERO_THRESHOLD


@dataclass(frozen=True)
class SVQuery:
    target: Literal
    evidence: tuple[Literal, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "evidence", tuple(self.evidence))
        seen = set()
        for lt in self.evidence:
            if lt.var in seen:
                raise InvalidSVQueryError(f"variable {lt.var} appears twice in the evidence")
            seen.add(lt.var)
        if self.target.var in seen:
            raise InvalidSVQueryError(f"target variable {self.target.var} also appears in the evidence")

    @property
    def has_negative(self) -> bool:
        return not self.target.positive or any(not lt.positive for lt in self.evidence)


@dataclass(frozen=True)
class OracleCapabilities:
    supports_negative_literals: bool = True


class SVOracle(Protocol):
    kb: KnowledgeBase
    capabilities: OracleCapabilities

    def sv_prob(self, q: SVQuery) -> float: ...


class EnumerationOracle:
    """Exact reference oracle: P(target | E) = sum(target & E) / sum(E)."""

    capabilities = OracleCapabilities(supports_negative_literals=True)

    def __init__(self, kb: KnowledgeBase):
        self.kb = kb
        if kb.joint is not None:
            self._flat = kb.joint.ravel()
            self._masks: dict[Literal, np.ndarray] = {}

    def mass(self, literals: Sequence[Literal]) -> float:
        """Total probability of the assignments satisfying every literal."""
        if self.kb.joint is not None:
            return self._joint_mass(literals)
        return bn_mass(self.kb, literals)

    def _joint_mass(self, literals):
        if not literals:
            return float(self._flat.sum())
        mask = None
        for lt in literals:
            m = self._masks.get(lt)
            if m is None:
                m = self._masks[lt] = literal_mask(lt, self.kb).ravel()
            mask = m if mask is None else mask & m
        return float(self._flat[mask].sum())

    def sv_prob(self, q: SVQuery) -> float:
        evidence_mass = self.mass(q.evidence)
        if is_zero(evidence_mass):
            raise ZeroEvidenceError(f"evidence of {q} has zero probability")
        return self.mass((q.target, *q.evidence)) / evidence_mass


def bn_mass(kb: KnowledgeBase, literals: Sequence[Literal]) -> float:
    """Sum of the network's joint over assignments satisfying ``literals``.

    Only ancestors of the mentioned variables matter (every other CPT sums
    out to one).  Literals enter as 0/1 indicator factors and variables are
    eliminated greedily by smallest intermediate factor.
    """
    mentioned = {lt.var for lt in literals}
    relevant = set()
    stack = list(mentioned)
    parents = {nd.var: nd.parents for nd in kb.network}
    while stack:
        v = stack.pop()
        if v not in relevant:
            relevant.add(v)
            stack.extend(parents[v])

    factors = [((*nd.parents, nd.var), nd.cpt) for nd in kb.network if nd.var in relevant]
    for lt in literals:
        size = kb.variables[lt.var].size
        ind = (np.arange(size) == lt.value).astype(float)
        if not lt.positive:
            ind = 1.0 - ind
        factors.append(((lt.var,), ind))

    sizes = {v: kb.variables[v].size for v in relevant}
    remaining = set(relevant)
    scalar = 1.0
    while remaining:
        def cost(v):
            scope = set()
            for vs, _ in factors:
                if v in vs:
                    scope.update(vs)
            return np.prod([sizes[u] for u in scope], dtype=float)

        v = min(remaining, key=lambda u: (cost(u), u))
        remaining.discard(v)
        touching = [f for f in factors if v in f[0]]
        factors = [f for f in factors if v not in f[0]]
        scope = sorted({u for vs, _ in touching for u in vs})
        out = [u for u in scope if u != v]
        local = {u: i for i, u in enumerate(scope)}
        operands = []
        for vs, table in touching:
            operands.extend((table, [local[u] for u in vs]))
        result = np.einsum(*operands, [local[u] for u in out])
        if out:
            factors.append((tuple(out), result))
        else:
            scalar *= float(result)
    for vs, table in factors:
        scalar *= float(table)
    return scalar


class StrictSVOracle:
    """Positive-instantiation-only view of another oracle."""

    capabilities = OracleCapabilities(supports_negative_literals=False)

    def __init__(self, inner: SVOracle):
        self.inner = inner
        self.kb = inner.kb

    def sv_prob(self, q: SVQuery) -> float:
        if q.has_negative:
            raise CapabilityError("strict SV oracle accepts positive instantiations only")
        return self.inner.sv_prob(q)


@dataclass
class SVCallCounter:
    calls: int = 0
    by_evidence_length: Counter = field(default_factory=Counter)

    def record(self, q: SVQuery):
        self.calls += 1
        self.by_evidence_length[len(q.evidence)] += 1

    def reset(self):
        self.calls = 0
        self.by_evidence_length.clear()


class CountingOracle:
    """Delegating oracle that counts every ``sv_prob`` call, failed ones included."""

    def __init__(self, inner: SVOracle, counter: SVCallCounter | None = None):
        self.inner = inner
        self.kb = inner.kb
        self.capabilities = inner.capabilities
        self.counter = counter if counter is not None else SVCallCounter()

    @property
    def calls(self) -> int:
        return self.counter.calls

    def sv_prob(self, q: SVQuery) -> float:
        self.counter.record(q)
        return self.inner.sv_prob(q)


def counting_oracle(inner: SVOracle) -> CountingOracle:
    return CountingOracle(inner)


def strict_sv_wrapper(inner: SVOracle) -> StrictSVOracle:
    return StrictSVOracle(inner)


def sv_prob(kb: KnowledgeBase, q: SVQuery) -> float:
    """One-off enumeration answer for ``q``."""
    return EnumerationOracle(kb).sv_prob(q)
