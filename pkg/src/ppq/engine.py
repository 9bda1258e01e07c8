"""Propositional probability queries evaluated through an SV oracle.

P(S1 | S2) is split into two marginals, P(S1 & S2) / P(S2).  Each marginal
is rewritten into conjunction/negation form, after which two rules finish
the job:

* a conjunction of literals X1 & ... & Xn is expanded by the chain rule
  into n oracle calls P(Xi | Xi+1 & ... & Xn), evaluated right to left;
* a conjunction containing a negated group, !A & R, is reduced with
  P(!A & R) = P(R) - P(A & R).

Intermediate marginals are memoized per :class:`Evaluator` under the
printed form of their canonical representation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .errors import InconsistentOracleError, UndefinedConditionalError
from .model import KnowledgeBase
from .oracle import CountingOracle, EnumerationOracle, SVOracle, SVQuery, is_zero
from .query import (
    CONTRADICTION,
    TAUTOLOGY,
    And,
    Lit,
    Literal,
    Not,
    Or,
    Proposition,
    QueryExpr,
    canonicalize_conjunction,
    count_nodes,
    count_references,
    count_spanning_negations,
    format_literal,
    format_prop,
    format_query,
    make_and,
    normalize,
    parse,
)
from .trace import DerivationNode

log = logging.getLogger(__name__)

CLAMP_TOL = 1e-9
INCONSISTENT_TOL = 1e-6


@dataclass
class EvalConfig:
    cache_enabled: bool = True
    trace_enabled: bool = False
    absorb_negative_literals: bool = True


@dataclass
class EvalStats:
    sv_calls: int = 0
    cache_hits: int = 0
    cache_misses: int = 0
    negation_eliminations: int = 0
    max_recursion_depth: int = 0
    m: int = 0
    q: int = 0
    predicted_bound: int = 0


@dataclass
class EvalResult:
    value: float
    stats: EvalStats
    trace: DerivationNode | None = None


@dataclass(frozen=True)
class Conj:
    """Canonical CN-form marginal: ``lits`` & !negs[0] & !negs[1] & ...

    ``lits`` is a canonical literal tuple; ``negs`` are the conjunctions
    under each negation, sorted by key.  The empty Conj is the tautology.
    """

    lits: tuple[Literal, ...]
    negs: tuple[Conj, ...]
    key: str = field(compare=False)

    def variables(self) -> set[int]:
        vs = {lt.var for lt in self.lits}
        for n in self.negs:
            vs |= n.variables()
        return vs


def predicted_call_bound(m: int, q: int) -> int:
    """Upper bound m * 2**q on oracle calls for m literals and q spanning negations."""
    if m < 1 or q < 0:
        raise ValueError(f"need m >= 1 and q >= 0, got m={m}, q={q}")
    if q > 62:
        raise OverflowError(f"q={q} is too large for a call bound")
    return m << q


class Evaluator:
    """Evaluates queries against one knowledge base, one query at a time.

    The cache survives across queries until :meth:`clear_cache`.  A strict
    oracle (no negative literals) forces negative literals to be expanded
    as negations instead of being passed to the oracle.
    """

    def __init__(self, kb: KnowledgeBase, oracle: SVOracle | None = None, *, cache: bool = True,
                 trace: bool = False, absorb: bool = True):
        self.kb = kb
        inner = oracle if oracle is not None else EnumerationOracle(kb)
        self.oracle = inner if isinstance(inner, CountingOracle) else CountingOracle(inner)
        self.config = EvalConfig(cache, trace, absorb)
        self.cache: dict[str, float] = {}
        self.stats = EvalStats()

    @property
    def _absorb(self) -> bool:
        return (self.config.absorb_negative_literals
                and self.oracle.capabilities.supports_negative_literals)

    def clear_cache(self):
        self.cache.clear()

    # -- public entry points ------------------------------------------------

    def evaluate(self, query: QueryExpr | str) -> EvalResult:
        if isinstance(query, str):
            query = parse(query, self.kb)
        return self.eval_conditional(query)

    def probability(self, query: QueryExpr | str) -> float:
        return self.evaluate(query).value

    def eval_conditional(self, query: QueryExpr) -> EvalResult:
        self._begin()
        target, evidence = query.target, query.evidence
        if evidence is None:
            value, node = self._prop_marginal(target)
            self._bounds(target, None)
            return EvalResult(_clamp(value), self.stats, node)

        joint = make_and([target, evidence])
        num, num_node = self._prop_marginal(joint)
        den, den_node = self._prop_marginal(evidence)
        self._bounds(joint, evidence)
        if is_zero(den):
            raise UndefinedConditionalError(
                f"P({format_prop(evidence, self.kb)}) is zero; the conditional is undefined"
            )
        value = num / den
        node = None
        if self.config.trace_enabled:
            node = DerivationNode("Step1", format_query(query, self.kb)[2:-1], value,
                                  [num_node, den_node])
        return EvalResult(_clamp(value), self.stats, node)

    def eval_marginal(self, p: Proposition) -> EvalResult:
        self._begin()
        value, node = self._prop_marginal(p)
        self._bounds(p, None)
        return EvalResult(_clamp(value), self.stats, node)

    def chain_rule(self, term: tuple[Literal, ...]) -> float:
        """P(X1 & ... & Xn) for a canonical literal term via n oracle calls."""
        return self._chain_rule(tuple(term), 1)[0]

    def eliminate_negation(self, p: Proposition) -> float:
        """P(!A & R) = P(R) - P(A & R) for a CN-form ``p`` with a negated group."""
        c = self._build(normalize(p, self._absorb))
        if c is CONTRADICTION or not c.negs:
            raise ValueError("eliminate_negation needs a conjunction with a negated group")
        return self._eliminate(c, 1)[0]

    # -- bookkeeping ----------------------------------------------------------

    def _begin(self):
        self.stats = EvalStats()
        self.oracle.counter.reset()

    def _bounds(self, numerator: Proposition, evidence: Proposition | None):
        s = self.stats
        s.sv_calls = self.oracle.calls
        s.m = count_references(numerator)
        s.q = count_spanning_negations(normalize(numerator))
        s.predicted_bound = predicted_call_bound(s.m, s.q)
        if evidence is not None:
            s.predicted_bound += predicted_call_bound(
                count_references(evidence), count_spanning_negations(normalize(evidence)))

    def _node(self, rule, expr, value, children=(), factors=()):
        if not self.config.trace_enabled:
            return None
        return DerivationNode(rule, expr, value, [c for c in children if c is not None],
                              list(factors))

    # -- canonical representation -----------------------------------------------

    def _conj(self, lits, negs) -> Conj:
        parts = [Lit(lt) for lt in lits] + [Not(_to_prop(n)) for n in negs]
        key = format_prop(make_and(parts), self.kb) if parts else "true"
        return Conj(tuple(lits), tuple(negs), key)

    def _make(self, lits, negs):
        """Canonical Conj for lits & !negs..., or CONTRADICTION."""
        lits = list(lits)
        pending = list(negs)
        keep: dict[str, Conj] = {}
        while pending:
            n = pending.pop()
            if not n.lits and not n.negs:
                return CONTRADICTION
            if self._absorb and not n.negs and len(n.lits) == 1:
                lits.append(n.lits[0].negated())
            elif not n.lits and len(n.negs) == 1:
                inner = n.negs[0]
                lits.extend(inner.lits)
                pending.extend(inner.negs)
            else:
                keep[n.key] = n
        term = canonicalize_conjunction(lits, self.kb)
        if term is CONTRADICTION:
            return CONTRADICTION
        term = () if term is TAUTOLOGY else term
        if not self._absorb:
            for lt in term:
                if not lt.positive:
                    single = self._conj((lt.negated(),), ())
                    keep[single.key] = single
            term = tuple(lt for lt in term if lt.positive)
        return self._conj(term, [keep[k] for k in sorted(keep)])

    def _build(self, p: Proposition):
        """Conj for a normalized (CN-form, redundancy-free) proposition."""
        parts = p.children if isinstance(p, And) else (p,)
        lits, negs = [], []
        for c in parts:
            if isinstance(c, Lit):
                lits.append(c.literal)
            elif isinstance(c, Not):
                inner = self._build(c.child)
                if inner is CONTRADICTION:
                    continue
                negs.append(inner)
            else:
                raise ValueError(f"expected CN-form, found {type(c).__name__}")
        return self._make(lits, negs)

    # -- evaluation -----------------------------------------------------------

    def _prop_marginal(self, p: Proposition):
        c = self._build(normalize(p, self._absorb))
        value, node = self._marginal(c, 1)
        if node is not None and count_nodes(p, Or):
            node = self._node("DeMorgan", format_prop(p, self.kb), value, [node])
        return value, node

    def _marginal(self, c, depth):
        s = self.stats
        s.max_recursion_depth = max(s.max_recursion_depth, depth)
        if c is CONTRADICTION:
            return 0.0, self._node("Contradiction", "false", 0.0)
        if not c.lits and not c.negs:
            return 1.0, self._node("Tautology", "true", 1.0)
        if self.config.cache_enabled:
            hit = self.cache.get(c.key)
            if hit is not None:
                s.cache_hits += 1
                return hit, self._node("CacheHit", c.key, hit)
            s.cache_misses += 1
        if c.negs:
            value, node = self._eliminate(c, depth)
        else:
            value, node = self._term(c, depth)
        if self.config.cache_enabled:
            self.cache[c.key] = value
        return value, node

    def _term(self, c: Conj, depth):
        # two exclusions on one variable cannot share an oracle query;
        # peel extras off with the negation rule
        seen = set()
        for i, lt in enumerate(c.lits):
            if lt.positive:
                continue
            if lt.var in seen:
                rest = c.lits[:i] + c.lits[i + 1:]
                group = self._conj((lt.negated(),), ())
                return self._split(c, group, self._make(rest, ()),
                                   self._make(rest + (lt.negated(),), ()), depth)
            seen.add(lt.var)
        return self._chain_rule(c.lits, depth, c.key)

    def _chain_rule(self, lits, depth, key=None):
        factors = []
        p = 1.0
        for i in range(len(lits) - 1, -1, -1):
            if i < len(lits) - 1 and is_zero(p):
                p = 0.0
                break
            q = SVQuery(lits[i], lits[i + 1:])
            f = self.oracle.sv_prob(q)
            if self.config.trace_enabled:
                expr = format_literal(q.target, self.kb)
                if q.evidence:
                    expr += " given " + " & ".join(format_literal(e, self.kb) for e in q.evidence)
                factors.append((expr, f))
            p *= f
        if key is None:
            key = " & ".join(format_literal(lt, self.kb) for lt in lits)
        return p, self._node("ChainRuleFactor", key, p, factors=factors)

    def _eliminate(self, c: Conj, depth):
        pick = next((n for n in c.negs if len(n.variables()) >= 2), c.negs[0])
        others = [n for n in c.negs if n is not pick]
        rest = self._make(c.lits, others)
        with_group = self._make(c.lits + pick.lits, others + list(pick.negs))
        return self._split(c, pick, rest, with_group, depth)

    def _split(self, c, group, rest, with_group, depth):
        self.stats.negation_eliminations += 1
        pr, nr = self._marginal(rest, depth + 1)
        par, npar = self._marginal(with_group, depth + 1)
        value = pr - par
        return value, self._node("NegElim", c.key, value, [nr, npar])


def _to_prop(c: Conj) -> Proposition:
    parts = [Lit(lt) for lt in c.lits] + [Not(_to_prop(n)) for n in c.negs]
    return make_and(parts)


def _clamp(value: float) -> float:
    if value < -INCONSISTENT_TOL or value > 1 + INCONSISTENT_TOL:
        raise InconsistentOracleError(f"evaluated probability {value!r} is outside [0, 1]")
    if value < -CLAMP_TOL or value > 1 + CLAMP_TOL:
        log.warning("probability %r outside [0, 1] beyond rounding; clamping", value)
    return min(1.0, max(0.0, value))


# -- query forms ------------------------------------------------------------------


@dataclass(frozen=True)
class QueryFormClassification:
    form: str  # "Form1" .. "Form4" or "General"
    k: int | None = None
    r: int | None = None
    s: tuple[int, ...] | None = None


def classify_query_form(target: Proposition) -> QueryFormClassification:
    """Match the raw target against the four polynomial query shapes."""
    if isinstance(target, Lit):
        return QueryFormClassification("Form1", k=1)
    if isinstance(target, And) and all(isinstance(c, Lit) for c in target.children):
        return QueryFormClassification("Form1", k=len(target.children))
    if isinstance(target, Or) and all(isinstance(c, Lit) for c in target.children):
        return QueryFormClassification("Form2", k=len(target.children))
    if isinstance(target, Or) and all(_literal_group(c, And) for c in target.children):
        return QueryFormClassification(
            "Form3", r=len(target.children), s=tuple(_group_size(c) for c in target.children))
    if isinstance(target, And) and all(_literal_group(c, Or) for c in target.children):
        return QueryFormClassification(
            "Form4", r=len(target.children), s=tuple(_group_size(c) for c in target.children))
    return QueryFormClassification("General")


def _literal_group(p, kind) -> bool:
    return isinstance(p, Lit) or (isinstance(p, kind) and all(isinstance(c, Lit) for c in p.children))


def _group_size(p) -> int:
    return 1 if isinstance(p, Lit) else len(p.children)
