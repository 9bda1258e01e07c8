"""Query language: literals, propositions, parsing, and normal forms.

Grammar (whitespace-insensitive)::

    query   := [ "P(" ] prop [ "given" prop ] [ ")" ]
    prop    := conj { "|" conj }
    conj    := unary { "&" unary }
    unary   := "!" unary | "(" prop ")" | literal
    literal := IDENT | IDENT "=" IDENT | IDENT "!=" IDENT

Bare ``x`` and ``!x`` are only legal for binary variables with domain
``["t", "f"]``.  Negation of a single literal never produces a ``Not`` node:
it flips the literal's polarity, and binary negative literals are rewritten
to the complementary positive value.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .errors import BinarySyntaxError, QuerySyntaxError, UnknownValueError, UnknownVariableError
from .model import KnowledgeBase


@dataclass(frozen=True)
class Literal:
    """``var = value`` when positive, ``var != value`` when negative."""

    var: int
    value: int
    positive: bool = True

    def negated(self) -> Literal:
        return Literal(self.var, self.value, not self.positive)

    @property
    def sort_key(self):
        return (self.var, self.value, not self.positive)


@dataclass(frozen=True)
class Lit:
    literal: Literal


@dataclass(frozen=True)
class Not:
    child: Proposition


@dataclass(frozen=True)
class And:
    children: tuple


@dataclass(frozen=True)
class Or:
    children: tuple


Proposition = Union[Lit, Not, And, Or]


@dataclass(frozen=True)
class QueryExpr:
    target: Proposition
    evidence: Proposition | None = None


def make_and(children: Iterable[Proposition]) -> Proposition:
    """Conjunction with nested Ands flattened; a single child is returned as is."""
    flat = []
    for c in children:
        flat.extend(c.children if isinstance(c, And) else (c,))
    if not flat:
        raise ValueError("empty conjunction")
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def make_or(children: Iterable[Proposition]) -> Proposition:
    flat = []
    for c in children:
        flat.extend(c.children if isinstance(c, Or) else (c,))
    if not flat:
        raise ValueError("empty disjunction")
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def lit(kb: KnowledgeBase, name: str, value: str = "t", positive: bool = True) -> Lit:
    """Convenience constructor: ``lit(kb, "a")`` is ``a = t``."""
    v = kb.variable(name)
    return Lit(Literal(v.id, v.index(value), positive))


# -- canonical literal conjunctions ------------------------------------------


class Truth(enum.Enum):
    CONTRADICTION = "contradiction"
    TAUTOLOGY = "tautology"


CONTRADICTION = Truth.CONTRADICTION
TAUTOLOGY = Truth.TAUTOLOGY


def canonicalize_conjunction(lits: Iterable[Literal], kb: KnowledgeBase):
    """Reduce a literal conjunction to a sorted, duplicate-free tuple.

    Returns ``CONTRADICTION`` if the literals cannot hold together and
    ``TAUTOLOGY`` for the empty conjunction.  Per variable: a positive
    literal subsumes exclusions of other values; exclusions of d-1 values of
    a d-valued variable become the remaining positive literal.
    """
    lits = list(lits)
    if not lits:
        return TAUTOLOGY
    pos: dict[int, int] = {}
    neg: dict[int, set[int]] = {}
    for lt in lits:
        if lt.positive:
            if pos.setdefault(lt.var, lt.value) != lt.value:
                return CONTRADICTION
        else:
            neg.setdefault(lt.var, set()).add(lt.value)
    out = []
    for var in sorted(set(pos) | set(neg)):
        excluded = neg.get(var, set())
        if var in pos:
            if pos[var] in excluded:
                return CONTRADICTION
            out.append(Literal(var, pos[var]))
            continue
        size = kb.variables[var].size
        if len(excluded) == size:
            return CONTRADICTION
        if len(excluded) == size - 1:
            (remaining,) = set(range(size)) - excluded
            out.append(Literal(var, remaining))
        else:
            out.extend(Literal(var, val, False) for val in sorted(excluded))
    return tuple(out)


# -- normal forms ---------------------------------------------------------------


def to_cn_form(p: Proposition) -> Proposition:
    """Rewrite every Or(c1..ck) as Not(And(Not(c1)..Not(ck)))."""
    if isinstance(p, Lit):
        return p
    if isinstance(p, Not):
        return Not(to_cn_form(p.child))
    if isinstance(p, And):
        return make_and(to_cn_form(c) for c in p.children)
    return Not(And(tuple(Not(to_cn_form(c)) for c in p.children)))


def eliminate_redundant_negations(p: Proposition, absorb: bool = True) -> Proposition:
    """Drop Not-over-Not pairs and, if ``absorb``, fold Not-over-Lit into polarity.

    One pass over the tree; ``p`` must be in CN-form.
    """
    if isinstance(p, Lit):
        return p
    if isinstance(p, And):
        return make_and(eliminate_redundant_negations(c, absorb) for c in p.children)
    if isinstance(p, Or):
        raise ValueError("eliminate_redundant_negations expects CN-form (no Or nodes)")
    # strip stacked negations, keeping the parity
    negate = True
    inner = p.child
    while isinstance(inner, Not):
        negate = not negate
        inner = inner.child
    inner = eliminate_redundant_negations(inner, absorb)
    if not negate:
        return inner
    if isinstance(inner, Lit) and absorb:
        return Lit(inner.literal.negated())
    return Not(inner)


def normalize(p: Proposition, absorb: bool = True) -> Proposition:
    return eliminate_redundant_negations(to_cn_form(p), absorb)


def variables_of(p: Proposition) -> set[int]:
    if isinstance(p, Lit):
        return {p.literal.var}
    if isinstance(p, Not):
        return variables_of(p.child)
    out = set()
    for c in p.children:
        out |= variables_of(c)
    return out


def count_spanning_negations(p: Proposition) -> int:
    """Number of Not nodes whose scope mentions two or more distinct variables."""
    def walk(node):
        if isinstance(node, Lit):
            return {node.literal.var}, 0
        if isinstance(node, Not):
            vs, q = walk(node.child)
            return vs, q + (len(vs) >= 2)
        vs, q = set(), 0
        for c in node.children:
            cv, cq = walk(c)
            vs |= cv
            q += cq
        return vs, q

    return walk(p)[1]


def count_references(p: Proposition) -> int:
    """Number of literal occurrences (variable references) in ``p``."""
    if isinstance(p, Lit):
        return 1
    if isinstance(p, Not):
        return count_references(p.child)
    return sum(count_references(c) for c in p.children)


def count_nodes(p: Proposition, kind) -> int:
    n = isinstance(p, kind)
    if isinstance(p, Not):
        return n + count_nodes(p.child, kind)
    if isinstance(p, (And, Or)):
        return n + sum(count_nodes(c, kind) for c in p.children)
    return n


# -- semantics ------------------------------------------------------------------


def literal_mask(literal: Literal, kb: KnowledgeBase) -> np.ndarray:
    """Boolean array over the full joint (axes in variable order) where ``literal`` holds."""
    shape = [1] * kb.n
    size = kb.variables[literal.var].size
    shape[literal.var] = size
    hit = (np.arange(size) == literal.value).reshape(shape)
    if not literal.positive:
        hit = ~hit
    return np.broadcast_to(hit, kb.shape)


def truth_mask(p: Proposition, kb: KnowledgeBase) -> np.ndarray:
    """Boolean array over every full assignment: does the assignment satisfy ``p``?"""
    if isinstance(p, Lit):
        return literal_mask(p.literal, kb)
    if isinstance(p, Not):
        return ~truth_mask(p.child, kb)
    masks = [truth_mask(c, kb) for c in p.children]
    reduce = np.logical_and if isinstance(p, And) else np.logical_or
    return reduce.reduce(np.stack(masks), axis=0)


def satisfies(p: Proposition, assignment) -> bool:
    """Truth value of ``p`` under a full assignment given as value indices."""
    if isinstance(p, Lit):
        lt = p.literal
        return (assignment[lt.var] == lt.value) == lt.positive
    if isinstance(p, Not):
        return not satisfies(p.child, assignment)
    if isinstance(p, And):
        return all(satisfies(c, assignment) for c in p.children)
    return any(satisfies(c, assignment) for c in p.children)


# -- printing -------------------------------------------------------------------


def format_literal(literal: Literal, kb: KnowledgeBase) -> str:
    v = kb.variables[literal.var]
    if v.is_binary and literal.positive:
        return v.name if literal.value == 0 else "!" + v.name
    op = "=" if literal.positive else "!="
    return f"{v.name}{op}{v.domain[literal.value]}"


def format_prop(p: Proposition, kb: KnowledgeBase) -> str:
    if isinstance(p, Lit):
        return format_literal(p.literal, kb)
    if isinstance(p, Not):
        return f"!({format_prop(p.child, kb)})"
    if isinstance(p, And):
        return " & ".join(
            f"({format_prop(c, kb)})" if isinstance(c, Or) else format_prop(c, kb)
            for c in p.children
        )
    return " | ".join(format_prop(c, kb) for c in p.children)


def format_conjunction(lits, kb: KnowledgeBase) -> str:
    if lits is TAUTOLOGY or lits == ():
        return "true"
    if lits is CONTRADICTION:
        return "false"
    return " & ".join(format_literal(lt, kb) for lt in lits)


def format_query(q: QueryExpr, kb: KnowledgeBase) -> str:
    body = format_prop(q.target, kb)
    if q.evidence is not None:
        body += " given " + format_prop(q.evidence, kb)
    return f"P({body})"


# -- parsing --------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(!=|[!&|()=])|([A-Za-z0-9_][A-Za-z0-9_.\-]*))")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(1) if m.group(1) else m.start(2)
        if m.group(1):
            tokens.append((m.group(1), m.group(1), start))
        elif m.group(2) == "given":
            tokens.append(("given", "given", start))
        else:
            tokens.append(("ident", m.group(2), start))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, kb: KnowledgeBase):
        self.kb = kb
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, offset=0):
        return self.toks[min(self.i + offset, len(self.toks) - 1)]

    def next(self):
        tok = self.toks[self.i]
        if tok[0] != "eof":
            self.i += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            what = repr(tok[1]) if tok[0] != "eof" else "end of input"
            raise QuerySyntaxError(f"expected {kind!r}, found {what}", tok[2])
        return tok

    def query(self) -> QueryExpr:
        wrapped = self.peek()[:2] == ("ident", "P") and self.peek(1)[0] == "("
        if wrapped:
            self.next()
            self.next()
        target = self.prop()
        evidence = None
        if self.peek()[0] == "given":
            self.next()
            evidence = self.prop()
        if wrapped:
            self.expect(")")
        tok = self.peek()
        if tok[0] != "eof":
            raise QuerySyntaxError(f"unexpected {tok[1]!r}", tok[2])
        return QueryExpr(target, evidence)

    def prop(self):
        parts = [self.conj()]
        while self.peek()[0] == "|":
            self.next()
            parts.append(self.conj())
        return make_or(parts)

    def conj(self):
        parts = [self.unary()]
        while self.peek()[0] == "&":
            self.next()
            parts.append(self.unary())
        return make_and(parts)

    def unary(self):
        tok = self.peek()
        if tok[0] == "!":
            self.next()
            return negate(self.unary(), self.kb)
        if tok[0] == "(":
            self.next()
            inner = self.prop()
            self.expect(")")
            return inner
        if tok[0] == "ident":
            return self.literal()
        what = repr(tok[1]) if tok[0] != "eof" else "end of input"
        raise QuerySyntaxError(f"expected a literal, '!' or '(', found {what}", tok[2])

    def literal(self):
        _, name, pos = self.next()
        if name not in self.kb:
            raise UnknownVariableError(f"unknown variable {name!r} at position {pos}")
        var = self.kb.variable(name)
        if self.peek()[0] in ("=", "!="):
            op = self.next()[0]
            _, value, vpos = self.expect("ident")
            if value not in var.domain:
                raise UnknownValueError(
                    f"variable {name!r} has no value {value!r} (position {vpos})"
                )
            return Lit(_binary_canonical(Literal(var.id, var.index(value), op == "="), self.kb))
        if not var.is_binary:
            raise BinarySyntaxError(
                f"bare reference to {name!r} at position {pos}; it is not a binary t/f "
                f"variable, write {name}=<value>"
            )
        return Lit(Literal(var.id, 0))


def _binary_canonical(literal: Literal, kb: KnowledgeBase) -> Literal:
    if not literal.positive and kb.variables[literal.var].size == 2:
        return Literal(literal.var, 1 - literal.value)
    return literal


def negate(p: Proposition, kb: KnowledgeBase) -> Proposition:
    """Logical negation; single literals flip polarity instead of gaining a Not."""
    if isinstance(p, Lit):
        return Lit(_binary_canonical(p.literal.negated(), kb))
    return Not(p)


def parse(text: str, kb: KnowledgeBase) -> QueryExpr:
    """Parse a query string against ``kb``'s variables."""
    return _Parser(text, kb).query()


def parse_prop(text: str, kb: KnowledgeBase) -> Proposition:
    q = parse(text, kb)
    if q.evidence is not None:
        raise QuerySyntaxError("expected a proposition without 'given'", 0)
    return q.target


# -- random propositions ----------------------------------------------------------


def random_literal(kb: KnowledgeBase, rng: np.random.Generator, variables=None) -> Lit:
    variables = range(kb.n) if variables is None else variables
    var = kb.variables[int(rng.choice(list(variables)))]
    value = int(rng.integers(var.size))
    positive = var.size == 2 or bool(rng.random() < 0.7)
    return Lit(Literal(var.id, value, positive))


def random_proposition(kb: KnowledgeBase, rng: np.random.Generator, depth: int = 4,
                       max_refs: int = 6, variables=None) -> Proposition:
    """Random AND/OR/NOT tree with at most ``depth`` levels and ``max_refs`` literals."""
    budget = [max(1, max_refs)]

    def build(d):
        if d <= 1 or budget[0] <= 1 or rng.random() < 0.25:
            budget[0] -= 1
            return random_literal(kb, rng, variables)
        r = rng.random()
        if r < 0.2:
            return negate(build(d - 1), kb)
        k = int(rng.integers(2, 4))
        kids = []
        for _ in range(k):
            if budget[0] <= 0:
                break
            kids.append(build(d - 1))
        if len(kids) == 1:
            return kids[0]
        return make_and(kids) if r < 0.6 else make_or(kids)

    return build(depth)
