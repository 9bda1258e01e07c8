"""Variables and immutable knowledge bases.

A knowledge base is either an explicit joint table or a Bayesian network.
Both are loaded from a JSON document::

    {"variables": [{"name": "a", "values": ["t", "f"]}, ...],
     "joint": {"order": ["a", ...], "probs": [...]}}

    {"variables": [...],
     "network": [{"var": "b", "parents": ["a"], "cpt": [[...], ...]}, ...]}

Joint probabilities are laid out in row-major order over the listed
``order``; CPT rows enumerate parent values row-major in the listed parent
order.  Internally every table is an ``ndarray`` whose axes follow the
declared variable order.
"""

from __future__ import annotations

import graphlib
import itertools
import json
from dataclasses import dataclass, field
from math import prod
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import KBFormatError, KBValidationError

NORMALIZATION_TOL = 1e-9
BINARY_DOMAIN = ("t", "f")


@dataclass(frozen=True)
class Variable:
    id: int
    name: str
    domain: tuple[str, ...]

    @property
    def size(self) -> int:
        return len(self.domain)

    @property
    def is_binary(self) -> bool:
        """True when bare ``x`` / ``!x`` query syntax is allowed."""
        return self.domain == BINARY_DOMAIN

    def index(self, value: str) -> int:
        try:
            return self.domain.index(value)
        except ValueError:
            raise KeyError(f"variable {self.name!r} has no value {value!r}") from None


@dataclass(frozen=True)
class Node:
    """One Bayesian-network node: parent ids and a CPT of shape (*parent_sizes, size)."""

    var: int
    parents: tuple[int, ...]
    cpt: np.ndarray = field(compare=False)


class KnowledgeBase:
    """Immutable probability model over a fixed list of discrete variables."""

    def __init__(self, variables, *, joint=None, network=None, name="kb"):
        self.name = name
        self.variables: tuple[Variable, ...] = tuple(variables)
        self._by_name = {v.name: v for v in self.variables}
        if (joint is None) == (network is None):
            raise KBValidationError("knowledge base needs exactly one of joint/network")
        self.joint = joint
        self.network: tuple[Node, ...] | None = network
        self._check()
        if joint is not None:
            joint.setflags(write=False)
        else:
            for node in network:
                node.cpt.setflags(write=False)
            self.topological_order = tuple(
                graphlib.TopologicalSorter({nd.var: nd.parents for nd in network}).static_order()
            )

    @property
    def kind(self) -> str:
        return "joint" if self.joint is not None else "bn"

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(v.size for v in self.variables)

    def variable(self, name: str) -> Variable:
        return self._by_name[name]

    def __contains__(self, name):
        return name in self._by_name

    def __repr__(self):
        return f"KnowledgeBase({self.name!r}, kind={self.kind}, n={self.n})"

    def _check(self):
        seen = set()
        for i, v in enumerate(self.variables):
            if v.id != i:
                raise KBValidationError(f"variable {v.name!r} has id {v.id}, expected {i}")
            if v.name in seen:
                raise KBValidationError(f"duplicate variable name {v.name!r}")
            seen.add(v.name)
            if len(v.domain) < 2:
                raise KBValidationError(f"variable {v.name!r} needs at least 2 values")
            if len(set(v.domain)) != len(v.domain):
                raise KBValidationError(f"duplicate value name in domain of {v.name!r}")

        if self.joint is not None:
            if self.joint.shape != self.shape:
                raise KBValidationError(
                    f"joint table has {self.joint.size} entries, expected {prod(self.shape)}"
                )
            _check_distribution(self.joint.ravel(), "joint table")
            return

        nodes = {}
        for node in self.network:
            name = self.variables[node.var].name
            if node.var in nodes:
                raise KBValidationError(f"variable {name!r} has two network entries")
            nodes[node.var] = node
            expect = tuple(self.variables[p].size for p in node.parents) + (
                self.variables[node.var].size,
            )
            if node.cpt.shape != expect:
                raise KBValidationError(f"CPT of {name!r} has shape {node.cpt.shape}, expected {expect}")
            for row_index in itertools.product(*(range(s) for s in expect[:-1])):
                _check_distribution(node.cpt[row_index], f"CPT row {list(row_index)} of {name!r}")
        missing = [v.name for v in self.variables if v.id not in nodes]
        if missing:
            raise KBValidationError(f"no network entry for {', '.join(missing)}")
        try:
            graphlib.TopologicalSorter({nd.var: nd.parents for nd in self.network}).prepare()
        except graphlib.CycleError as exc:
            cycle = [self.variables[i].name for i in exc.args[1]]
            raise KBValidationError(f"parent graph has a cycle: {' -> '.join(cycle)}") from None
        self.network = tuple(sorted(self.network, key=lambda nd: nd.var))

    # construction helpers

    @classmethod
    def from_joint(cls, variables, probs, order=None, name="kb"):
        """Build from ``probs`` laid out row-major over ``order`` (default: declared order)."""
        variables = _make_variables(variables)
        by_name = {v.name: v for v in variables}
        order = [v.name for v in variables] if order is None else list(order)
        if sorted(order) != sorted(by_name) or len(set(order)) != len(order):
            raise KBValidationError("joint order must list every variable exactly once")
        probs = np.asarray(probs, dtype=float)
        dims = [by_name[o].size for o in order]
        if probs.ndim != 1 or probs.size != prod(dims):
            raise KBValidationError(f"joint table has {probs.size} entries, expected {prod(dims)}")
        table = probs.reshape(dims)
        axes = [order.index(v.name) for v in variables]
        return cls(variables, joint=np.ascontiguousarray(table.transpose(axes)), name=name)

    @classmethod
    def from_network(cls, variables, entries, name="kb"):
        """Build from ``entries``: iterable of ``(var_name, parent_names, cpt_rows)``."""
        variables = _make_variables(variables)
        by_name = {v.name: v for v in variables}
        nodes = []
        for var, parents, rows in entries:
            for nm in (var, *parents):
                if nm not in by_name:
                    raise KBValidationError(f"network refers to unknown variable {nm!r}")
            if len(set(parents)) != len(parents) or var in parents:
                raise KBValidationError(f"bad parent list for {var!r}")
            pids = tuple(by_name[p].id for p in parents)
            dims = tuple(variables[p].size for p in pids) + (by_name[var].size,)
            rows = np.asarray(rows, dtype=float)
            if rows.ndim != 2 or rows.shape != (prod(dims[:-1]), dims[-1]):
                raise KBValidationError(
                    f"CPT of {var!r} has shape {rows.shape}, expected {(prod(dims[:-1]), dims[-1])}"
                )
            nodes.append(Node(by_name[var].id, pids, rows.reshape(dims)))
        return cls(variables, network=tuple(nodes), name=name)

    def to_dict(self) -> dict:
        doc = {
            "name": self.name,
            "variables": [{"name": v.name, "values": list(v.domain)} for v in self.variables],
        }
        if self.joint is not None:
            doc["joint"] = {
                "order": [v.name for v in self.variables],
                "probs": self.joint.ravel().tolist(),
            }
        else:
            doc["network"] = [
                {
                    "var": self.variables[nd.var].name,
                    "parents": [self.variables[p].name for p in nd.parents],
                    "cpt": nd.cpt.reshape(-1, nd.cpt.shape[-1]).tolist(),
                }
                for nd in self.network
            ]
        return doc

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def _make_variables(specs) -> list[Variable]:
    out = []
    for i, spec in enumerate(specs):
        if isinstance(spec, Variable):
            out.append(Variable(i, spec.name, spec.domain))
        else:
            nm, values = spec
            out.append(Variable(i, nm, tuple(values)))
    names = [v.name for v in out]
    for nm in names:
        if names.count(nm) > 1:
            raise KBValidationError(f"duplicate variable name {nm!r}")
    return out


def _check_distribution(p: np.ndarray, what: str):
    if not np.all(np.isfinite(p)):
        raise KBValidationError(f"{what} has a non-finite entry")
    if np.any(p < 0):
        raise KBValidationError(f"{what} has a negative entry")
    total = float(np.sum(p))
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise KBValidationError(f"{what} sums to {total!r}, not 1")


def load_kb(text: str, name: str | None = None) -> KnowledgeBase:
    """Parse and validate a JSON knowledge-base document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise KBFormatError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise KBFormatError("document must be a JSON object")
    name = name or doc.get("name") or "kb"

    raw_vars = doc.get("variables")
    if not isinstance(raw_vars, list) or not raw_vars:
        raise KBFormatError("'variables' must be a non-empty list")
    variables = []
    for i, rv in enumerate(raw_vars):
        if not isinstance(rv, dict) or not isinstance(rv.get("name"), str):
            raise KBFormatError(f"variables[{i}] needs a string 'name'")
        values = rv.get("values")
        if not isinstance(values, list) or not all(isinstance(x, str) for x in values):
            raise KBFormatError(f"variable {rv['name']!r}: 'values' must be a list of strings")
        variables.append((rv["name"], values))

    has_joint, has_net = "joint" in doc, "network" in doc
    if has_joint == has_net:
        raise KBFormatError("document needs exactly one of 'joint' or 'network'")

    if has_joint:
        joint = doc["joint"]
        if not isinstance(joint, dict):
            raise KBFormatError("'joint' must be an object")
        order, probs = joint.get("order"), joint.get("probs")
        if not isinstance(order, list) or not all(isinstance(o, str) for o in order):
            raise KBFormatError("'joint.order' must be a list of variable names")
        if not isinstance(probs, list) or not all(_is_number(p) for p in probs):
            raise KBFormatError("'joint.probs' must be a list of numbers")
        for o in order:
            if o not in {nm for nm, _ in variables}:
                raise KBValidationError(f"joint order names unknown variable {o!r}")
        return KnowledgeBase.from_joint(variables, probs, order=order, name=name)

    net = doc["network"]
    if not isinstance(net, list):
        raise KBFormatError("'network' must be a list")
    entries = []
    for i, ent in enumerate(net):
        if not isinstance(ent, dict) or not isinstance(ent.get("var"), str):
            raise KBFormatError(f"network[{i}] needs a string 'var'")
        parents = ent.get("parents", [])
        if not isinstance(parents, list) or not all(isinstance(p, str) for p in parents):
            raise KBFormatError(f"network entry {ent['var']!r}: 'parents' must be a list of names")
        cpt = ent.get("cpt")
        if not isinstance(cpt, list) or not all(
            isinstance(r, list) and all(_is_number(x) for x in r) for r in cpt
        ):
            raise KBFormatError(f"network entry {ent['var']!r}: 'cpt' must be a list of number rows")
        if len({len(r) for r in cpt}) > 1:
            raise KBValidationError(f"CPT of {ent['var']!r} has rows of unequal length")
        entries.append((ent["var"], parents, cpt))
    return KnowledgeBase.from_network(variables, entries, name=name)


def load_kb_file(path) -> KnowledgeBase:
    path = Path(path)
    return load_kb(path.read_text(encoding="utf-8"), name=path.stem)


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _index_assignment(kb: KnowledgeBase, assignment) -> tuple[int, ...]:
    if isinstance(assignment, Mapping):
        extra = set(assignment) - {v.name for v in kb.variables}
        if extra:
            raise KeyError(f"unknown variable(s) in assignment: {sorted(extra)}")
        idx = []
        for v in kb.variables:
            if v.name not in assignment:
                raise KeyError(f"assignment is missing variable {v.name!r}")
            val = assignment[v.name]
            idx.append(val if isinstance(val, int) else v.index(val))
    else:
        idx = list(assignment)
        if len(idx) != kb.n:
            raise KeyError(f"assignment has {len(idx)} values, expected {kb.n}")
    for v, i in zip(kb.variables, idx):
        if not 0 <= i < v.size:
            raise KeyError(f"value index {i} out of range for {v.name!r}")
    return tuple(idx)


def joint_probability(kb: KnowledgeBase, assignment) -> float:
    """P(full assignment).

    ``assignment`` maps every variable name to a value name (or index), or is
    a sequence of value indices in declared variable order.
    """
    idx = _index_assignment(kb, assignment)
    if kb.joint is not None:
        return float(kb.joint[idx])
    p = 1.0
    for node in kb.network:
        p *= node.cpt[tuple(idx[q] for q in node.parents) + (idx[node.var],)]
    return float(p)


def expand_joint(kb: KnowledgeBase) -> np.ndarray:
    """Full joint table with axes in declared variable order."""
    if kb.joint is not None:
        return kb.joint
    if kb.n > 20:
        raise ValueError(f"refusing to expand a joint over {kb.n} variables")
    table = np.ones(kb.shape)
    for node in kb.network:
        shape = [1] * kb.n
        for axis in (*node.parents, node.var):
            shape[axis] = kb.variables[axis].size
        # CPT axes are (parents..., var); reorder to ascending variable id before broadcasting
        axes = (*node.parents, node.var)
        perm = sorted(range(len(axes)), key=lambda i: axes[i])
        table = table * node.cpt.transpose(perm).reshape(shape)
    return table


def factorize_joint(kb: KnowledgeBase) -> KnowledgeBase:
    """Chain-rule factorization of a joint table into a fully connected network.

    Variable i gets parents 0..i-1.  Parent rows of zero probability get a
    uniform CPT row, which leaves every joint entry unchanged.
    """
    table = expand_joint(kb)
    entries = []
    for i, v in enumerate(kb.variables):
        marg = table.sum(axis=tuple(range(i + 1, kb.n))) if i + 1 < kb.n else table
        denom = marg.sum(axis=-1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            cond = np.where(denom > 0, marg / np.where(denom > 0, denom, 1.0), 1.0 / v.size)
        parents = [w.name for w in kb.variables[:i]]
        entries.append((v.name, parents, cond.reshape(-1, v.size)))
    return KnowledgeBase.from_network(kb.variables, entries, name=kb.name + "-bn")


def independent_kb(n: int, p: float = 0.5, name="indep", prefix="x") -> KnowledgeBase:
    """n independent binary t/f variables ``x1..xn`` with P(xi = t) = p."""
    variables = [(f"{prefix}{i + 1}", BINARY_DOMAIN) for i in range(n)]
    entries = [(nm, [], [[p, 1.0 - p]]) for nm, _ in variables]
    return KnowledgeBase.from_network(variables, entries, name=name)


def _domains(n, sizes):
    if isinstance(sizes, int):
        sizes = [sizes] * n
    out = []
    for i, s in enumerate(sizes):
        values = BINARY_DOMAIN if s == 2 else tuple(f"v{j}" for j in range(s))
        out.append((f"x{i + 1}", values))
    return out


def random_joint_kb(n: int, rng: np.random.Generator, sizes: int | Sequence[int] = 2,
                    name="random-joint") -> KnowledgeBase:
    """Joint table drawn from a flat Dirichlet."""
    variables = _domains(n, sizes)
    dims = [len(vals) for _, vals in variables]
    probs = rng.dirichlet(np.ones(prod(dims)))
    return KnowledgeBase.from_joint(variables, probs, name=name)


def random_bayes_net(n: int, rng: np.random.Generator, sizes: int | Sequence[int] = 2,
                     max_parents: int = 3, name="random-bn") -> KnowledgeBase:
    """Random DAG over a shuffled variable order with Dirichlet CPT rows."""
    variables = _domains(n, sizes)
    order = rng.permutation(n)
    entries = []
    for pos, i in enumerate(order):
        k = int(rng.integers(0, min(max_parents, pos) + 1))
        parents = sorted(rng.choice(order[:pos], size=k, replace=False).tolist()) if k else []
        d = len(variables[i][1])
        rows = prod(len(variables[p][1]) for p in parents)
        cpt = rng.dirichlet(np.ones(d), size=rows)
        entries.append((variables[i][0], [variables[p][0] for p in parents], cpt))
    return KnowledgeBase.from_network(variables, entries, name=name)
