"""Derivation trees recorded while an evaluation runs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

RULES = ("Step1", "DeMorgan", "ChainRuleFactor", "NegElim", "CacheHit", "Contradiction", "Tautology")


@dataclass
class DerivationNode:
    rule: str
    expression: str
    value: float
    children: list[DerivationNode] = field(default_factory=list)
    # (SV query text, factor value) pairs, in evaluation order; ChainRuleFactor only
    factors: list[tuple[str, float]] = field(default_factory=list)

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"unknown derivation rule {self.rule!r}")

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def leaves(self):
        return [n for n in self.walk() if not n.children]

    def to_dict(self) -> dict:
        d = {"rule": self.rule, "expr": self.expression, "value": self.value,
             "children": [c.to_dict() for c in self.children]}
        if self.factors:
            d["factors"] = [{"expr": e, "value": v} for e, v in self.factors]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> DerivationNode:
        return cls(
            d["rule"], d["expr"], d["value"],
            [cls.from_dict(c) for c in d.get("children", [])],
            [(f["expr"], f["value"]) for f in d.get("factors", [])],
        )

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def render(self, indent: str = "  ") -> str:
        """Indented text rendering, one node per line."""
        lines = []

        def emit(node, depth):
            pad = indent * depth
            lines.append(f"{pad}[{node.rule}] P({node.expression}) = {node.value:.17g}")
            for expr, v in node.factors:
                lines.append(f"{pad}{indent}* P({expr}) = {v:.17g}")
            for c in node.children:
                emit(c, depth + 1)

        emit(self, 0)
        return "\n".join(lines)
