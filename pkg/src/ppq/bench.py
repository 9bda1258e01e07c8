"""Query families and the SV-call benchmark.

Every family is built over independent fair-coin variables ``x1..xm``, so
any oracle call is cheap and the counts isolate the evaluator's own work.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import astuple, dataclass

from .engine import Evaluator, predicted_call_bound
from .model import KnowledgeBase, independent_kb
from .query import And, Lit, Literal, Not, Or, Proposition, count_references, count_spanning_negations, normalize

FAMILIES = ("nested", "form1", "form2", "form3", "form4")
MAX_PREDICTED_CALLS = 2 ** 24
CSV_HEADER = ("family", "m", "q", "predicted_bound", "sv_calls_cache_off", "sv_calls_cache_on",
              "value", "wall_time_us")


@dataclass(frozen=True)
class FamilySpec:
    name: str
    m: int
    r: int = 2

    def __post_init__(self):
        if self.name not in FAMILIES:
            raise ValueError(f"unknown family {self.name!r}; choose from {', '.join(FAMILIES)}")
        low = {"nested": 2, "form3": self.r, "form4": self.r}.get(self.name, 1)
        if self.m < low:
            raise ValueError(f"family {self.name} needs m >= {low}, got {self.m}")

    def proposition(self) -> Proposition:
        return build_family(self.name, self.m, self.r)


@dataclass
class BenchRow:
    family: str
    m: int
    q: int
    predicted_bound: int
    sv_calls_cache_off: int
    sv_calls_cache_on: int
    value: float
    wall_time_us: int


def _x(i: int, positive=True) -> Lit:
    # x_i with i counted from 1; negation of a fair coin is its "f" value
    return Lit(Literal(i - 1, 0 if positive else 1))


def _groups(m: int, r: int) -> list[list[int]]:
    """Split 1..m into r consecutive groups whose sizes differ by at most one."""
    base, extra = divmod(m, r)
    out, start = [], 1
    for g in range(r):
        size = base + (g < extra)
        out.append(list(range(start, start + size)))
        start += size
    return out


def _group(kind, members):
    lits = [_x(i) for i in members]
    return lits[0] if len(lits) == 1 else kind(tuple(lits))


def nested_query(m: int) -> Proposition:
    """!(x1 & !(x2 & ... !(x_{m-1} & !x_m)...)) with m-1 spanning negations."""
    if m < 2:
        raise ValueError("nested family needs m >= 2")
    p = And((_x(m - 1), _x(m, positive=False)))
    for i in range(m - 2, 0, -1):
        p = And((_x(i), Not(p)))
    return Not(p)


def build_family(name: str, m: int, r: int = 2) -> Proposition:
    if name == "nested":
        return nested_query(m)
    if name in ("form1", "form2"):
        if m == 1:
            return _x(1)
        lits = tuple(_x(i) for i in range(1, m + 1))
        return And(lits) if name == "form1" else Or(lits)
    if name == "form3":
        return Or(tuple(_group(And, g) for g in _groups(m, r)))
    if name == "form4":
        return And(tuple(_group(Or, g) for g in _groups(m, r)))
    raise ValueError(f"unknown family {name!r}")


def bench_kb(m: int) -> KnowledgeBase:
    return independent_kb(m, 0.5, name=f"bench{m}")


def parse_range(text: str) -> range:
    """``"3..11"`` -> range(3, 12); a single number is a one-element range."""
    lo, sep, hi = text.partition("..")
    try:
        lo_i = int(lo)
        hi_i = int(hi) if sep else lo_i
    except ValueError:
        raise ValueError(f"bad range {text!r}; expected A..B") from None
    if hi_i < lo_i:
        raise ValueError(f"empty range {text!r}")
    return range(lo_i, hi_i + 1)


def check_budget(family: str, ms, r: int = 2):
    for m in ms:
        spec = FamilySpec(family, m, r)
        p = spec.proposition()
        bound = predicted_call_bound(count_references(p), count_spanning_negations(normalize(p)))
        if bound > MAX_PREDICTED_CALLS:
            raise ValueError(
                f"family {family} at m={m} predicts {bound} SV calls (limit {MAX_PREDICTED_CALLS})"
            )


def bench_row(family: str, m: int, r: int = 2, cache: bool = False, timing: bool = True,
              kb: KnowledgeBase | None = None) -> BenchRow:
    p = FamilySpec(family, m, r).proposition()
    kb = kb or bench_kb(m)
    off = Evaluator(kb, cache=False).eval_marginal(p)
    on = Evaluator(kb, cache=True).eval_marginal(p)
    chosen = on if cache else off
    wall = 0
    if timing:
        ev = Evaluator(kb, cache=cache)
        t0 = time.perf_counter_ns()
        ev.eval_marginal(p)
        wall = (time.perf_counter_ns() - t0) // 1000
    s = off.stats
    return BenchRow(family, m, s.q, s.predicted_bound, s.sv_calls, on.stats.sv_calls,
                    chosen.value, wall)


def run_bench(family: str, ms, r: int = 2, cache: bool = False, timing: bool = True) -> list[BenchRow]:
    ms = list(ms)
    check_budget(family, ms, r)
    kb = bench_kb(max(ms))
    return [bench_row(family, m, r, cache, timing, kb) for m in ms]


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        vals = list(astuple(row))
        vals[6] = format(row.value, ".17g")
        w.writerow(vals)
    return buf.getvalue()

