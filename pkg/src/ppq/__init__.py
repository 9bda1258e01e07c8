"""Propositional probability queries answered through a single-variable oracle."""

from .engine import (
    EvalResult,
    EvalStats,
    Evaluator,
    QueryFormClassification,
    classify_query_form,
    predicted_call_bound,
)
from .errors import PPQError, UndefinedConditionalError
from .model import KnowledgeBase, Variable, joint_probability, load_kb, load_kb_file
from .oracle import (
    CountingOracle,
    EnumerationOracle,
    OracleCapabilities,
    StrictSVOracle,
    SVQuery,
    counting_oracle,
    strict_sv_wrapper,
    sv_prob,
)
from .query import Literal, QueryExpr, parse
from .trace import DerivationNode

__version__ = "0.1.0"
