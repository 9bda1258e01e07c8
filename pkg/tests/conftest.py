import itertools
from pathlib import Path

import pytest

from ppq.model import joint_probability, load_kb_file
from ppq.query import make_and, satisfies

KB_DIR = Path(__file__).resolve().parent.parent / "kbs"


def kb_path(name):
    return KB_DIR / f"{name}.json"


@pytest.fixture
def demo2():
    return load_kb_file(kb_path("demo2"))


@pytest.fixture
def chain2():
    return load_kb_file(kb_path("chain2"))


@pytest.fixture
def indep4():
    return load_kb_file(kb_path("indep4"))


@pytest.fixture
def paint():
    return load_kb_file(kb_path("paint"))


def enumerate_prob(kb, prop):
    """Reference P(prop): loop over every full assignment with plain Python."""
    total = 0.0
    for assignment in itertools.product(*(range(v.size) for v in kb.variables)):
        if satisfies(prop, assignment):
            total += joint_probability(kb, assignment)
    return total


def enumerate_conditional(kb, query):
    if query.evidence is None:
        return enumerate_prob(kb, query.target)
    return enumerate_prob(kb, make_and([query.target, query.evidence])) / enumerate_prob(kb, query.evidence)
