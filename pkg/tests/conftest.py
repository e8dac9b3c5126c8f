import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

from fogbisim.grammar import parse_grammar  # noqa: E402

SAMPLE_GRAMMAR = """\
nonterminal A 3
nonterminal B 0
nonterminal C 2
nonterminal D 2
action a
action b
rule A(x1,x2,x3) a C(D(x3,B),x2)
rule A(x1,x2,x3) b x1
"""

N_GRAMMAR = "nonterminal N 1\naction a\nrule N(x1) a x1\n"

LOOPS = "nonterminal A 0\nnonterminal C 0\naction a\nrule A a A\nrule C a C\n"


@pytest.fixture
def sample():
    return parse_grammar(SAMPLE_GRAMMAR, strict=True)


@pytest.fixture
def ngram():
    return parse_grammar(N_GRAMMAR)


@pytest.fixture
def loops():
    return parse_grammar(LOOPS)


def nterm(k: int) -> str:
    return "N(" * k + "x1" + ")" * k
