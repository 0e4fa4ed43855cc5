import os
import sys

import pytest
import sympy
from hypothesis import HealthCheck, settings

from slowmani import problems
from slowmani.algebra import RatMat
from slowmani.frontend import lower_to_ratfunc, parse_expression

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "oracle"))

settings.register_profile(
    "suite", deadline=None, derandomize=True, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def rf(ring, text):
    """RatFunc from problem-file syntax."""
    return lower_to_ratfunc(parse_expression(text), ring)


def col(ring, *texts):
    return RatMat.column(ring, [rf(ring, t) for t in texts])


def to_sympy(f):
    return sympy.sympify(str(f).replace("^", "**"))


def sympy_equal(f, expr):
    return sympy.cancel(to_sympy(f) - expr) == 0


@pytest.fixture(scope="session")
def bundled():
    return {name: problems.load(name) for name in problems.NAMES}
