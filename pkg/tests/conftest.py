import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

import tameopt.expr as E

settings.register_profile(
    "repo", deadline=None, derandomize=True, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

UNARY = ["relu", "abs", "hinge", "square", "softsign", "logistic", "tanh",
         "softplus", "mish", "elu", "gelu", "erf", "arctan"]
coef = st.floats(-3, 3, allow_nan=False).map(lambda v: round(v, 3))


def exprs(arity=2, unary=UNARY):
    leaves = st.one_of(
        st.integers(0, arity - 1).map(lambda i: E.var(i, arity)),
        coef.map(E.const),
    )

    def extend(children):
        return st.one_of(
            st.tuples(st.sampled_from(unary), children).map(lambda t: E.prim(t[0], t[1])),
            st.tuples(children, children).map(lambda t: E.add(*t)),
            st.tuples(children, children).map(lambda t: E.mul(*t)),
            st.tuples(coef, children).map(lambda t: E.scale(*t)),
            st.tuples(children, children).map(lambda t: E.max2(*t)),
            st.tuples(children, children).map(lambda t: E.min2(*t)),
        )

    return st.recursive(leaves, extend, max_leaves=8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance lines are collected here and echoed in the terminal summary
ACCEPTANCE: list[str] = []


@pytest.fixture
def verdict(capsys):
    def report(number: int, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {detail}"
        ACCEPTANCE.append(line)
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
