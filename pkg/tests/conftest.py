from fractions import Fraction

import pytest

from dclab.lattice import Z, SupportVector, finite
from dclab.operators import ForwardShift, SignSplit, invert
from dclab.subspaces import IndexMask


def e(i, coeff=1, lattice=Z):
    return SupportVector.basis(lattice, i, coeff)


def fe(dim, i=0, coeff=1):
    return SupportVector.basis(finite(dim), i, coeff)


@pytest.fixture(scope="session")
def F():
    return ForwardShift(Z, SignSplit(3, 4), declared_invertible=True)


@pytest.fixture(scope="session")
def B(F):
    return invert(F)


@pytest.fixture(scope="session")
def M():
    return IndexMask(Z, 2, frozenset({1}))


@pytest.fixture
def q():
    return Fraction


def pytest_terminal_summary(terminalreporter):
    # one line per acceptance criterion; parametrized cases fold into their criterion
    verdicts = {}
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when == "call" and "test_acceptance.py::test_criterion_" in rep.nodeid:
                name = rep.nodeid.split("::test_criterion_")[-1].split("[")[0]
                ok = verdicts.get(name, True) and outcome == "passed"
                verdicts[name] = ok
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for name in sorted(verdicts):
            terminalreporter.write_line(f"criterion {name}: {'PASS' if verdicts[name] else 'FAIL'}")
