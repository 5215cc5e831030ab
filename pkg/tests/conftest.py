import numpy as np
import pytest
from hypothesis import settings

from markovsa.cli import fixture_path
from markovsa.mdp import MdpModel, PolicyParam
from markovsa.textio import read_matrix

settings.register_profile("repo", max_examples=60, deadline=None)
settings.load_profile("repo")

CHAIN = np.array([[0.9, 0.1], [0.2, 0.8]])


@pytest.fixture
def chain():
    return CHAIN.copy()


@pytest.fixture(scope="session")
def ref_mdp():
    return MdpModel.from_file(fixture_path("paper-2x3"))


@pytest.fixture(scope="session")
def ref_theta():
    return read_matrix(fixture_path("paper-2x3-theta"))


@pytest.fixture(scope="session")
def ref_param(ref_theta):
    return PolicyParam("exponential", np.log(ref_theta))


def pytest_terminal_summary(terminalreporter):
    from tests.test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
