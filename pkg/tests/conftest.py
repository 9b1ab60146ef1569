import pytest

from fogweaver.dsl import parse_scenario
from fogweaver.fixtures import uc1_text


@pytest.fixture(scope="session")
def uc1():
    return parse_scenario(uc1_text())


@pytest.fixture(scope="session")
def uc1_net(uc1):
    from fogweaver.gclsched import synthesize_gcl

    return synthesize_gcl(uc1)


@pytest.fixture(scope="session")
def uc1_node_schedules(uc1):
    from fogweaver.pipeline import synthesize_all_nodes

    return synthesize_all_nodes(uc1)
