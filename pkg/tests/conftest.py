import math

import pytest

from model import classify
from series import build_coefficients, build_rescaled_limit, find_wave_constants


@pytest.fixture(scope="session")
def critical_params():
    return classify(math.sqrt(2.0), 1.0)


@pytest.fixture(scope="session")
def params_mu2():
    return classify(2.0, 1.0)


@pytest.fixture(scope="session")
def params_mu3():
    return classify(3.0, 1.0)


@pytest.fixture(scope="session")
def critical_table(critical_params):
    return build_coefficients(critical_params)


@pytest.fixture(scope="session")
def critical_consts(critical_table):
    return find_wave_constants(critical_table)


@pytest.fixture(scope="session")
def table_mu2(params_mu2):
    return build_coefficients(params_mu2)


@pytest.fixture(scope="session")
def consts_mu2(table_mu2):
    return find_wave_constants(table_mu2)


@pytest.fixture(scope="session")
def table_mu3(params_mu3):
    return build_coefficients(params_mu3)


@pytest.fixture(scope="session")
def consts_mu3(table_mu3):
    return find_wave_constants(table_mu3)


@pytest.fixture(scope="session")
def limit_table():
    return build_rescaled_limit()
