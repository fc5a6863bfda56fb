import pytest

from heiscount.counter_opts import get_default_opts
from heiscount.quadint import make_field


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long running enumeration or orbit expansion")


@pytest.fixture
def gaussian():
    return make_field(-4)


@pytest.fixture
def eisenstein():
    return make_field(-3)


@pytest.fixture(params=[-3, -4, -7])
def small_field(request):
    return make_field(request.param)


@pytest.fixture
def quick_opts():
    opts = get_default_opts()
    opts['verbose'] = 0
    opts['verify'].update({
        'n_pairs': 500,
        'n_triples': 50,
        'n_words': 50,
        'n_chains': 20,
        'n_chain_samples': 64,
        'oracle_s': 12,
    })
    return opts
