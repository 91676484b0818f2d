import pytest

from stringbreak import ChainSpec, Exponential, statics


@pytest.fixture(scope="session")
def crossing_l5():
    chain = ChainSpec(ell=5, kernel=Exponential(xi=1.0))
    return statics.locate_avoided_crossing(chain, 1.2, (0.15, 0.35))


@pytest.fixture(scope="session")
def crossing_l7():
    chain = ChainSpec(ell=7, kernel=Exponential(xi=1.0))
    return statics.locate_avoided_crossing(chain, 1.2, (0.10, 0.28))


@pytest.fixture(scope="session")
def crossing_l9():
    chain = ChainSpec(ell=9, kernel=Exponential(xi=1.0))
    return statics.locate_avoided_crossing(chain, 1.2, (0.08, 0.20))


@pytest.fixture(scope="session")
def crossing_l15():
    chain = ChainSpec(ell=15, kernel=Exponential(xi=1.0))
    return statics.locate_avoided_crossing(chain, 1.2, (0.04, 0.14))
