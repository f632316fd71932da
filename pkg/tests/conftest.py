import random

import pytest

from mkpot.forms import standard_structures


@pytest.fixture(scope="session")
def flat():
    """(structure, rho0, sigma0, Omega0) for the Darboux model."""
    return standard_structures()


@pytest.fixture()
def rng():
    return random.Random(20110405)
