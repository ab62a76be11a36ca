import numpy as np
import pytest

from lrbench.population import (
    MultivariateGenConfig,
    UnivariateGenConfig,
    build_gmm_population,
    build_univariate_population,
)

POP_SEED = 20240701


@pytest.fixture(scope="session")
def pop():
    """Full-size univariate population shared by read-only tests."""
    return build_univariate_population(UnivariateGenConfig(seed=POP_SEED))


@pytest.fixture(scope="session")
def small_gmm_pop():
    """A shrunken mixture population: full structure, desk-scale counts."""
    config = MultivariateGenConfig(dims=2, n_between_components=2,
                                   sources_per_between_component=60,
                                   n_within_components=3,
                                   suspects_per_between_component=2,
                                   seed=4021)
    return build_gmm_population(config)


@pytest.fixture
def rng():
    return np.random.default_rng(987654321)
