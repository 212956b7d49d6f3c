import numpy as np
import pytest

from fzbeam import EvalContext, Placement, SystemConfig


@pytest.fixture(scope="session")
def default_config() -> SystemConfig:
    return SystemConfig()


@pytest.fixture(scope="session")
def reference_placement() -> Placement:
    """The fixed demo placement used for single-link studies."""
    return Placement([6.4, 5.0, 14.4], [-4.8, 5.0, 6.4])


@pytest.fixture(scope="session")
def small_config() -> SystemConfig:
    """Quarter-size aperture; keeps element-wise oracles fast."""
    return SystemConfig(side_m=0.5, subcarriers=64)


@pytest.fixture(scope="session")
def reference_context(default_config, reference_placement) -> EvalContext:
    return EvalContext(default_config, reference_placement)


@pytest.fixture(scope="session")
def small_context(small_config, reference_placement) -> EvalContext:
    return EvalContext(small_config, reference_placement)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)
