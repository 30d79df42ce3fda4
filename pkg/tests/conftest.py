import numpy as np
import pytest

from levycounts import measures as M


@pytest.fixture
def uniform_spec():
    """Lebesgue on ]0,1] with ratio 1."""
    return M.custom(
        M.uniform01_dominating(),
        lambda y: np.ones_like(np.asarray(y, dtype=float)),
        "uniform01",
    )


@pytest.fixture
def linear_spec():
    """Lebesgue on ]0,1] with ratio(y) = y."""
    return M.custom(
        M.uniform01_dominating(), lambda y: np.asarray(y, dtype=float), "uniform01_linear"
    )
