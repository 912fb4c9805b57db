import numpy as np
import pytest

from pccnmf import DataMatrix, generate_swimmer


@pytest.fixture(scope="session")
def swimmer():
    return generate_swimmer()


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


def random_mixture(rng, n_pixels, n_images, rank, scale=1.0):
    """Exact mixture: column-stochastic conditionals times a normalized joint.

    Returns (matrix, basis, weights) with matrix = basis @ weights exactly.
    """
    basis = rng.random((n_pixels, rank)) + 0.05
    basis /= basis.sum(axis=0)
    weights = rng.random((rank, n_images)) + 0.05
    weights /= weights.sum()
    weights *= scale
    values = basis @ weights
    return DataMatrix(values), basis, weights
