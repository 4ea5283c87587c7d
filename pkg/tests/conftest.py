import numpy as np
import pytest

from ccakit.planted import PlantedParams, generate_planted


@pytest.fixture
def small_instance():
    """Well-conditioned planted instance with a clear eigengap."""
    params = PlantedParams(n=400, p1=12, p2=15, correlations=(0.9, 0.6, 0.3))
    return generate_planted(params, seed=7)


@pytest.fixture
def rank1_instance():
    """Rank-1-focused instance with lam1=0.9, lam2=0.3."""
    params = PlantedParams(n=500, p1=8, p2=8, correlations=(0.9, 0.3))
    return generate_planted(params, seed=11)


def random_orthogonal(k, rng):
    from scipy.linalg import qr

    return qr(rng.standard_normal((k, k)))[0]
