import numpy as np
import pytest

from perifrac.spectral import ProblemSpec, SpectrumParams


@pytest.fixture
def example_problem():
    """The built-in quartic benchmark problem (lambda set to a plain value;
    tests that care about lambda override it)."""
    return ProblemSpec(s=0.75, m=1.0, gamma=0.5, lam=0.1, T=2.0 * np.pi, N=2)


@pytest.fixture
def small_params():
    return SpectrumParams(modes=3, grid_points=8)


def random_symmetric_coeffs(rng, modes, N):
    """Hermitian-symmetric coefficient block c_{-k} = conj(c_k)."""
    shape = (2 * modes + 1,) * N
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    flipped = np.conj(c[tuple(slice(None, None, -1) for _ in range(N))])
    return 0.5 * (c + flipped)
