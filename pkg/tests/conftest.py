import numpy as np
import pytest

from cascadesim.hilbert import COMPOSITE, DensityOperator


def random_density(dim: int, rng: np.random.Generator, layout: str = COMPOSITE) -> DensityOperator:
    """Random full-rank density operator (Wishart construction)."""
    M = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = M @ M.conj().T
    return DensityOperator(rho / np.trace(rho), layout=layout)


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
