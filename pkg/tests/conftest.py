import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from svpressure.matrixpot import MatrixCocycle, Orientation
from svpressure.pressure import CocycleSystem
from svpressure.symbolic import full_shift, validate_sft

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

GOLDEN = [[1, 1], [1, 0]]


def random_gl2(rng: np.random.Generator, k: int = 2) -> np.ndarray:
    """``k`` random 2x2 matrices with |det| bounded away from 0."""
    while True:
        A = rng.standard_normal((k, 2, 2))
        if np.all(np.abs(np.linalg.det(A)) > 0.1):
            return A


def system_of(mats, T=None, orientation=Orientation.DERIVATIVE, blocks=None) -> CocycleSystem:
    mats = np.asarray(mats, dtype=float)
    sft = full_shift(mats.shape[0]) if T is None else validate_sft(T)
    return CocycleSystem(sft, MatrixCocycle(mats, orientation, blocks))


@pytest.fixture
def golden():
    return validate_sft(GOLDEN)


@pytest.fixture
def diag24_full():
    # diag(2,4) toral endomorphism, all 8 branches
    return system_of(np.broadcast_to(np.diag([2.0, 4.0]), (8, 2, 2)), blocks=((0,), (1,)))
