import numpy as np
import pytest

from hyperbell.hilbert import HybridState, StateLayout


@pytest.fixture
def small_layout() -> StateLayout:
    return StateLayout(photons=("A", "B"), paths=(("a1", "a2"), ("b1", "b2")))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260811)


def random_state(layout: StateLayout, rng, normalize=True) -> HybridState:
    amps = rng.normal(size=layout.shape) + 1j * rng.normal(size=layout.shape)
    if normalize:
        amps /= np.linalg.norm(amps)
    return HybridState(layout, amps)
