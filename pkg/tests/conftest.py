import numpy as np
import pytest

from holobgs import ComplexField


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_field(rng, shape, min_amp: float = 0.0) -> ComplexField:
    """Random complex field; min_amp bounds amplitudes away from zero."""
    amp = rng.uniform(min_amp, min_amp + 1.0, size=shape)
    ph = rng.uniform(0.0, 2.0 * np.pi, size=shape)
    return ComplexField(amp * np.exp(1j * ph))
