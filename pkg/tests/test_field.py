import numpy as np
import pytest

from holobgs import (
    BinaryPattern,
    ComplexField,
    PhaseMap,
    RealImage,
    TWO_PI,
    ValidationError,
    amplitude,
    center_dc,
    combine,
    dft2,
    idft2,
    phase,
    uncenter_dc,
    wrap_phase,
)
from holobgs.errors import DimensionMismatchError

from conftest import random_field
from oracles import naive_dft2_quadloop, rel_l2


# ---------------------------------------------------------------------------
# container invariants


def test_complex_field_rejects_non_finite():
    bad = np.ones((4, 4), dtype=complex)
    bad[1, 2] = np.nan
    with pytest.raises(ValidationError):
        ComplexField(bad)
    bad[1, 2] = np.inf
    with pytest.raises(ValidationError):
        ComplexField(bad)


def test_complex_field_rejects_small_and_non_2d():
    with pytest.raises(ValidationError):
        ComplexField(np.ones((1, 8), dtype=complex))
    with pytest.raises(ValidationError):
        ComplexField(np.ones(16, dtype=complex))


def test_real_image_rejects_negative_and_nan():
    with pytest.raises(ValidationError):
        RealImage([[1.0, -0.1], [0.0, 2.0]])
    with pytest.raises(ValidationError):
        RealImage([[1.0, np.nan], [0.0, 2.0]])


def test_phase_map_wraps_on_construction():
    pm = PhaseMap([[-np.pi / 2, 3 * np.pi], [7.0, 0.0]])
    assert np.all(pm.data >= 0.0)
    assert np.all(pm.data < TWO_PI)
    assert pm.data[0, 0] == pytest.approx(3 * np.pi / 2)
    assert pm.data[0, 1] == pytest.approx(np.pi)
    assert pm.data[1, 0] == pytest.approx(7.0 - TWO_PI)


def test_binary_pattern_rejects_non_binary():
    with pytest.raises(ValidationError):
        BinaryPattern([[0, 1], [2, 0]])
    with pytest.raises(ValidationError):
        BinaryPattern([[0.5, 1.0], [0.0, 0.0]])


def test_containers_are_immutable():
    img = RealImage(np.ones((3, 3)))
    with pytest.raises(ValueError):
        img.data[0, 0] = 2.0


def test_wrap_phase_tiny_negative_stays_in_range():
    wrapped = wrap_phase(np.array([-1e-20, -0.0, 0.0]))
    assert np.all(wrapped >= 0.0)
    assert np.all(wrapped < TWO_PI)


# ---------------------------------------------------------------------------
# transforms


def test_dft2_delta_is_flat():
    data = np.zeros((4, 4), dtype=complex)
    data[0, 0] = 1.0
    out = dft2(ComplexField(data))
    assert np.allclose(out.data, 0.25)


def test_dft2_all_ones_is_dc_spike():
    out = dft2(ComplexField(np.ones((2, 2), dtype=complex)))
    assert out.data[0, 0] == pytest.approx(2.0)
    rest = out.data.copy()
    rest[0, 0] = 0.0
    assert np.allclose(rest, 0.0)


def test_idft2_constant_to_spike():
    c = 0.3 - 0.4j
    out = idft2(ComplexField(np.full((5, 7), c)))
    assert out.data[0, 0] == pytest.approx(c * np.sqrt(35.0))
    rest = out.data.copy()
    rest[0, 0] = 0.0
    assert np.allclose(rest, 0.0, atol=1e-14)


def test_dft2_matches_quadloop_oracle(rng):
    f = random_field(rng, (16, 16))
    assert rel_l2(dft2(f).data, naive_dft2_quadloop(f.data)) < 1e-10


def test_idft2_matches_quadloop_oracle(rng):
    f = random_field(rng, (16, 16))
    assert rel_l2(idft2(f).data, naive_dft2_quadloop(f.data, inverse=True)) < 1e-10


def test_nonsquare_matches_quadloop_oracle(rng):
    f = random_field(rng, (6, 10))
    assert rel_l2(dft2(f).data, naive_dft2_quadloop(f.data)) < 1e-10
    assert rel_l2(idft2(f).data, naive_dft2_quadloop(f.data, inverse=True)) < 1e-10


@pytest.mark.parametrize("shape", [(2, 2), (17, 31), (37, 23), (128, 128), (512, 512)])
def test_round_trip_identity(rng, shape):
    f = random_field(rng, shape)
    back = idft2(dft2(f))
    assert rel_l2(back.data, f.data) < 1e-12
    forth = dft2(idft2(f))
    assert rel_l2(forth.data, f.data) < 1e-12


@pytest.mark.parametrize("shape", [(3, 5), (8, 8), (60, 84), (101, 37)])
def test_parseval_energy_conservation(rng, shape):
    f = random_field(rng, shape)
    e0 = np.sum(np.abs(f.data) ** 2)
    assert abs(np.sum(np.abs(dft2(f).data) ** 2) - e0) / e0 < 1e-10
    assert abs(np.sum(np.abs(idft2(f).data) ** 2) - e0) / e0 < 1e-10


# ---------------------------------------------------------------------------
# amplitude / phase / combine


def test_amplitude_pythagorean():
    f = ComplexField([[3 + 4j, 0], [1j, 1]])
    amp = amplitude(f)
    assert amp.data[0, 0] == pytest.approx(5.0)
    assert amp.data[0, 1] == 0.0


def test_amplitude_zero_field():
    amp = amplitude(ComplexField(np.zeros((3, 3), dtype=complex)))
    assert np.all(amp.data == 0.0)


def test_amplitude_unit_modulus(rng):
    thetas = rng.uniform(0, TWO_PI, size=(4, 4))
    amp = amplitude(ComplexField(np.exp(1j * thetas)))
    assert np.allclose(amp.data, 1.0)


def test_phase_conventions():
    f = ComplexField([[1j, -1 + 0j], [1 - 1j, 0j]])
    ph = phase(f)
    assert ph.data[0, 0] == pytest.approx(np.pi / 2)
    assert ph.data[0, 1] == pytest.approx(np.pi)
    assert ph.data[1, 0] == pytest.approx(7 * np.pi / 4)
    assert ph.data[1, 1] == 0.0  # zero-amplitude pixel


def test_phase_always_in_range(rng):
    f = random_field(rng, (12, 9))
    ph = phase(f)
    assert np.all(ph.data >= 0.0)
    assert np.all(ph.data < TWO_PI)


def test_combine_basic():
    amp = RealImage([[1.0, 0.0], [2.0, 0.0]])
    ph = PhaseMap([[np.pi, 1.0], [0.0, 5.0]])
    f = combine(amp, ph)
    assert f.data[0, 0] == pytest.approx(-1.0 + 0j)
    assert f.data[0, 1] == 0.0  # zero amplitude wins regardless of phase
    assert f.data[1, 1] == 0.0


def test_combine_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        combine(RealImage(np.ones((2, 3))), PhaseMap(np.zeros((3, 2))))


def test_combine_round_trip_nowhere_zero(rng):
    f = random_field(rng, (8, 8), min_amp=0.5)
    back = combine(amplitude(f), phase(f))
    assert rel_l2(back.data, f.data) < 1e-12


# ---------------------------------------------------------------------------
# centering view


def test_center_uncenter_round_trip(rng):
    arr = rng.normal(size=(5, 8))
    assert np.array_equal(uncenter_dc(center_dc(arr)), arr)


def test_center_dc_moves_origin_to_middle():
    arr = np.zeros((4, 6))
    arr[0, 0] = 1.0
    shifted = center_dc(arr)
    assert shifted[2, 3] == 1.0
