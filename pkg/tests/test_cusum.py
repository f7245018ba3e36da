import math

import numpy as np
import pytest

from spreaddetect.cusum import cusum_transform


def test_constant_row_maps_to_zeros():
    x = np.full((3, 10), 4.2)
    assert np.allclose(cusum_transform(x), 0.0, atol=1e-12)


def test_two_point_hand_value():
    t = cusum_transform(np.array([[0.0, 1.0]]))
    assert t.shape == (1, 1)
    assert t[0, 0] == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-15)


def test_four_point_hand_value():
    t = cusum_transform(np.array([[0.0, 0.0, 1.0, 1.0]]))
    # split point 2: sqrt(2*2/4) * (1 - 0) = 1
    assert t[0, 1] == pytest.approx(1.0, abs=1e-15)
    # symmetric splits 1 and 3: sqrt(3/4) * 2/3
    assert t[0, 0] == pytest.approx(math.sqrt(0.75) * 2.0 / 3.0, abs=1e-15)
    assert t[0, 2] == pytest.approx(t[0, 0], abs=1e-15)


def test_matches_direct_means_definition():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((4, 17))
    t = cusum_transform(x)
    n = x.shape[1]
    for split in (1, 2, 8, 16):
        direct = math.sqrt(split * (n - split) / n) * (
            x[:, split:].mean(axis=1) - x[:, :split].mean(axis=1)
        )
        assert np.allclose(t[:, split - 1], direct, atol=1e-12)


def test_validation():
    with pytest.raises(ValueError, match="2 time points"):
        cusum_transform(np.zeros((2, 1)))
    with pytest.raises(ValueError, match="2-D"):
        cusum_transform(np.zeros(5))
    with pytest.raises(ValueError, match="finite"):
        cusum_transform(np.array([[0.0, np.nan, 1.0]]))


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_shift_invariance_per_row(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((5, 30))
    shifted = x + rng.uniform(-100, 100, size=(5, 1))
    t0, t1 = cusum_transform(x), cusum_transform(shifted)
    scale = np.abs(t0).max()
    assert np.allclose(t0, t1, atol=1e-12 * max(scale, 1.0))


@pytest.mark.parametrize("seed", [10, 11, 12])
def test_scale_equivariance_per_row(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((4, 25))
    s = rng.uniform(-5, 5, size=(4, 1))
    assert np.allclose(cusum_transform(x * s), s * cusum_transform(x), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("seed", [20, 21, 22])
def test_linearity(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((3, 20))
    y = rng.standard_normal((3, 20))
    assert np.allclose(
        cusum_transform(x + y), cusum_transform(x) + cusum_transform(y), atol=1e-10
    )


@pytest.mark.parametrize("z", [3, 10, 25, 37])
def test_noiseless_step_peaks_exactly_at_change(z):
    n = 40
    row = np.where(np.arange(1, n + 1) > z, 1.7, 0.0)
    t = cusum_transform(row[None, :])
    assert int(np.argmax(np.abs(t[0]))) + 1 == z
