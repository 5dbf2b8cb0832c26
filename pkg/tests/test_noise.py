"""Noise fitting and sampling."""

import numpy as np
import pytest

from causim import (
    DataSizeError,
    DegenerateInputError,
    FittedNoise,
    NoiseConfig,
    fit_noise,
    sample_noise,
)


def test_config_rejects_unknown_kind():
    with pytest.raises(ValueError):
        NoiseConfig(kind="gamma")


def test_config_round_trip():
    cfg = NoiseConfig(kind="fit-uniform", seed=3)
    assert NoiseConfig.from_dict(cfg.to_dict()) == cfg


def test_config_from_dict_rejects_unknown_keys():
    with pytest.raises(ValueError):
        NoiseConfig.from_dict({"kind": "empirical", "scale": 2.0})


def test_fit_normal_hand_computed():
    # mean 0, sample std (ddof=1) of [-1, 0, 1] is 1
    residuals = np.array([-1.0, 0.0, 1.0] * 4)
    fitted = fit_noise(residuals, NoiseConfig(kind="fit-normal"))
    assert fitted.mean == pytest.approx(0.0)
    assert fitted.std == pytest.approx(np.std(residuals, ddof=1))


def test_fit_uniform_is_min_max():
    residuals = np.array([2.0, 5.0, 3.0, 4.0, 2.5, 3.5, 4.5, 2.2, 4.8, 3.3])
    fitted = fit_noise(residuals, NoiseConfig(kind="fit-uniform"))
    assert fitted.low == 2.0
    assert fitted.high == 5.0


def test_fit_empirical_stores_verbatim():
    residuals = np.arange(10.0)
    fitted = fit_noise(residuals, NoiseConfig(kind="empirical"))
    np.testing.assert_array_equal(fitted.values, residuals)
    assert not fitted.values.flags.writeable


def test_fit_rejects_short_and_nonfinite():
    with pytest.raises(DataSizeError):
        fit_noise(np.ones(9), NoiseConfig(kind="fit-uniform"))
    with pytest.raises(ValueError):
        fit_noise(np.array([1.0, np.nan] + [0.0] * 8), NoiseConfig(kind="empirical"))


def test_fit_normal_zero_variance_degenerate():
    with pytest.raises(DegenerateInputError):
        fit_noise(np.zeros(20), NoiseConfig(kind="fit-normal"))


def test_fit_normal_monte_carlo_consistency():
    rng = np.random.default_rng(42)
    draws = rng.normal(3.0, 2.0, size=10_000)
    fitted = fit_noise(draws, NoiseConfig(kind="fit-normal"))
    assert abs(fitted.mean - 3.0) < 0.1
    assert abs(fitted.std - 2.0) < 0.1


def test_sample_normal_law_of_large_numbers():
    fitted = FittedNoise(kind="fit-normal", mean=0.0, std=1.0)
    draws = sample_noise(fitted, 100_000, np.random.default_rng(1))
    assert abs(draws.mean()) < 0.02
    assert abs(draws.std() - 1.0) < 0.02


def test_sample_uniform_stays_in_range():
    fitted = FittedNoise(kind="fit-uniform", low=-2.0, high=3.0)
    draws = sample_noise(fitted, 5000, np.random.default_rng(2))
    assert draws.min() >= -2.0 and draws.max() <= 3.0
    assert abs(draws.mean() - 0.5) < 0.1


def test_sample_empirical_single_value():
    fitted = FittedNoise(kind="empirical", values=np.array([1.5]))
    draws = sample_noise(fitted, 50, np.random.default_rng(3))
    assert (draws == 1.5).all()


def test_sample_empirical_membership_and_moments():
    rng = np.random.default_rng(4)
    source = rng.normal(size=200)
    fitted = FittedNoise(kind="empirical", values=source)
    draws = sample_noise(fitted, 100_000, np.random.default_rng(5))
    assert set(np.unique(draws)) <= set(source.tolist())
    # with-replacement resampling preserves moments asymptotically
    assert abs(draws.mean() - source.mean()) < abs(source.mean()) * 0.02 + 0.01
    assert abs(draws.std() - source.std()) < source.std() * 0.02


def test_round_trip_normal_shrinks_with_n():
    base = FittedNoise(kind="fit-normal", mean=1.0, std=0.5)
    errors = []
    for n in (100, 10_000):
        draws = sample_noise(base, n, np.random.default_rng(6))
        refit = fit_noise(draws, NoiseConfig(kind="fit-normal"))
        errors.append(abs(refit.mean - 1.0) + abs(refit.std - 0.5))
    assert errors[1] < errors[0]


def test_sampling_deterministic_under_seed():
    fitted = FittedNoise(kind="empirical", values=np.arange(30.0))
    a = sample_noise(fitted, 100, np.random.default_rng(7))
    b = sample_noise(fitted, 100, np.random.default_rng(7))
    np.testing.assert_array_equal(a, b)


def test_fitted_noise_validation():
    with pytest.raises(ValueError):
        FittedNoise(kind="fit-normal", mean=0.0, std=0.0)
    with pytest.raises(ValueError):
        FittedNoise(kind="fit-uniform", low=2.0, high=1.0)
    with pytest.raises(ValueError):
        FittedNoise(kind="empirical", values=np.array([]))


def test_sample_noise_requires_positive_n():
    fitted = FittedNoise(kind="fit-normal", mean=0.0, std=1.0)
    with pytest.raises(ValueError):
        sample_noise(fitted, 0, np.random.default_rng(0))
