"""Exogenous-noise estimation from model residuals.

Fitting is deliberately plain: the normal fit keeps the sample mean and the
n-1 standard deviation, the uniform fit keeps the observed min/max, and the
empirical option stores the residual vector verbatim and resamples it with
replacement.  Fitted objects only sample; density evaluation is out of scope.
Richer estimators (normalizing flows and friends) can plug in by honouring
the fit_noise / sample_noise contract.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataSizeError, DegenerateInputError

KINDS = ("fit-normal", "fit-uniform", "empirical")

MIN_RESIDUALS = 10


@dataclass(frozen=True)
class NoiseConfig:
    """Choice of noise estimator for the third fitting phase."""

    kind: str = "empirical"
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "seed": self.seed}

    @classmethod
    def from_dict(cls, obj: dict) -> "NoiseConfig":
        unknown = obj.keys() - {"kind", "seed"}
        if unknown:
            raise ValueError(f"unknown noise config keys: {sorted(unknown)}")
        return cls(**obj)


@dataclass(frozen=True)
class FittedNoise:
    """Sampling-only representation of a fitted noise law.

    mean/std apply to fit-normal, low/high to fit-uniform, values to
    empirical; the unused fields stay None.
    """

    kind: str
    mean: float | None = None
    std: float | None = None
    low: float | None = None
    high: float | None = None
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "fit-normal":
            if self.std is None or self.std <= 0:
                raise ValueError(f"fit-normal requires std > 0, got {self.std}")
        elif self.kind == "fit-uniform":
            if self.low is None or self.high is None or self.low > self.high:
                raise ValueError(f"fit-uniform requires low <= high, got ({self.low}, {self.high})")
        elif self.kind == "empirical":
            if self.values is None or len(self.values) == 0:
                raise ValueError("empirical requires a non-empty residual vector")
            values = np.array(self.values, dtype=float)
            values.flags.writeable = False
            object.__setattr__(self, "values", values)
        else:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return sample_noise(self, n, rng)


def fit_noise(residuals, cfg: NoiseConfig) -> FittedNoise:
    """Fit the configured noise law to a residual vector.

    Raises DataSizeError below MIN_RESIDUALS points and DegenerateInputError
    for zero-variance residuals under fit-normal.
    """
    residuals = np.asarray(residuals, dtype=float)
    if residuals.ndim != 1:
        raise ValueError(f"residuals must be 1-d, got shape {residuals.shape}")
    if len(residuals) < MIN_RESIDUALS:
        raise DataSizeError(
            f"need at least {MIN_RESIDUALS} residuals, got {len(residuals)}"
        )
    if not np.isfinite(residuals).all():
        raise ValueError("residuals contain non-finite values")

    if cfg.kind == "fit-normal":
        std = float(residuals.std(ddof=1))
        if std == 0.0:
            raise DegenerateInputError("zero-variance residuals cannot fit a normal")
        return FittedNoise("fit-normal", mean=float(residuals.mean()), std=std)
    if cfg.kind == "fit-uniform":
        return FittedNoise(
            "fit-uniform", low=float(residuals.min()), high=float(residuals.max())
        )
    return FittedNoise("empirical", values=residuals)


def sample_noise(f: FittedNoise, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n iid values from the fitted law; empirical resamples with replacement."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if f.kind == "fit-normal":
        return rng.normal(f.mean, f.std, size=n)
    if f.kind == "fit-uniform":
        return rng.uniform(f.low, f.high, size=n)
    return rng.choice(f.values, size=n, replace=True)
