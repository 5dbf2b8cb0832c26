"""Functional-dependency fitting: regress each variable on its lagged parents.

Two fitters are provided.  The random forest is the workhorse; the mean
baseline serves variables without parents, whose best stationary predictor is
their own mean.  Residuals are computed in-sample by default because the
noise phase fits on the same rows used here; out-of-bag residuals sit behind
a flag for callers worried about in-sample optimism.  Other regressors can
plug in by matching the fit/predict/residual contract.

Design-matrix alignment uses the global max_lag, not the largest parent lag,
so rows line up across all variables of a dataset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.ensemble import RandomForestRegressor

from .errors import DataSizeError

KINDS = ("random-forest", "mean-baseline")


@dataclass(frozen=True)
class ForecasterConfig:
    """Forest hyperparameters, defaults matching the reference setup.

    n_trees defaults to 1000; grid-search presets typically pass 100 to keep
    candidate fitting fast.  features_per_split only supports "all" (every
    feature considered at every split).
    """

    kind: str = "random-forest"
    n_trees: int = 1000
    max_depth: int | None = None
    features_per_split: str = "all"
    bootstrap: bool = True
    min_samples_leaf: int = 1
    oob_residuals: bool = False
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.min_samples_leaf < 1:
            raise ValueError(f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}")
        if self.features_per_split != "all":
            raise ValueError('features_per_split only supports "all"')
        if self.oob_residuals and not self.bootstrap:
            raise ValueError("oob_residuals requires bootstrap resampling")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "features_per_split": self.features_per_split,
            "bootstrap": self.bootstrap,
            "min_samples_leaf": self.min_samples_leaf,
            "oob_residuals": self.oob_residuals,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ForecasterConfig":
        unknown = obj.keys() - cls.__dataclass_fields__.keys()
        if unknown:
            raise ValueError(f"unknown forecaster config keys: {sorted(unknown)}")
        return cls(**obj)


@dataclass(frozen=True)
class FittedForecaster:
    """A fitted predictor plus the residuals it left on its training rows.

    parents is the ordered (variable, lag) spec the prediction input must
    follow; model is a RandomForestRegressor for the forest kind and the
    stored float mean for the baseline.
    """

    kind: str
    parents: tuple[tuple[int, int], ...]
    model: object
    residuals: np.ndarray

    def __post_init__(self):
        residuals = np.array(self.residuals, dtype=float)
        residuals.flags.writeable = False
        object.__setattr__(self, "residuals", residuals)
        object.__setattr__(self, "parents", tuple((int(i), int(t)) for i, t in self.parents))


def build_lagged_design(data, target: int, parents, max_lag: int):
    """Design matrix of lagged parent values against the aligned target.

    Row r corresponds to timestep t = max_lag + r; column k holds
    data[t - tau_k, i_k] for the k-th parent (i_k, tau_k); the target entry
    is data[t, target].  Returns (features, targets) with rows - max_lag rows.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise ValueError(f"data must be 2-d, got shape {data.shape}")
    parents = list(parents)
    if not parents:
        raise ValueError("empty parent list; use the mean-baseline instead")
    rows = data.shape[0]
    if rows <= max_lag:
        raise DataSizeError(f"need more than max_lag={max_lag} rows, got {rows}")
    for i, tau in parents:
        if not 1 <= tau <= max_lag:
            raise ValueError(f"parent lag {tau} outside [1, {max_lag}]")
        if not 0 <= i < data.shape[1]:
            raise ValueError(f"parent index {i} outside [0, {data.shape[1]})")
    features = np.empty((rows - max_lag, len(parents)))
    for k, (i, tau) in enumerate(parents):
        features[:, k] = data[max_lag - tau : rows - tau, i]
    targets = data[max_lag:, target].copy()
    return features, targets


def fit_forecaster(data, target: int, parents, cfg: ForecasterConfig, rng=None) -> FittedForecaster:
    """Fit one variable's predictor on its lagged parents.

    An empty parent list demands the mean-baseline kind; the baseline in turn
    ignores any parents it is given and predicts the plain column mean, with
    residuals computed on the whole column (no lag alignment).
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    data = np.asarray(data, dtype=float)
    parents = list(parents)
    if not parents and cfg.kind != "mean-baseline":
        raise ValueError("parentless variables require the mean-baseline kind")

    # a split needs 2*min_samples_leaf rows, but a leaf-sized dataset still
    # fits a legitimate stump, so only demand enough rows for one leaf
    min_rows = max(2, cfg.min_samples_leaf)

    if cfg.kind == "mean-baseline":
        column = data[:, target]
        if len(column) < min_rows:
            raise DataSizeError(f"need at least {min_rows} rows, got {len(column)}")
        mean = float(column.mean())
        # keep the declared parent spec so callers can feed parent values
        # uniformly; the baseline accepts and discards them
        return FittedForecaster("mean-baseline", tuple(parents), mean, column - mean)

    max_lag = max(tau for _, tau in parents)
    features, targets = build_lagged_design(data, target, parents, max_lag)
    if len(targets) < min_rows:
        raise DataSizeError(
            f"need at least {min_rows} usable rows, got {len(targets)}"
        )
    model = RandomForestRegressor(
        n_estimators=cfg.n_trees,
        max_depth=cfg.max_depth,
        max_features=1.0,  # all features at every split
        bootstrap=cfg.bootstrap,
        min_samples_leaf=cfg.min_samples_leaf,
        random_state=int(rng.integers(2**31 - 1)),
        n_jobs=1,
    )
    model.fit(features, targets)
    if cfg.oob_residuals:
        residuals = targets - _oob_predictions(model, features)
    else:
        residuals = targets - model.predict(features)
    return FittedForecaster("random-forest", tuple(parents), model, residuals)


def _oob_predictions(model, features) -> np.ndarray:
    """Average per-row predictions of the trees that did not train on the row.

    Rows sampled by every tree fall back to the in-sample forest prediction.
    """
    n = features.shape[0]
    votes = np.zeros(n)
    counts = np.zeros(n)
    for tree, sampled in zip(model.estimators_, model.estimators_samples_):
        mask = np.ones(n, dtype=bool)
        mask[sampled] = False
        if mask.any():
            votes[mask] += tree.predict(features[mask])
            counts[mask] += 1
    out = model.predict(features)
    covered = counts > 0
    out[covered] = votes[covered] / counts[covered]
    return out


def predict(f: FittedForecaster, parent_values) -> float:
    """Point prediction for one timestep's parent values."""
    values = np.asarray(parent_values, dtype=float)
    if values.shape != (len(f.parents),):
        raise ValueError(
            f"expected {len(f.parents)} parent values, got shape {values.shape}"
        )
    if f.kind == "mean-baseline":
        return float(f.model)
    return float(f.model.predict(values.reshape(1, -1))[0])
