"""Two-sample detectors and the statistics around model selection.

The detector suite trains classifiers to tell real windows from simulated
ones; test-set ROC-AUC near 0.5 means the simulation is indistinguishable.
Samples are flattened sliding windows so the same classifiers probe both
row-level marginals (window length 1) and short temporal structure (longer
windows).  Detector features are standardized with train-split statistics
before fitting, which keeps the C and gamma grids scale-free across
datasets.

Also here: Gaussian-mixture-kernel MMD, rank-based ROC-AUC, min-max
candidate selection, the AUC equivalence permutation test used by the
sparsity penalty, an augmented Dickey-Fuller stationarity check with an
embedded 5% critical-value table, and discovery-efficacy scoring.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
import scipy.spatial.distance
import scipy.stats
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import LogisticRegression
from sklearn.svm import SVC

from .discovery import CDConfig, discover
from .errors import ConvergenceError, DataSizeError, DegenerateInputError, NumericInstabilityError
from .graphs import edge_auc

SVC_C_GRID = (1.0, 0.75, 0.5, 0.25)
SVC_KERNELS = ("linear", "poly", "rbf")
SVC_GAMMAS = ("auto", "scale")
DEFAULT_WINDOW_LENGTHS = (1, 10)


@dataclass(frozen=True)
class DetectorConfig:
    """One classifier configuration of the detector grid.

    c, kernel, degree, and gamma only apply to the svc family; gamma "auto"
    is 1/d and "scale" is 1/(d * var), matching the underlying library.
    """

    family: str = "logistic-regression"
    c: float = 1.0
    kernel: str = "rbf"
    degree: int = 3
    gamma: str = "scale"
    window_length: int = 1
    train_fraction: float = 0.75
    seed: int | None = None

    def __post_init__(self):
        if self.family not in ("logistic-regression", "svc"):
            raise ValueError(f"bad detector family {self.family!r}")
        if self.c <= 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if self.kernel not in SVC_KERNELS:
            raise ValueError(f"kernel must be one of {SVC_KERNELS}, got {self.kernel!r}")
        if self.gamma not in SVC_GAMMAS:
            raise ValueError(f"gamma must be one of {SVC_GAMMAS}, got {self.gamma!r}")
        if self.window_length < 1:
            raise ValueError(f"window_length must be >= 1, got {self.window_length}")
        if not 0 < self.train_fraction < 1:
            raise ValueError(f"train_fraction must be in (0, 1), got {self.train_fraction}")

    def label(self) -> str:
        if self.family == "logistic-regression":
            return f"logistic:w={self.window_length}"
        return (
            f"svc:C={self.c}:kernel={self.kernel}:gamma={self.gamma}"
            f":w={self.window_length}"
        )

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "c": self.c,
            "kernel": self.kernel,
            "degree": self.degree,
            "gamma": self.gamma,
            "window_length": self.window_length,
            "train_fraction": self.train_fraction,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "DetectorConfig":
        unknown = obj.keys() - cls.__dataclass_fields__.keys()
        if unknown:
            raise ValueError(f"unknown detector config keys: {sorted(unknown)}")
        return cls(**obj)


def default_detector_space(window_lengths=DEFAULT_WINDOW_LENGTHS) -> tuple[DetectorConfig, ...]:
    """Logistic regression plus the full SVC grid, repeated per window length."""
    out = []
    for w in window_lengths:
        out.append(DetectorConfig(family="logistic-regression", window_length=w))
        for c in SVC_C_GRID:
            for kernel in SVC_KERNELS:
                for gamma in SVC_GAMMAS:
                    out.append(
                        DetectorConfig(
                            family="svc",
                            c=c,
                            kernel=kernel,
                            gamma=gamma,
                            window_length=w,
                        )
                    )
    return tuple(out)


@dataclass(frozen=True)
class DetectionResult:
    """Test AUC plus the per-sample material the equivalence test needs."""

    auc: float
    test_labels: np.ndarray
    test_probs: np.ndarray
    config: DetectorConfig

    def __post_init__(self):
        labels = np.array(self.test_labels, dtype=int)
        probs = np.array(self.test_probs, dtype=float)
        if labels.shape != probs.shape:
            raise ValueError("labels and probs must have equal length")
        if len(set(labels.tolist())) != 2:
            raise ValueError("test labels must contain both classes")
        labels.flags.writeable = False
        probs.flags.writeable = False
        object.__setattr__(self, "test_labels", labels)
        object.__setattr__(self, "test_probs", probs)


@dataclass(frozen=True)
class MMDConfig:
    """Kernel mixture settings; the base bandwidth is the median heuristic."""

    multipliers: tuple[float, ...] = (0.01, 0.1, 1.0, 10.0, 100.0)

    def __post_init__(self):
        object.__setattr__(self, "multipliers", tuple(self.multipliers))
        if not self.multipliers or any(m <= 0 for m in self.multipliers):
            raise ValueError("multipliers must be positive and non-empty")


@dataclass(frozen=True)
class MMDResult:
    """Clamped estimate plus the raw (possibly negative) unbiased value."""

    value: float
    raw: float
    bandwidth: float


def mmd_gaussian(x, y, cfg: MMDConfig | None = None, unbiased: bool = True) -> MMDResult:
    """Squared maximum mean discrepancy under a Gaussian kernel mixture.

    The kernel is sum_m exp(-dist^2 / (2 (m * sigma0)^2)) with sigma0 the
    median pairwise distance of the pooled sample.  The unbiased estimator
    excludes diagonal terms and can dip below zero; value clamps at 0 while
    raw keeps the signed estimate.  The biased V-statistic form (unbiased =
    False) is exactly 0 for identical samples.
    """
    if cfg is None:
        cfg = MMDConfig()
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"column counts differ: {x.shape[1]} vs {y.shape[1]}")
    if x.shape[0] < 2 or y.shape[0] < 2:
        raise DataSizeError("need at least 2 rows per sample")

    pooled = np.vstack([x, y])
    sigma0 = float(np.median(scipy.spatial.distance.pdist(pooled)))
    if sigma0 == 0.0:
        raise DegenerateInputError("all pooled points identical; zero median distance")

    dxx = scipy.spatial.distance.cdist(x, x, "sqeuclidean")
    dyy = scipy.spatial.distance.cdist(y, y, "sqeuclidean")
    dxy = scipy.spatial.distance.cdist(x, y, "sqeuclidean")

    def kernel(d):
        total = np.zeros_like(d)
        for m in cfg.multipliers:
            total += np.exp(-d / (2.0 * (m * sigma0) ** 2))
        return total

    kxx, kyy, kxy = kernel(dxx), kernel(dyy), kernel(dxy)
    m, n = x.shape[0], y.shape[0]
    if unbiased:
        term_x = (kxx.sum() - np.trace(kxx)) / (m * (m - 1))
        term_y = (kyy.sum() - np.trace(kyy)) / (n * (n - 1))
        raw = float(term_x + term_y - 2.0 * kxy.mean())
        return MMDResult(max(raw, 0.0), raw, sigma0)
    raw = float(kxx.mean() + kyy.mean() - 2.0 * kxy.mean())
    return MMDResult(raw, raw, sigma0)


def roc_auc(labels, scores) -> float:
    """Mann-Whitney AUC by rank statistics: P(s+ > s-) + 0.5 P(s+ = s-)."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=float)
    if labels.shape != scores.shape or labels.ndim != 1:
        raise ValueError("labels and scores must be equal-length vectors")
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be binary 0/1")
    n_pos = int((labels == 1).sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateInputError("AUC undefined with a single class")
    ranks = scipy.stats.rankdata(scores)
    pos_rank_sum = float(ranks[labels == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


@dataclass(frozen=True)
class C2STSplit:
    """Stratified train/test split of the merged real-vs-simulated table."""

    train_features: np.ndarray
    train_labels: np.ndarray
    test_features: np.ndarray
    test_labels: np.ndarray


def _windows(data: np.ndarray, w: int) -> np.ndarray:
    if w == 1:
        return data.copy()
    view = np.lib.stride_tricks.sliding_window_view(data, w, axis=0)
    # view[t, i, s] = data[t + s, i]; reorder so each row concatenates rows t..t+w-1
    return view.transpose(0, 2, 1).reshape(data.shape[0] - w + 1, -1)


def build_c2st_dataset(real, sim, cfg: DetectorConfig, rng) -> C2STSplit:
    """Windowed two-sample classification dataset with a stratified split.

    Label 1 marks real windows, 0 simulated ones.  Within each class a
    random train_fraction share (rounded) goes to train.  Block order in
    both splits is real first, then simulated, so the test label pattern is
    identical across candidates whose window counts agree; the equivalence
    test relies on that alignment.
    """
    real = np.asarray(real, dtype=float)
    sim = np.asarray(sim, dtype=float)
    if real.ndim != 2 or sim.ndim != 2:
        raise ValueError("real and sim must be 2-d")
    if real.shape[1] != sim.shape[1]:
        raise ValueError(f"column counts differ: {real.shape[1]} vs {sim.shape[1]}")
    w = cfg.window_length
    if real.shape[0] < w or sim.shape[0] < w:
        raise DataSizeError(f"need at least window_length={w} rows in each input")

    parts = {"train": [], "test": []}
    for source, label in ((real, 1), (sim, 0)):
        features = _windows(source, w)
        count = features.shape[0]
        n_train = int(round(cfg.train_fraction * count))
        if n_train < 1 or n_train >= count:
            raise DataSizeError(
                f"split leaves an empty stratum: {n_train} of {count} windows in train"
            )
        order = rng.permutation(count)
        parts["train"].append((features[np.sort(order[:n_train])], label))
        parts["test"].append((features[np.sort(order[n_train:])], label))

    def assemble(pairs):
        feats = np.vstack([f for f, _ in pairs])
        labels = np.concatenate([np.full(f.shape[0], lab, dtype=int) for f, lab in pairs])
        return feats, labels

    train_x, train_y = assemble(parts["train"])
    test_x, test_y = assemble(parts["test"])
    return C2STSplit(train_x, train_y, test_x, test_y)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def train_and_score_detector(split: C2STSplit, cfg: DetectorConfig, rng=None) -> DetectionResult:
    """Fit the configured classifier and score it on the test part.

    Probabilities are a logistic squash of the decision value for both
    families; AUC only needs a monotone per-sample ordering.  rng is
    accepted for interface uniformity; both solvers are deterministic.
    Raises ConvergenceError (carrying the scored result) if the solver hit
    its iteration cap.
    """
    mean = split.train_features.mean(axis=0)
    sd = split.train_features.std(axis=0)
    sd = np.where(sd == 0, 1.0, sd)
    train = (split.train_features - mean) / sd
    test = (split.test_features - mean) / sd

    if cfg.family == "logistic-regression":
        clf = LogisticRegression(C=1.0, tol=1e-6, max_iter=1000)
    else:
        clf = SVC(C=cfg.c, kernel=cfg.kernel, degree=cfg.degree, gamma=cfg.gamma,
                  max_iter=200_000)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        clf.fit(train, split.train_labels)
    probs = _sigmoid(clf.decision_function(test))
    result = DetectionResult(
        roc_auc(split.test_labels, probs), split.test_labels, probs, cfg
    )
    if any(issubclass(w.category, ConvergenceWarning) for w in caught):
        raise ConvergenceError(
            f"detector {cfg.label()} hit its iteration cap", result=result
        )
    return result


def minmax_select(score_table) -> tuple[int, float]:
    """Row with the smallest worst-case column value; ties to the lowest index."""
    table = np.asarray(score_table, dtype=float)
    if table.ndim != 2 or table.size == 0:
        raise ValueError("score table must be a non-empty 2-d matrix")
    worst = table.max(axis=1)
    idx = int(np.argmin(worst))
    return idx, float(worst[idx])


def equivalence_p_value(y_test, probs_o, probs_i, auc_o, auc_i, n_permutations, rng) -> float:
    """Permutation p-value for |AUC_o - AUC_i| under prob-vector swaps.

    Each permutation swaps the two prediction vectors' entries at a random
    index subset (each index with probability 1/2) and recomputes both AUCs.
    The counter uses strict t_p > t_obs, except that an exact tie at
    t_obs = 0 counts, so identical classifiers get p = 1 instead of 0.
    """
    y = np.asarray(y_test)
    po = np.asarray(probs_o, dtype=float)
    pi = np.asarray(probs_i, dtype=float)
    if not (y.shape == po.shape == pi.shape):
        raise ValueError("y_test, probs_o, probs_i must have equal length")
    if n_permutations < 100:
        raise ValueError(f"n_permutations must be >= 100, got {n_permutations}")

    t_obs = abs(float(auc_o) - float(auc_i))
    count = 0
    for _ in range(n_permutations):
        swap = rng.random(len(y)) < 0.5
        perm_o = np.where(swap, pi, po)
        perm_i = np.where(swap, po, pi)
        t_p = abs(roc_auc(y, perm_o) - roc_auc(y, perm_i))
        if t_p > t_obs or (t_obs == 0.0 and t_p >= t_obs):
            count += 1
    return count / n_permutations


def auc_equivalence_test(
    y_test, probs_o, probs_i, auc_o, auc_i, alpha, n_permutations, rng
) -> bool:
    """True iff the two classifiers' AUC gap is statistically insignificant."""
    p = equivalence_p_value(y_test, probs_o, probs_i, auc_o, auc_i, n_permutations, rng)
    return p >= alpha


# classical 5% critical values for the constant-only Dickey-Fuller t
# distribution, keyed by regression sample size; interpolated linearly in 1/n
# so the asymptotic row sits at 1/n = 0.
_ADF_INV_N = (0.0, 1 / 500, 1 / 250, 1 / 100, 1 / 50, 1 / 25)
_ADF_CRIT = (-2.86, -2.87, -2.88, -2.89, -2.93, -3.00)


def adf_test(series, regression_lags: int = 1) -> tuple[float, bool]:
    """Augmented Dickey-Fuller unit-root test, constant-only regression.

    Regresses the first difference on the lagged level, regression_lags
    lagged differences, and an intercept; the t statistic of the level
    coefficient is compared against the embedded 5% table.  Returns
    (t_statistic, stationary); stationary means the unit root was rejected.
    """
    y = np.asarray(series, dtype=float)
    if y.ndim != 1:
        raise ValueError(f"series must be 1-d, got shape {y.shape}")
    if regression_lags < 0:
        raise ValueError(f"regression_lags must be >= 0, got {regression_lags}")
    if len(y) <= regression_lags + 10:
        raise DataSizeError(
            f"need more than regression_lags + 10 = {regression_lags + 10} points, got {len(y)}"
        )
    if not np.isfinite(y).all():
        raise ValueError("series contains non-finite values")

    dy = np.diff(y)
    p = regression_lags
    dep = dy[p:]
    n = len(dep)
    cols = [y[p:-1]]
    cols.extend(dy[p - k : -k] for k in range(1, p + 1))
    cols.append(np.ones(n))
    design = np.column_stack(cols)

    beta, _, rank, _ = np.linalg.lstsq(design, dep, rcond=None)
    if rank < design.shape[1]:
        raise NumericInstabilityError("singular Dickey-Fuller regression")
    resid = dep - design @ beta
    dof = n - design.shape[1]
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(design.T @ design)
    t_stat = float(beta[0] / np.sqrt(cov[0, 0]))
    critical = float(np.interp(1.0 / n, _ADF_INV_N, _ADF_CRIT))
    return t_stat, t_stat < critical


def default_efficacy_config() -> CDConfig:
    """Discovery settings used for efficacy scoring unless overridden."""
    return CDConfig(algorithm="dynotears", max_lag=1, lambda_w=0.1, lambda_a=0.1)


def cd_efficacy(original, simulated, cd_cfg: CDConfig | None = None) -> float:
    """How well discovery on simulated data ranks the original data's graph.

    Runs the configured discoverer on both datasets, treats the
    original-data graph as labels and the simulated-data scores as
    predictions, and returns the edge AUC.
    """
    original = np.asarray(original, dtype=float)
    simulated = np.asarray(simulated, dtype=float)
    if original.ndim != 2 or simulated.ndim != 2:
        raise ValueError("datasets must be 2-d")
    if original.shape[1] != simulated.shape[1]:
        raise ValueError(
            f"column counts differ: {original.shape[1]} vs {simulated.shape[1]}"
        )
    if cd_cfg is None:
        cd_cfg = default_efficacy_config()
    truth = discover(original, cd_cfg)
    n_edges = truth.graph.n_edges()
    n_cells = truth.graph.adj.size
    if n_edges == 0 or n_edges == n_cells:
        raise DegenerateInputError(
            "discovery on the original data produced a degenerate graph "
            f"({n_edges} of {n_cells} cells set); edge AUC is undefined"
        )
    predicted = discover(simulated, cd_cfg)
    return edge_auc(predicted.scores, truth.graph)
