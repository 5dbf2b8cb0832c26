"""Search orchestration: fit, simulate, and score a grid of candidate models.

A candidate is one (discovery, forecaster, noise) configuration triple.
Each candidate is fitted on the full input series, simulated forward, and
scored by every detector against one shared block of real rows.  The
candidate whose worst detector AUC is smallest wins; with the sparsity
penalty enabled, candidates statistically tied with the winner form an
equivalence set and the sparsest graph among them is selected instead.

Determinism contract: one master seed drives everything through named
SeedSequence spawn keys: (0,) the real-data block draw, (1, k, 0) candidate
k's fitting, (1, k, 1) its simulation, (1, k, 2, d) its detector d split,
(2, k) its equivalence test against the winner.  Streams depend only on
grid indices, so results are reproducible across thread counts and
execution order, and adding a candidate never perturbs the others.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .discovery import CDConfig, CDResult, discover
from .errors import CausimError, ConvergenceError, PhaseError
from .evaluation import (
    DetectionResult,
    DetectorConfig,
    auc_equivalence_test,
    build_c2st_dataset,
    default_detector_space,
    minmax_select,
    train_and_score_detector,
)
from .evaluation import adf_test
from .forecasting import ForecasterConfig, fit_forecaster
from .graphs import LaggedGraph
from .noise import NoiseConfig, fit_noise
from .scm import FunctionalDependency, TemporalSCM, ancestral_sample


@dataclass(frozen=True)
class SearchConfig:
    """Search space plus the shared sampling and testing parameters."""

    cd_space: tuple[CDConfig, ...]
    forecaster_space: tuple[ForecasterConfig, ...]
    noise_space: tuple[NoiseConfig, ...]
    detector_space: tuple[DetectorConfig, ...]
    sample_length: int = 2000
    warmup: int = 50
    equivalence_alpha: float = 0.05
    n_permutations: int = 1000
    seed: int = 0
    sparsity_penalty: bool = True

    def __post_init__(self):
        for name in ("cd_space", "forecaster_space", "noise_space", "detector_space"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
            if not getattr(self, name):
                raise ValueError(f"{name} must be non-empty")
        if self.sample_length < 1:
            raise ValueError(f"sample_length must be positive, got {self.sample_length}")
        if self.warmup < 0:
            raise ValueError(f"warmup must be >= 0, got {self.warmup}")
        if not 0 < self.equivalence_alpha < 1:
            raise ValueError(
                f"equivalence_alpha must be in (0, 1), got {self.equivalence_alpha}"
            )
        if self.n_permutations < 100:
            raise ValueError(
                f"n_permutations must be >= 100, got {self.n_permutations}"
            )

    def grid_size(self) -> int:
        return len(self.cd_space) * len(self.forecaster_space) * len(self.noise_space)

    def to_dict(self) -> dict:
        return {
            "cd_space": [c.to_dict() for c in self.cd_space],
            "forecaster_space": [c.to_dict() for c in self.forecaster_space],
            "noise_space": [c.to_dict() for c in self.noise_space],
            "detector_space": [c.to_dict() for c in self.detector_space],
            "sample_length": self.sample_length,
            "warmup": self.warmup,
            "equivalence_alpha": self.equivalence_alpha,
            "n_permutations": self.n_permutations,
            "seed": self.seed,
            "sparsity_penalty": self.sparsity_penalty,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "SearchConfig":
        unknown = obj.keys() - cls.__dataclass_fields__.keys()
        if unknown:
            raise ValueError(f"unknown search config keys: {sorted(unknown)}")
        spaces = {}
        for name, typ in (
            ("cd_space", CDConfig),
            ("forecaster_space", ForecasterConfig),
            ("noise_space", NoiseConfig),
            ("detector_space", DetectorConfig),
        ):
            if name not in obj:
                raise ValueError(f"missing {name}")
            entries = obj[name]
            if not isinstance(entries, (list, tuple)):
                raise ValueError(f"{name} must be a list of config objects")
            spaces[name] = tuple(typ.from_dict(e) for e in entries)
        scalars = {
            k: v
            for k, v in obj.items()
            if k not in ("cd_space", "forecaster_space", "noise_space", "detector_space")
        }
        return cls(**spaces, **scalars)


def default_search_config(seed: int = 0) -> SearchConfig:
    """A small practical grid: two discoverers, two forecasters, two noise fits.

    The forecaster axis varies only the residual convention.  In-sample
    residuals understate the noise scale when the forest memorizes, while
    out-of-bag residuals overstate it by folding in estimation error; the
    two bracket the truth, and min-max selection keeps whichever simulation
    the detectors find harder to separate.
    """
    return SearchConfig(
        cd_space=(
            CDConfig(algorithm="lagged-pc", max_lag=1),
            CDConfig(algorithm="dynotears", max_lag=1),
        ),
        forecaster_space=(
            ForecasterConfig(kind="random-forest", n_trees=100),
            ForecasterConfig(kind="random-forest", n_trees=100, oob_residuals=True),
        ),
        noise_space=(NoiseConfig(kind="fit-normal"), NoiseConfig(kind="empirical")),
        detector_space=default_detector_space(),
        seed=seed,
    )


@dataclass(frozen=True)
class CandidateModel:
    """One grid cell's outcome: a fitted model and its scores, or a failure."""

    index: int
    cd_config: CDConfig
    forecaster_config: ForecasterConfig
    noise_config: NoiseConfig
    scm: TemporalSCM | None = None
    simulated: np.ndarray | None = None
    detections: tuple[DetectionResult, ...] | None = None
    aucs: tuple[float, ...] | None = None
    worst_auc: float | None = None
    failure: str | None = None

    def __post_init__(self):
        if (self.failure is None) == (self.aucs is None):
            raise ValueError("exactly one of aucs and failure must be set")
        if self.aucs is not None:
            object.__setattr__(self, "aucs", tuple(float(a) for a in self.aucs))
            if self.worst_auc != max(self.aucs):
                raise ValueError("worst_auc must equal the max of aucs")

    def edge_count(self) -> int | None:
        if self.scm is None:
            return None
        return self.scm.graph.n_edges()

    def graph(self) -> LaggedGraph | None:
        return None if self.scm is None else self.scm.graph


@dataclass(frozen=True)
class SearchReport:
    """Everything the search produced, keyed by grid index throughout."""

    candidates: tuple[CandidateModel, ...]
    detector_space: tuple[DetectorConfig, ...]
    score_table: np.ndarray
    minmax_index: int
    minmax_auc: float
    winner_detector_index: int
    equivalence_set: tuple[int, ...]
    selected_index: int
    block_offset: int
    warnings: tuple[str, ...]
    metadata: dict

    def __post_init__(self):
        table = np.array(self.score_table, dtype=float)
        table.flags.writeable = False
        object.__setattr__(self, "score_table", table)
        object.__setattr__(self, "candidates", tuple(self.candidates))
        object.__setattr__(self, "detector_space", tuple(self.detector_space))
        object.__setattr__(self, "equivalence_set", tuple(self.equivalence_set))
        object.__setattr__(self, "warnings", tuple(self.warnings))
        if table.shape != (len(self.candidates), len(self.detector_space)):
            raise ValueError(
                f"score table shape {table.shape} does not match "
                f"{len(self.candidates)} candidates x {len(self.detector_space)} detectors"
            )
        if self.selected_index not in self.equivalence_set:
            raise ValueError("selected candidate must belong to the equivalence set")
        if self.minmax_index not in self.equivalence_set:
            raise ValueError("min-max winner must belong to the equivalence set")

    def selected(self) -> CandidateModel:
        return self.candidates[self.selected_index]

    def edge_counts(self) -> tuple[int | None, ...]:
        return tuple(c.edge_count() for c in self.candidates)

    def to_dict(self) -> dict:
        def row(values):
            return [None if not np.isfinite(v) else float(v) for v in values]

        return {
            "kind": "search-report",
            "candidates": [
                {
                    "index": c.index,
                    "cd": c.cd_config.to_dict(),
                    "forecaster": c.forecaster_config.to_dict(),
                    "noise": c.noise_config.to_dict(),
                    "aucs": None if c.aucs is None else [float(a) for a in c.aucs],
                    "worst_auc": c.worst_auc,
                    "edge_count": c.edge_count(),
                    "graph": None if c.scm is None else c.scm.graph.to_dict(),
                    "failure": c.failure,
                }
                for c in self.candidates
            ],
            "detector_space": [d.to_dict() for d in self.detector_space],
            "score_table": [row(r) for r in self.score_table],
            "minmax_index": self.minmax_index,
            "minmax_auc": self.minmax_auc,
            "winner_detector_index": self.winner_detector_index,
            "winner_detector": self.detector_space[self.winner_detector_index].label(),
            "equivalence_set": list(self.equivalence_set),
            "selected_index": self.selected_index,
            "block_offset": self.block_offset,
            "warnings": list(self.warnings),
            "metadata": dict(self.metadata),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "SearchReport":
        """Rebuild a report summary from its JSON form, re-checking invariants.

        Fitted models, simulations, and per-sample detector output are not
        serialized, so the rebuilt candidates carry configs and scores only.
        """
        required = {
            "candidates",
            "detector_space",
            "score_table",
            "minmax_index",
            "minmax_auc",
            "winner_detector_index",
            "equivalence_set",
            "selected_index",
            "block_offset",
            "warnings",
            "metadata",
        }
        missing = required - obj.keys()
        if missing:
            raise ValueError(f"missing report keys: {sorted(missing)}")
        candidates = []
        for entry in obj["candidates"]:
            aucs = entry.get("aucs")
            candidates.append(
                CandidateModel(
                    index=int(entry["index"]),
                    cd_config=CDConfig.from_dict(entry["cd"]),
                    forecaster_config=ForecasterConfig.from_dict(entry["forecaster"]),
                    noise_config=NoiseConfig.from_dict(entry["noise"]),
                    aucs=None if aucs is None else tuple(aucs),
                    worst_auc=entry.get("worst_auc"),
                    failure=entry.get("failure"),
                )
            )
        table = [
            [np.nan if v is None else float(v) for v in r] for r in obj["score_table"]
        ]
        return cls(
            candidates=tuple(candidates),
            detector_space=tuple(
                DetectorConfig.from_dict(d) for d in obj["detector_space"]
            ),
            score_table=np.array(table, dtype=float).reshape(
                len(candidates), len(obj["detector_space"])
            ),
            minmax_index=int(obj["minmax_index"]),
            minmax_auc=float(obj["minmax_auc"]),
            winner_detector_index=int(obj["winner_detector_index"]),
            equivalence_set=tuple(int(i) for i in obj["equivalence_set"]),
            selected_index=int(obj["selected_index"]),
            block_offset=int(obj["block_offset"]),
            warnings=tuple(obj["warnings"]),
            metadata=dict(obj["metadata"]),
        )


def block_sample(data, length: int, rng, return_offset: bool = False):
    """One contiguous block of `length` rows at a uniformly random offset."""
    data = np.asarray(data)
    if data.ndim != 2:
        raise ValueError(f"data must be 2-d, got shape {data.shape}")
    if not 1 <= length <= data.shape[0]:
        raise ValueError(
            f"block length must be in [1, {data.shape[0]}], got {length}"
        )
    offset = int(rng.integers(0, data.shape[0] - length + 1))
    block = data[offset : offset + length].copy()
    return (block, offset) if return_offset else block


def _fit_phases(data, b_cd, b_pred, b_noise, rng) -> tuple[TemporalSCM, CDResult]:
    try:
        cd_result = discover(data, b_cd)
        if not cd_result.converged:
            raise ConvergenceError(
                "discovery optimisation did not converge", result=cd_result
            )
    except Exception as exc:
        raise PhaseError("discovery", exc) from exc

    graph = cd_result.graph
    forecasters = []
    try:
        child_rngs = rng.spawn(graph.n_vars)
        for j in range(graph.n_vars):
            parents = graph.parent_list(j)
            cfg = replace(b_pred, kind="mean-baseline") if not parents else b_pred
            forecasters.append(fit_forecaster(data, j, parents, cfg, child_rngs[j]))
    except Exception as exc:
        raise PhaseError("forecasting", exc) from exc

    try:
        noises = tuple(fit_noise(f.residuals, b_noise) for f in forecasters)
    except Exception as exc:
        raise PhaseError("noise", exc) from exc

    functions = tuple(
        FunctionalDependency(kind="fitted-forecaster", forecaster=f, bounded_wrap=False)
        for f in forecasters
    )
    return TemporalSCM(graph, functions, noises), cd_result


def fit_candidate(data, b_cd, b_pred, b_noise, rng) -> TemporalSCM:
    """Discovery, forecaster, and noise phases for one configuration triple.

    Variables the discovered graph leaves parentless fall back to the
    mean-baseline forecaster.  Any phase failure is re-raised tagged with
    the phase name.
    """
    data = np.asarray(data, dtype=float)
    scm, _ = _fit_phases(data, b_cd, b_pred, b_noise, rng)
    return scm


def simulate(scm: TemporalSCM, n: int, warmup: int, rng) -> np.ndarray:
    """Exactly n rows from the fitted model after the warm-up is discarded."""
    return ancestral_sample(scm, n + warmup + scm.graph.max_lag, warmup, rng)


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _run_candidate(index, triple, data, block, cfg) -> tuple[CandidateModel, list[str]]:
    b_cd, b_pred, b_noise = triple
    base = dict(
        index=index, cd_config=b_cd, forecaster_config=b_pred, noise_config=b_noise
    )
    warnings = []
    try:
        scm, _ = _fit_phases(data, b_cd, b_pred, b_noise, _stream(cfg.seed, 1, index, 0))
        try:
            sim = simulate(scm, block.shape[0], cfg.warmup, _stream(cfg.seed, 1, index, 1))
        except CausimError as exc:
            raise PhaseError("simulation", exc) from exc
        detections = []
        for d, det_cfg in enumerate(cfg.detector_space):
            try:
                split = build_c2st_dataset(block, sim, det_cfg, _stream(cfg.seed, 1, index, 2, d))
                result = train_and_score_detector(split, det_cfg)
            except ConvergenceError as exc:
                # the carried best iterate is still a usable score
                result = exc.result
                warnings.append(f"candidate {index}: {exc}")
            except CausimError as exc:
                raise PhaseError("detection", exc) from exc
            detections.append(result)
        aucs = tuple(r.auc for r in detections)
        model = CandidateModel(
            **base,
            scm=scm,
            simulated=sim,
            detections=tuple(detections),
            aucs=aucs,
            worst_auc=max(aucs),
        )
        return model, warnings
    except CausimError as exc:
        return CandidateModel(**base, failure=str(exc)), warnings


def run_search(data, cfg: SearchConfig, threads: int = 1) -> SearchReport:
    """Fit, simulate, and score every candidate; pick the report's winner.

    Candidates run independently (optionally across `threads` workers); all
    randomness is keyed by grid index, so the report is identical for any
    thread count.  Failed candidates are recorded and excluded from
    selection; if every candidate fails the failures are raised as one
    aggregate error.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] < 1:
        raise ValueError(f"data must be a 2-d matrix, got shape {data.shape}")
    if not np.isfinite(data).all():
        raise ValueError("data contains non-finite values")
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")

    warnings = []
    for j in range(data.shape[1]):
        try:
            t_stat, stationary = adf_test(data[:, j])
        except CausimError as exc:
            warnings.append(f"stationarity check failed for column {j}: {exc}")
            continue
        if not stationary:
            warnings.append(
                f"column {j} looks non-stationary (ADF t={t_stat:.3f}); "
                "fitted dynamics may drift"
            )

    length = cfg.sample_length
    if length > data.shape[0]:
        warnings.append(
            f"sample_length {length} exceeds the {data.shape[0]} available rows; "
            "using the full series"
        )
        length = data.shape[0]

    block, offset = block_sample(data, length, _stream(cfg.seed, 0), return_offset=True)

    grid = list(itertools.product(cfg.cd_space, cfg.forecaster_space, cfg.noise_space))

    def job(k):
        return _run_candidate(k, grid[k], data, block, cfg)

    if threads == 1:
        outcomes = [job(k) for k in range(len(grid))]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(job, range(len(grid))))

    candidates = tuple(c for c, _ in outcomes)
    for _, extra in outcomes:
        warnings.extend(extra)

    successes = [c for c in candidates if c.failure is None]
    if not successes:
        lines = "; ".join(f"[{c.index}] {c.failure}" for c in candidates)
        raise CausimError(f"all {len(candidates)} candidates failed: {lines}")

    table = np.full((len(candidates), len(cfg.detector_space)), np.nan)
    for c in successes:
        table[c.index] = c.aucs

    sub_index, minmax_auc = minmax_select(table[[c.index for c in successes]])
    winner = successes[sub_index].index
    winner_model = candidates[winner]
    d_star = int(np.argmax(winner_model.aucs))

    if cfg.sparsity_penalty:
        equivalence = [winner]
        winner_det = winner_model.detections[d_star]
        for c in successes:
            if c.index == winner:
                continue
            other = c.detections[d_star]
            tied = auc_equivalence_test(
                winner_det.test_labels,
                winner_det.test_probs,
                other.test_probs,
                winner_det.auc,
                other.auc,
                cfg.equivalence_alpha,
                cfg.n_permutations,
                _stream(cfg.seed, 2, c.index),
            )
            if tied:
                equivalence.append(c.index)
        equivalence.sort()
        selected = min(
            equivalence, key=lambda i: (candidates[i].edge_count(), i)
        )
    else:
        equivalence = [winner]
        selected = winner

    from . import __version__

    metadata = {
        "version": __version__,
        "seed": cfg.seed,
        "data_rows": int(data.shape[0]),
        "data_cols": int(data.shape[1]),
        "grid": {
            "cd": len(cfg.cd_space),
            "forecaster": len(cfg.forecaster_space),
            "noise": len(cfg.noise_space),
            "detector": len(cfg.detector_space),
        },
        "sample_length": length,
        "warmup": cfg.warmup,
        "sparsity_penalty": cfg.sparsity_penalty,
    }
    return SearchReport(
        candidates=candidates,
        detector_space=cfg.detector_space,
        score_table=table,
        minmax_index=winner,
        minmax_auc=minmax_auc,
        winner_detector_index=d_star,
        equivalence_set=tuple(equivalence),
        selected_index=selected,
        block_offset=offset,
        warnings=tuple(warnings),
        metadata=metadata,
    )
