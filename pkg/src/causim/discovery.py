"""Lagged causal graph estimation from multivariate series.

Two interchangeable discoverers plus an oracle bypass:

* lagged-pc: PC-style pruning of the lagged candidate set driven by
  partial-correlation independence tests.  This keeps the skeleton phase of
  the PCMCI family (condition on other retained parents of the target, with
  growing subset sizes) but skips the momentary-conditional re-test pass;
  at desk scale the pruning alone recovers the structures we care about.
* dynotears: structural VAR weight optimization.  Contemporaneous weights W
  carry a trace-exponential acyclicity penalty inside an augmented
  Lagrangian; the lagged block A gives the returned graph and W is dropped
  after optimization since this representation has no contemporaneous edges.

Both are deterministic functions of (data, config); discover() dispatches on
cfg.algorithm.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.stats

from .errors import DataSizeError, DegenerateInputError, NumericInstabilityError
from .graphs import LaggedGraph

ALGORITHMS = ("lagged-pc", "dynotears", "oracle")

_H_TOL = 1e-8
_RHO_MAX = 1e16


@dataclass(frozen=True)
class CDConfig:
    """Discovery algorithm choice and knobs.

    alpha and max_cond_size drive lagged-pc; the lambda/tau/max_iterations
    group drives dynotears; oracle_graph must be set (only) for the oracle
    algorithm, which returns that graph untouched.
    """

    algorithm: str = "lagged-pc"
    max_lag: int = 1
    alpha: float = 0.05
    lambda_w: float = 0.1
    lambda_a: float = 0.1
    tau_w: float = 0.05
    tau_a: float = 0.05
    max_iterations: int = 100
    max_cond_size: int = 2
    oracle_graph: LaggedGraph | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.max_lag < 1:
            raise ValueError(f"max_lag must be >= 1, got {self.max_lag}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        for name in ("lambda_w", "lambda_a", "tau_w", "tau_a"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.max_cond_size < 0:
            raise ValueError(f"max_cond_size must be >= 0, got {self.max_cond_size}")
        if (self.algorithm == "oracle") != (self.oracle_graph is not None):
            raise ValueError("oracle_graph must be given exactly when algorithm is oracle")

    def to_dict(self) -> dict:
        out = {
            "algorithm": self.algorithm,
            "max_lag": self.max_lag,
            "alpha": self.alpha,
            "lambda_w": self.lambda_w,
            "lambda_a": self.lambda_a,
            "tau_w": self.tau_w,
            "tau_a": self.tau_a,
            "max_iterations": self.max_iterations,
            "max_cond_size": self.max_cond_size,
            "oracle_graph": None,
        }
        if self.oracle_graph is not None:
            out["oracle_graph"] = self.oracle_graph.to_dict()
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "CDConfig":
        unknown = obj.keys() - cls.__dataclass_fields__.keys()
        if unknown:
            raise ValueError(f"unknown discovery config keys: {sorted(unknown)}")
        obj = dict(obj)
        if obj.get("oracle_graph") is not None:
            obj["oracle_graph"] = LaggedGraph.from_dict(obj["oracle_graph"])
        return cls(**obj)


@dataclass(frozen=True)
class CDResult:
    """Discovered graph with per-cell scores and per-variable parent lists.

    scores is shaped like graph.adj; cells are true exactly where the score
    survived the algorithm's threshold.  converged is False when the
    dynotears outer loop exhausted max_iterations with the acyclicity
    residual still above tolerance (the best iterate is still returned).
    """

    graph: LaggedGraph
    scores: np.ndarray
    parents: tuple[tuple[tuple[int, int], ...], ...]
    converged: bool = True

    def __post_init__(self):
        scores = np.array(self.scores, dtype=float)
        if scores.shape != self.graph.adj.shape:
            raise ValueError(
                f"scores shape {scores.shape} != adj shape {self.graph.adj.shape}"
            )
        scores.flags.writeable = False
        object.__setattr__(self, "scores", scores)


def _result(graph: LaggedGraph, scores, converged: bool = True) -> CDResult:
    parents = tuple(tuple(graph.parent_list(j)) for j in range(graph.n_vars))
    return CDResult(graph, scores, parents, converged)


def discover(data, cfg: CDConfig, rng=None) -> CDResult:
    """Run the configured discoverer; oracle returns its graph with unit scores."""
    if cfg.algorithm == "oracle":
        return _result(cfg.oracle_graph, cfg.oracle_graph.adj.astype(float))
    if cfg.algorithm == "lagged-pc":
        return lagged_pc_discover(data, cfg, rng)
    return dynotears_discover(data, cfg)


def parcorr_ci_test(x, y, z=()) -> tuple[float, float]:
    """Partial-correlation independence test of x and y given the series in z.

    Both x and y are residualized on z by least squares (inputs are centered,
    which absorbs the intercept), the Pearson correlation r of the residuals
    is the statistic, and the p-value comes from the two-sided t test with
    n - |z| - 2 degrees of freedom.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = [np.asarray(series, dtype=float) for series in z]
    n = len(x)
    if len(y) != n or any(len(series) != n for series in z):
        raise ValueError("all series must have the same length")
    if n <= len(z) + 3:
        raise DataSizeError(f"need more than |z| + 3 = {len(z) + 3} points, got {n}")

    xc = x - x.mean()
    yc = y - y.mean()
    if z:
        design = np.column_stack(z)
        design = design - design.mean(axis=0)
        beta_x, _, rank, _ = np.linalg.lstsq(design, xc, rcond=None)
        if rank < design.shape[1]:
            raise DegenerateInputError("rank-deficient conditioning design")
        beta_y = np.linalg.lstsq(design, yc, rcond=None)[0]
        xc = xc - design @ beta_x
        yc = yc - design @ beta_y

    sx = np.sqrt(xc @ xc)
    sy = np.sqrt(yc @ yc)
    if sx == 0.0 or sy == 0.0:
        raise DegenerateInputError("constant residuals; correlation undefined")
    r = float(np.clip((xc @ yc) / (sx * sy), -1.0, 1.0))

    dof = n - len(z) - 2
    if r * r >= 1.0:
        return r, 0.0
    t = r * np.sqrt(dof / (1.0 - r * r))
    p = float(2.0 * scipy.stats.t.sf(abs(t), dof))
    return r, p


def lagged_pc_discover(data, cfg: CDConfig, rng=None) -> CDResult:
    """PC-style pruning of lagged candidate parents with ParCorr tests.

    For each target j the candidate set starts as every (i, tau); each level
    s = 0..max_cond_size tests every remaining candidate against all
    size-s subsets of the other candidates retained at the start of the
    level, removing (at level end, PC-stable fashion) those with any
    non-rejecting test.  An edge survives if every performed test rejected
    independence at alpha.  Scores are 1 - max p-value seen per cell, so
    retained cells score >= 1 - alpha and removed ones below.  rng is unused;
    the procedure is deterministic.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise ValueError(f"data must be 2-d, got shape {data.shape}")
    rows, k = data.shape
    lag = cfg.max_lag
    if rows < (lag + 1) * k + 10:
        raise DataSizeError(
            f"need at least (max_lag + 1) * n_vars + 10 = {(lag + 1) * k + 10} rows, got {rows}"
        )
    if not np.isfinite(data).all():
        raise ValueError("data contains non-finite values")

    # lagged design shared by every test: column (i, tau) holds X^i_{t-tau}
    n_eff = rows - lag
    column = {}
    for tau in range(1, lag + 1):
        for i in range(k):
            column[(i, tau)] = data[lag - tau : rows - tau, i]
    targets = data[lag:, :]

    pmax = np.zeros((lag, k, k))
    adj = np.zeros((lag, k, k), dtype=bool)
    all_candidates = [(i, tau) for tau in range(1, lag + 1) for i in range(k)]

    for j in range(k):
        parents = sorted(all_candidates)
        for size in range(cfg.max_cond_size + 1):
            if size > len(parents) - 1:
                break
            removed = []
            for cand in parents:
                others = [p for p in parents if p != cand]
                for subset in itertools.combinations(others, size):
                    _, p = parcorr_ci_test(
                        column[cand], targets[:, j], [column[p] for p in subset]
                    )
                    i, tau = cand
                    pmax[tau - 1, i, j] = max(pmax[tau - 1, i, j], p)
                    if p > cfg.alpha:
                        removed.append(cand)
                        break
            parents = [p for p in parents if p not in removed]
        for i, tau in parents:
            adj[tau - 1, i, j] = True

    graph = LaggedGraph(k, lag, adj)
    return _result(graph, 1.0 - pmax)


def acyclicity_h(w) -> float:
    """Trace-exponential acyclicity residual: trace(expm(W o W)) - d.

    Zero (up to ~1e-8) iff the weighted digraph of W has no directed cycle;
    grows with cycle weight products otherwise.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"w must be square, got shape {w.shape}")
    if not np.isfinite(w).all():
        raise ValueError("w contains non-finite values")
    return float(np.trace(scipy.linalg.expm(w * w)) - w.shape[0])


def _h_with_grad(w: np.ndarray) -> tuple[float, np.ndarray]:
    e = scipy.linalg.expm(w * w)
    return float(np.trace(e) - w.shape[0]), e.T * 2.0 * w


def dynotears_discover(data, cfg: CDConfig, monitor=None) -> CDResult:
    """Structural VAR fit with an acyclicity-constrained contemporaneous block.

    Minimizes 0.5/n ||X - XW - YA||_F^2 + lambda_w ||W||_1 + lambda_a ||A||_1
    subject to h(W) = 0, where Y stacks the max_lag lagged copies of the
    (internally standardized) data.  The constraint is handled by an
    augmented Lagrangian: rho starts at 1 and is multiplied by 10 whenever h
    fails to shrink to a quarter of its previous value, the multiplier
    receives rho * h after each outer round, and the inner problems go to
    L-BFGS-B over non-negative variable doublings (w = w+ - w-, giving exact
    L1 gradients).  Entries below tau are zeroed; W is then discarded and the
    graph is read off the thresholded A with scores |A|.

    monitor, if given, is called once per outer round with a dict holding
    round, rho, h, and the accepted inner-iterate objective path.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise ValueError(f"data must be 2-d, got shape {data.shape}")
    rows, d = data.shape
    lag = cfg.max_lag
    if rows < lag + 20:
        raise DataSizeError(f"need at least max_lag + 20 = {lag + 20} rows, got {rows}")
    if not np.isfinite(data).all():
        raise ValueError("data contains non-finite values")

    sd = data.std(axis=0)
    if (sd == 0).any():
        raise DegenerateInputError("constant column; cannot standardize for dynotears")
    z = (data - data.mean(axis=0)) / sd
    x = z[lag:]
    y = np.hstack([z[lag - tau : rows - tau] for tau in range(1, lag + 1)])
    n = rows - lag

    nw = d * d
    na = d * lag * d

    def unpack(theta):
        w = (theta[:nw] - theta[nw : 2 * nw]).reshape(d, d)
        a = (theta[2 * nw : 2 * nw + na] - theta[2 * nw + na :]).reshape(d * lag, d)
        return w, a

    def objective(theta, rho, mult):
        w, a = unpack(theta)
        residual = x - x @ w - y @ a
        loss = 0.5 / n * float(np.sum(residual * residual))
        h, grad_h = _h_with_grad(w)
        obj = (
            loss
            + 0.5 * rho * h * h
            + mult * h
            + cfg.lambda_w * float(np.sum(theta[: 2 * nw]))
            + cfg.lambda_a * float(np.sum(theta[2 * nw :]))
        )
        if not np.isfinite(obj):
            raise NumericInstabilityError("non-finite dynotears loss")
        grad_w = -(x.T @ residual) / n + (rho * h + mult) * grad_h
        grad_a = -(y.T @ residual) / n
        grad = np.concatenate(
            [
                (grad_w + cfg.lambda_w).ravel(),
                (-grad_w + cfg.lambda_w).ravel(),
                (grad_a + cfg.lambda_a).ravel(),
                (-grad_a + cfg.lambda_a).ravel(),
            ]
        )
        return obj, grad

    # diagonal of W fixed at zero; everything else non-negative
    bounds = []
    for _ in range(2):
        for r in range(d):
            for c in range(d):
                bounds.append((0.0, 0.0) if r == c else (0.0, None))
    bounds.extend([(0.0, None)] * (2 * na))

    theta = np.zeros(2 * (nw + na))
    rho, mult, h = 1.0, 0.0, np.inf
    for outer in range(cfg.max_iterations):
        path = [] if monitor is not None else None
        while rho < _RHO_MAX:
            callback = None
            if monitor is not None:
                path = []
                callback = lambda tk: path.append(objective(tk, rho, mult)[0])
            sol = scipy.optimize.minimize(
                objective,
                theta,
                args=(rho, mult),
                method="L-BFGS-B",
                jac=True,
                bounds=bounds,
                callback=callback,
            )
            theta_new = sol.x
            h_new = _h_with_grad(unpack(theta_new)[0])[0]
            if h_new > 0.25 * h:
                rho *= 10.0
            else:
                break
        theta, h = theta_new, h_new
        mult += rho * h
        if monitor is not None:
            monitor({"round": outer, "rho": rho, "h": h, "objective_path": path})
        if h <= _H_TOL or rho >= _RHO_MAX:
            break

    converged = h <= _H_TOL
    _, a = unpack(theta)
    scores = np.abs(a).reshape(lag, d, d)
    graph = LaggedGraph(d, lag, scores >= cfg.tau_a)
    return _result(graph, scores, converged)
