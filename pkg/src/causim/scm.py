"""Synthetic temporal SCMs and causal ancestral sampling.

Each variable at time t is its functional dependency applied to lagged parent
values plus (by default) an exogenous noise draw; a multiplicative noise mode
exists behind a flag.  Graphs come from an Erdos-Renyi model over lagged
cells or a Barabasi-Albert preferential-attachment adaptation (see
generate_random_graph).  Self-lags are legal autoregressive edges.

Analytic function kinds aggregate coefficient-weighted parent transforms and
are usually tanh-wrapped so recursions stay bounded without eigenvalue
analysis.  Note the wrap changes the tails of the power and exponential
kinds entirely; they are included for family coverage, not tail fidelity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import forecasting
from .errors import NumericInstabilityError
from .graphs import LaggedGraph

ANALYTIC_KINDS = (
    "linear",
    "power",
    "exponential",
    "sigmoid",
    "relu",
    "trigonometric",
)

FUNCTION_KINDS = ANALYTIC_KINDS + ("fitted-forecaster",)

NOISE_KINDS = ("normal", "uniform", "empirical", "zero")

GRAPH_MODELS = ("erdos-renyi", "barabasi-albert")

COEF_RANGE = (0.5, 2.0)  # magnitudes for randomly drawn coefficients
SIGMA_RANGE = (0.5, 1.5)  # noise scale range for random SCMs


@dataclass(frozen=True)
class FunctionalDependency:
    """One variable's mechanism: aggregate of transformed parent values.

    params[k] weighs the k-th parent in the canonical (variable, lag) parent
    order.  Per-parent transforms: identity (linear), signed square (power),
    exp (exponential), logistic (sigmoid), max(0, .) (relu), sin
    (trigonometric).  bounded_wrap applies tanh to the aggregate.  The
    fitted-forecaster kind delegates to a trained regressor instead.
    """

    kind: str
    params: np.ndarray = ()
    bounded_wrap: bool = False
    forecaster: forecasting.FittedForecaster | None = None

    def __post_init__(self):
        if self.kind not in FUNCTION_KINDS:
            raise ValueError(f"kind must be one of {FUNCTION_KINDS}, got {self.kind!r}")
        if self.kind == "fitted-forecaster":
            if self.forecaster is None:
                raise ValueError("fitted-forecaster kind requires a forecaster")
        params = np.array(self.params, dtype=float)
        params.flags.writeable = False
        object.__setattr__(self, "params", params)

    def arity(self) -> int:
        if self.kind == "fitted-forecaster":
            return len(self.forecaster.parents)
        return len(self.params)

    def evaluate(self, parent_values) -> float:
        values = np.asarray(parent_values, dtype=float)
        if self.kind == "fitted-forecaster":
            out = forecasting.predict(self.forecaster, values)
        else:
            if values.shape != self.params.shape:
                raise ValueError(
                    f"expected {len(self.params)} parent values, got shape {values.shape}"
                )
            if self.kind == "linear":
                transformed = values
            elif self.kind == "power":
                transformed = np.sign(values) * values * values
            elif self.kind == "exponential":
                transformed = np.exp(values)
            elif self.kind == "sigmoid":
                transformed = 1.0 / (1.0 + np.exp(-values))
            elif self.kind == "relu":
                transformed = np.maximum(values, 0.0)
            else:  # trigonometric
                transformed = np.sin(values)
            out = float(self.params @ transformed)
        if self.bounded_wrap:
            out = float(np.tanh(out))
        return out


@dataclass(frozen=True)
class NoiseSource:
    """Exogenous-noise sampler for synthetic SCMs; build via the classmethods."""

    kind: str
    params: tuple[float, ...] = ()
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"kind must be one of {NOISE_KINDS}, got {self.kind!r}")
        if self.values is not None:
            values = np.array(self.values, dtype=float)
            values.flags.writeable = False
            object.__setattr__(self, "values", values)

    @classmethod
    def normal(cls, mean: float = 0.0, std: float = 1.0) -> "NoiseSource":
        if std <= 0:
            raise ValueError(f"std must be positive, got {std}")
        return cls("normal", (float(mean), float(std)))

    @classmethod
    def uniform(cls, low: float, high: float) -> "NoiseSource":
        if not low < high:
            raise ValueError(f"need low < high, got ({low}, {high})")
        return cls("uniform", (float(low), float(high)))

    @classmethod
    def empirical(cls, values) -> "NoiseSource":
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            raise ValueError("empirical noise requires a non-empty vector")
        return cls("empirical", (), values)

    @classmethod
    def zero(cls) -> "NoiseSource":
        return cls("zero")

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "normal":
            mean, std = self.params
            return rng.normal(mean, std, size=n)
        if self.kind == "uniform":
            low, high = self.params
            return rng.uniform(low, high, size=n)
        if self.kind == "empirical":
            return rng.choice(self.values, size=n, replace=True)
        return np.zeros(n)


@dataclass(frozen=True)
class TemporalSCM:
    """Graph plus per-variable mechanisms and noise sources.

    noises may hold NoiseSource or noise.FittedNoise objects; anything with a
    sample(n, rng) method works.  noise_mode is "additive" or
    "multiplicative".
    """

    graph: LaggedGraph
    functions: tuple[FunctionalDependency, ...]
    noises: tuple[object, ...]
    noise_mode: str = "additive"

    def __post_init__(self):
        object.__setattr__(self, "functions", tuple(self.functions))
        object.__setattr__(self, "noises", tuple(self.noises))
        k = self.graph.n_vars
        if len(self.functions) != k or len(self.noises) != k:
            raise ValueError(
                f"need {k} functions and noises, got {len(self.functions)} and {len(self.noises)}"
            )
        if self.noise_mode not in ("additive", "multiplicative"):
            raise ValueError(f"bad noise_mode {self.noise_mode!r}")
        for j, f in enumerate(self.functions):
            expected = len(self.graph.parent_list(j))
            if f.arity() != expected:
                raise ValueError(
                    f"function for variable {j} has arity {f.arity()}, "
                    f"graph gives {expected} parents"
                )


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs for random synthetic SCMs."""

    n_vars: int
    n_steps: int
    warmup: int = 50
    min_lag: int = 1
    max_lag: int = 1
    edge_probability: float = 0.3
    graph_model: str = "erdos-renyi"
    function_family: tuple[str, ...] = ("linear", "sigmoid")
    noise_family: tuple[str, ...] = ("normal",)
    multiplicative_noise: bool = False
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "function_family", tuple(self.function_family))
        object.__setattr__(self, "noise_family", tuple(self.noise_family))
        if self.n_vars < 1:
            raise ValueError(f"n_vars must be positive, got {self.n_vars}")
        if not 1 <= self.min_lag <= self.max_lag:
            raise ValueError(
                f"need 1 <= min_lag <= max_lag, got ({self.min_lag}, {self.max_lag})"
            )
        if not 0 <= self.edge_probability <= 1:
            raise ValueError(f"edge_probability outside [0, 1]: {self.edge_probability}")
        if self.n_steps <= self.warmup + self.max_lag:
            raise ValueError(
                f"n_steps must exceed warmup + max_lag = {self.warmup + self.max_lag}"
            )
        if self.warmup < 0:
            raise ValueError(f"warmup must be >= 0, got {self.warmup}")
        if self.graph_model not in GRAPH_MODELS:
            raise ValueError(f"graph_model must be one of {GRAPH_MODELS}")
        if not self.function_family or set(self.function_family) - set(ANALYTIC_KINDS):
            raise ValueError(
                f"function_family must be a non-empty subset of {ANALYTIC_KINDS}"
            )
        if not self.noise_family or set(self.noise_family) - {"normal", "uniform", "zero"}:
            raise ValueError(
                'noise_family must be a non-empty subset of ("normal", "uniform", "zero")'
            )

    def to_dict(self) -> dict:
        return {
            "n_vars": self.n_vars,
            "n_steps": self.n_steps,
            "warmup": self.warmup,
            "min_lag": self.min_lag,
            "max_lag": self.max_lag,
            "edge_probability": self.edge_probability,
            "graph_model": self.graph_model,
            "function_family": list(self.function_family),
            "noise_family": list(self.noise_family),
            "multiplicative_noise": self.multiplicative_noise,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "GeneratorConfig":
        unknown = obj.keys() - cls.__dataclass_fields__.keys()
        if unknown:
            raise ValueError(f"unknown generator config keys: {sorted(unknown)}")
        obj = dict(obj)
        for key in ("function_family", "noise_family"):
            if key in obj:
                obj[key] = tuple(obj[key])
        return cls(**obj)


def generate_random_graph(cfg: GeneratorConfig, rng: np.random.Generator) -> LaggedGraph:
    """Random lagged graph under the configured model.

    Erdos-Renyi includes every cell (tau, i, j) with tau in
    [min_lag, max_lag] independently with edge_probability; self-lags
    included.  The Barabasi-Albert adaptation attaches each new variable v to
    m = max(1, round(edge_probability * (n_vars - 1))) existing variables
    drawn with probability proportional to degree + 1, orients edges old ->
    new, and assigns each a uniform lag from [min_lag, max_lag]; it never
    produces self-lags.
    """
    k = cfg.n_vars
    adj = np.zeros((cfg.max_lag, k, k), dtype=bool)
    if cfg.graph_model == "erdos-renyi":
        for tau in range(cfg.min_lag, cfg.max_lag + 1):
            adj[tau - 1] = rng.random((k, k)) < cfg.edge_probability
        return LaggedGraph(k, cfg.max_lag, adj)

    degree = np.zeros(k)
    m = max(1, round(cfg.edge_probability * (k - 1)))
    for v in range(1, k):
        weights = degree[:v] + 1.0
        partners = rng.choice(v, size=min(m, v), replace=False, p=weights / weights.sum())
        for u in partners:
            tau = int(rng.integers(cfg.min_lag, cfg.max_lag + 1))
            adj[tau - 1, int(u), v] = True
            degree[int(u)] += 1
            degree[v] += 1
    return LaggedGraph(k, cfg.max_lag, adj)


def build_random_scm(cfg: GeneratorConfig, rng: np.random.Generator) -> TemporalSCM:
    """Random SCM: graph, tanh-wrapped random mechanisms, random noise.

    Coefficients are uniform on +-[0.5, 2.0] with random signs; normal noise
    uses sigma ~ U[0.5, 1.5] and uniform noise is symmetric +-c with
    c ~ U[0.5, 1.5].  Parentless variables get the zero function, so they are
    pure noise processes.
    """
    graph = generate_random_graph(cfg, rng)
    functions = []
    noises = []
    for j in range(cfg.n_vars):
        n_parents = len(graph.parent_list(j))
        if n_parents:
            kind = str(rng.choice(cfg.function_family))
            coefs = rng.uniform(*COEF_RANGE, size=n_parents)
            coefs *= rng.choice([-1.0, 1.0], size=n_parents)
            functions.append(FunctionalDependency(kind, coefs, bounded_wrap=True))
        else:
            functions.append(FunctionalDependency("linear", ()))
        noise_kind = str(rng.choice(cfg.noise_family))
        if noise_kind == "normal":
            noises.append(NoiseSource.normal(0.0, float(rng.uniform(*SIGMA_RANGE))))
        elif noise_kind == "uniform":
            c = float(rng.uniform(*SIGMA_RANGE))
            noises.append(NoiseSource.uniform(-c, c))
        else:
            noises.append(NoiseSource.zero())
    mode = "multiplicative" if cfg.multiplicative_noise else "additive"
    return TemporalSCM(graph, tuple(functions), tuple(noises), mode)


def ancestral_sample(
    scm: TemporalSCM, T: int, W: int, rng: np.random.Generator
) -> np.ndarray:
    """Forward-simulate the SCM and return the last T - W - max_lag steps.

    The first max_lag steps are initialized with standard normal draws, the
    recursion then fills each timestep variable by variable, and the first
    W + max_lag steps are discarded.  Each variable's noise is drawn from its
    own child stream spawned off rng (in variable order), so altering one
    variable's noise source never shifts the draws of the others.
    """
    lag = scm.graph.max_lag
    k = scm.graph.n_vars
    if T <= W + lag:
        raise ValueError(f"T must exceed W + max_lag = {W + lag}, got {T}")
    if W < 0:
        raise ValueError(f"warmup must be >= 0, got {W}")

    values = np.empty((T, k))
    values[:lag] = rng.standard_normal((lag, k))
    noise_rngs = rng.spawn(k)
    eps = np.empty((T - lag, k))
    for j in range(k):
        eps[:, j] = scm.noises[j].sample(T - lag, noise_rngs[j])

    parent_lists = [scm.graph.parent_list(j) for j in range(k)]
    multiplicative = scm.noise_mode == "multiplicative"
    for t in range(lag, T):
        for j in range(k):
            parent_values = [values[t - tau, i] for i, tau in parent_lists[j]]
            base = scm.functions[j].evaluate(parent_values)
            e = eps[t - lag, j]
            value = base * e if multiplicative else base + e
            if not np.isfinite(value):
                raise NumericInstabilityError(
                    f"non-finite value for variable {j} at timestep {t}",
                    variable=j,
                    timestep=t,
                )
            values[t, j] = value
    return values[W + lag :].copy()
