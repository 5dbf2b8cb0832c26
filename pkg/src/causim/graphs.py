"""Window-lagged causal graphs and the metrics defined on them.

A lagged graph over k series records directed edges X^i_{t-tau} -> X^j_t for
lags tau in 1..max_lag.  Contemporaneous edges do not exist in this
representation, so the rolled-out window graph is acyclic regardless of which
cells are set; self-lags (i == j at tau >= 1) are legal autoregressive edges.
The summary graph collapses the lag axis: i -> j iff some lag carries the edge.

The JSON interchange form used by the CLI is
``{"n_vars": k, "max_lag": L, "edges": [[tau, i, j], ...]}`` with one-based
lags and zero-based variable indices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError


@dataclass(frozen=True)
class LaggedGraph:
    """Boolean adjacency tensor indexed (lag, cause, effect).

    ``adj[tau - 1, i, j]`` is True iff the edge X^i_{t-tau} -> X^j_t exists.
    The tensor is copied and frozen at construction; instances are immutable
    and safe to share across threads.
    """

    n_vars: int
    max_lag: int
    adj: np.ndarray

    def __post_init__(self):
        if self.n_vars < 1:
            raise ValueError(f"n_vars must be positive, got {self.n_vars}")
        if self.max_lag < 1:
            raise ValueError(f"max_lag must be positive, got {self.max_lag}")
        adj = np.array(self.adj, dtype=bool)
        expected = (self.max_lag, self.n_vars, self.n_vars)
        if adj.shape != expected:
            raise ValueError(f"adj has shape {adj.shape}, expected {expected}")
        adj.flags.writeable = False
        object.__setattr__(self, "adj", adj)

    # the generated dataclass __eq__ chokes on array fields
    def __eq__(self, other):
        if not isinstance(other, LaggedGraph):
            return NotImplemented
        return (
            self.n_vars == other.n_vars
            and self.max_lag == other.max_lag
            and np.array_equal(self.adj, other.adj)
        )

    def __hash__(self):
        return hash((self.n_vars, self.max_lag, self.adj.tobytes()))

    @classmethod
    def empty(cls, n_vars: int, max_lag: int) -> "LaggedGraph":
        return cls(n_vars, max_lag, np.zeros((max_lag, n_vars, n_vars), dtype=bool))

    @classmethod
    def fully_connected(cls, n_vars: int, max_lag: int) -> "LaggedGraph":
        """Every lagged cell set, self-lags included."""
        return cls(n_vars, max_lag, np.ones((max_lag, n_vars, n_vars), dtype=bool))

    @classmethod
    def from_edges(cls, n_vars: int, max_lag: int, edges) -> "LaggedGraph":
        """Build from an iterable of (tau, i, j) triples, tau one-based."""
        adj = np.zeros((max_lag, n_vars, n_vars), dtype=bool)
        for tau, i, j in edges:
            if not 1 <= tau <= max_lag:
                raise ValueError(f"lag {tau} outside [1, {max_lag}]")
            if not (0 <= i < n_vars and 0 <= j < n_vars):
                raise ValueError(f"variable index ({i}, {j}) outside [0, {n_vars})")
            adj[tau - 1, i, j] = True
        return cls(n_vars, max_lag, adj)

    def edges(self) -> list[tuple[int, int, int]]:
        """All (tau, i, j) triples in lexicographic order, tau one-based."""
        taus, cause, effect = np.nonzero(self.adj)
        return [(int(t) + 1, int(i), int(j)) for t, i, j in zip(taus, cause, effect)]

    def n_edges(self) -> int:
        return int(self.adj.sum())

    def parent_list(self, j: int) -> list[tuple[int, int]]:
        """Lagged parents of variable j as sorted (i, tau) pairs, tau one-based.

        The sort order is the canonical parent ordering used to align
        functional-dependency coefficients and forecaster inputs.
        """
        if not 0 <= j < self.n_vars:
            raise ValueError(f"variable index {j} outside [0, {self.n_vars})")
        taus, cause = np.nonzero(self.adj[:, :, j])
        return sorted((int(i), int(t) + 1) for t, i in zip(taus, cause))

    def to_dict(self) -> dict:
        return {
            "n_vars": self.n_vars,
            "max_lag": self.max_lag,
            "edges": [list(e) for e in self.edges()],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "LaggedGraph":
        if not isinstance(obj, dict):
            raise ValueError("graph document must be a JSON object")
        missing = {"n_vars", "max_lag", "edges"} - obj.keys()
        if missing:
            raise ValueError(f"graph document missing keys: {sorted(missing)}")
        n_vars, max_lag = obj["n_vars"], obj["max_lag"]
        if not (isinstance(n_vars, int) and isinstance(max_lag, int)):
            raise ValueError("n_vars and max_lag must be integers")
        edges = obj["edges"]
        if not isinstance(edges, list) or any(
            not (isinstance(e, list) and len(e) == 3) for e in edges
        ):
            raise ValueError("edges must be a list of [tau, i, j] triples")
        return cls.from_edges(n_vars, max_lag, [tuple(e) for e in edges])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "LaggedGraph":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SummaryGraph:
    """Lag-free projection: adj[i, j] iff i causes j at some lag."""

    n_vars: int
    adj: np.ndarray

    def __post_init__(self):
        adj = np.array(self.adj, dtype=bool)
        if adj.shape != (self.n_vars, self.n_vars):
            raise ValueError(
                f"adj has shape {adj.shape}, expected {(self.n_vars, self.n_vars)}"
            )
        adj.flags.writeable = False
        object.__setattr__(self, "adj", adj)

    def __eq__(self, other):
        if not isinstance(other, SummaryGraph):
            return NotImplemented
        return self.n_vars == other.n_vars and np.array_equal(self.adj, other.adj)

    def __hash__(self):
        return hash((self.n_vars, self.adj.tobytes()))


def lagged_parents(g: LaggedGraph, j: int) -> set[tuple[int, int]]:
    """Set of (i, tau) pairs with an edge X^i_{t-tau} -> X^j_t."""
    return set(g.parent_list(j))


def to_summary(g: LaggedGraph) -> SummaryGraph:
    """Collapse the lag axis by OR."""
    return SummaryGraph(g.n_vars, g.adj.any(axis=0))


def shd(a: LaggedGraph, b: LaggedGraph) -> int:
    """Structural Hamming distance on the lagged tensor.

    Counts cells (tau, i, j) where the two graphs disagree; an insertion and a
    deletion each cost 1.  Summary-level SHD is available by composing
    `to_summary` and comparing those matrices instead.
    """
    if (a.n_vars, a.max_lag) != (b.n_vars, b.max_lag):
        raise ValueError(
            f"graph shapes differ: ({a.n_vars}, {a.max_lag}) vs ({b.n_vars}, {b.max_lag})"
        )
    return int(np.sum(a.adj != b.adj))


def edge_auc(scores: np.ndarray, truth: LaggedGraph) -> float:
    """ROC-AUC of flattened edge scores against the truth graph's cells."""
    scores = np.asarray(scores, dtype=float)
    if scores.shape != truth.adj.shape:
        raise ValueError(
            f"scores shape {scores.shape} does not match adj shape {truth.adj.shape}"
        )
    labels = truth.adj.ravel().astype(int)
    n_edges = int(labels.sum())
    if n_edges == 0 or n_edges == labels.size:
        raise DegenerateInputError(
            "truth graph must contain at least one edge and one non-edge; "
            f"got {n_edges} edges out of {labels.size} cells"
        )
    from .evaluation import roc_auc

    return roc_auc(labels, scores.ravel())
