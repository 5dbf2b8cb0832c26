"""Independent reference computations used by the test suite.

Everything here is deliberately naive (quadratic loops, exhaustive scans) so
expected values never come from the code under test.
"""

from __future__ import annotations

import numpy as np


def pairwise_auc(labels, scores) -> float:
    """O(n^2) Mann-Whitney AUC: wins + half-credit for ties over all pairs."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=float)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def has_cycle(adj_bool) -> bool:
    """Directed-cycle check by DFS; self-loops count as cycles."""
    adj = np.asarray(adj_bool, dtype=bool)
    d = adj.shape[0]
    color = [0] * d  # 0 unvisited, 1 on stack, 2 done

    def visit(u):
        color[u] = 1
        for v in range(d):
            if adj[u, v]:
                if color[v] == 1:
                    return True
                if color[v] == 0 and visit(v):
                    return True
        color[u] = 2
        return False

    return any(color[u] == 0 and visit(u) for u in range(d))
