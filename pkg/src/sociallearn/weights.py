"""Trust-weight construction from exchanged local beliefs.

Each agent weighs a neighbor by the probability that the two of them face
the same true hypothesis, estimated as the inner product of their current
local beliefs, then normalizes its column so the matrix stays
column-stochastic with a strictly positive diagonal.
"""

from __future__ import annotations

import numpy as np

from .model import NetworkGraph


def same_state_probability(pi_k: np.ndarray, pi_l: np.ndarray) -> float:
    """Inner product of two belief vectors."""
    return float(np.dot(np.asarray(pi_k, dtype=float), np.asarray(pi_l, dtype=float)))


def state_specific_weight(pi_k: np.ndarray, pi_l: np.ndarray, hypothesis: int,
                          sigma_k: float) -> float:
    """Per-hypothesis share of an off-diagonal weight.

    Summed over hypotheses this reproduces the off-diagonal entry
    ``same_state_probability / sigma_k``.
    """
    if sigma_k < 1.0:
        raise ValueError(f"sigma_k must be at least 1, got {sigma_k!r}")
    return float(pi_k[hypothesis]) * float(pi_l[hypothesis]) / sigma_k


def weight_column(k: int, pis: np.ndarray, graph: NetworkGraph) -> tuple[np.ndarray, float]:
    """Weight column of agent ``k`` and its normalizer.

    ``pis`` holds all agents' local beliefs, one row each. The self weight
    is ``1/sigma_k`` with ``sigma_k = 1 + sum of neighbor inner products``,
    so the column sums to one by construction.
    """
    pis = np.asarray(pis, dtype=float)
    col = np.zeros(graph.n_agents)
    sigma = 1.0
    for l in graph.neighbors(k):
        s = float(np.dot(pis[k], pis[l]))
        col[l] = s
        sigma += s
    col /= sigma
    col[k] = 1.0 / sigma
    return col, sigma


def adaptive_matrix(pis: np.ndarray, graph: NetworkGraph) -> np.ndarray:
    """Full weight matrix; column ``k`` is ``weight_column(k, ...)``."""
    n = graph.n_agents
    a = np.zeros((n, n))
    for k in range(n):
        a[:, k], _ = weight_column(k, pis, graph)
    return a


def uniform_weights(graph: NetworkGraph) -> np.ndarray:
    """Baseline matrix: each column uniform over the neighborhood, self
    included."""
    n = graph.n_agents
    a = np.zeros((n, n))
    for k in range(n):
        members = graph.neighbors(k) + (k,)
        for l in members:
            a[l, k] = 1.0 / len(members)
    return a
