from __future__ import annotations

import numpy as np
import pytest

from sociallearn.model import (
    HypothesisSet,
    LikelihoodModel,
    NetworkGraph,
    ScenarioConfig,
)


def random_scenario(rng: np.random.Generator, n_max: int = 6, m_max: int = 5,
                    z_max: int = 6, horizon: int | None = None) -> ScenarioConfig:
    """Small random scenario with occasional duplicated likelihood rows so
    nontrivial equivalent sets and weight-limit structure show up."""
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(2, m_max + 1))
    true_states = rng.integers(0, m, size=n)

    edges = []
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < 0.5:
                edges.append((a, b))

    models = []
    for k in range(n):
        z = int(rng.integers(2, z_max + 1))
        table = rng.uniform(1.0, 10.0, size=(m, z))
        table /= table.sum(axis=1, keepdims=True)
        for j in range(m):
            if j != true_states[k] and rng.random() < 0.3:
                table[j] = table[true_states[k]]
        models.append(LikelihoodModel(agent_id=k, table=table, alpha=float(table.min())))

    cfg = ScenarioConfig(
        hypotheses=HypothesisSet.default(m),
        graph=NetworkGraph(n, tuple(edges)),
        likelihoods=tuple(models),
        true_states=tuple(int(t) for t in true_states),
        horizon=int(rng.integers(10, 31)) if horizon is None else horizon,
        seed=int(rng.integers(0, 2**31)),
        epsilon=1e-3,
    )
    return cfg.with_uniform_static_weights()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
