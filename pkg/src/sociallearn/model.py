"""Domain types for networked hypothesis-testing scenarios.

A scenario bundles a hypothesis set, an undirected agent graph, one
categorical likelihood table per agent, the fixed true hypothesis of each
agent, and run parameters (horizon, seed, threshold, enabled algorithms).
All types are immutable after construction; numpy arrays are marked
read-only so configurations can be shared freely across runs.

Indices are dense and zero-based everywhere. Hypothesis labels exist only
at the JSON boundary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

ROW_SUM_TOL = 1e-12
ALGORITHMS = ("noncooperative", "static", "adaptive")

# Belief column name of the override output in CSV files. Not a scenario
# algorithm flag: it is derived from "adaptive" output, never simulated
# separately.
GLOBAL_ALGORITHM = "adaptive-global"


class NumericFault(RuntimeError):
    """Raised when a simulation or solver produces non-finite state."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class HypothesisSet:
    """Ordered collection of distinct hypothesis labels."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    @staticmethod
    def default(m: int) -> "HypothesisSet":
        return HypothesisSet(tuple(f"theta{j + 1}" for j in range(m)))


@dataclass(frozen=True)
class LikelihoodModel:
    """Per-agent categorical likelihood table.

    ``table[j, z]`` is the probability that the agent observes symbol ``z``
    when hypothesis ``j`` is in force. ``alpha`` is the declared positive
    lower bound on every entry; it is validated, not inferred.
    """

    agent_id: int
    table: np.ndarray
    alpha: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "table", _freeze(np.asarray(self.table, dtype=float)))
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def n_hypotheses(self) -> int:
        return self.table.shape[0]

    @property
    def n_observations(self) -> int:
        return self.table.shape[1]

    def log_table(self) -> np.ndarray:
        return np.log(self.table)


@dataclass(frozen=True)
class NetworkGraph:
    """Undirected agent graph. Neighborhoods include the agent itself."""

    n_agents: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        canon = sorted({(min(a, b), max(a, b)) for a, b in self.edges})
        object.__setattr__(self, "edges", tuple(canon))

    def neighbors(self, k: int) -> tuple[int, ...]:
        """Strict neighborhood of ``k`` (excludes ``k``), sorted."""
        out = [b if a == k else a for a, b in self.edges if k in (a, b)]
        return tuple(sorted(out))

    def neighbor_lists(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self.neighbors(k) for k in range(self.n_agents))

    def adjacency(self) -> np.ndarray:
        """Dense 0/1 adjacency matrix, zero diagonal."""
        adj = np.zeros((self.n_agents, self.n_agents))
        for a, b in self.edges:
            adj[a, b] = 1.0
            adj[b, a] = 1.0
        return adj

    def degree(self, k: int) -> int:
        return len(self.neighbors(k))


@dataclass(frozen=True)
class ScenarioConfig:
    hypotheses: HypothesisSet
    graph: NetworkGraph
    likelihoods: tuple[LikelihoodModel, ...]
    true_states: tuple[int, ...]
    horizon: int
    seed: int
    epsilon: float = 1e-3
    algorithms: tuple[str, ...] = ("noncooperative", "static", "adaptive")
    static_weights: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "likelihoods", tuple(self.likelihoods))
        object.__setattr__(self, "true_states", tuple(int(t) for t in self.true_states))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if self.static_weights is not None:
            object.__setattr__(
                self, "static_weights", _freeze(np.asarray(self.static_weights, dtype=float))
            )

    @property
    def n_agents(self) -> int:
        return self.graph.n_agents

    @property
    def n_hypotheses(self) -> int:
        return self.hypotheses.size

    def wants(self, algorithm: str) -> bool:
        return algorithm in self.algorithms

    def override(self, horizon: int | None = None, seed: int | None = None,
                 epsilon: float | None = None,
                 algorithms: Sequence[str] | None = None) -> "ScenarioConfig":
        """Copy with run parameters replaced; None keeps the current value."""
        kw = {}
        if horizon is not None:
            kw["horizon"] = int(horizon)
        if seed is not None:
            kw["seed"] = int(seed)
        if epsilon is not None:
            kw["epsilon"] = float(epsilon)
        if algorithms is not None:
            kw["algorithms"] = tuple(algorithms)
        return replace(self, **kw) if kw else self

    def with_uniform_static_weights(self) -> "ScenarioConfig":
        """Copy whose static baseline weights are uniform over each
        neighborhood (self included)."""
        n = self.n_agents
        w = np.zeros((n, n))
        for k in range(n):
            nbrs = self.graph.neighbors(k) + (k,)
            for l in nbrs:
                w[l, k] = 1.0 / len(nbrs)
        return replace(self, static_weights=w)


# ---------------------------------------------------------------------------
# validation


def validate_combination_matrix(weights: np.ndarray, graph: NetworkGraph,
                                name: str = "weights") -> list[str]:
    """Invariant check for a column-normalized neighborhood weight matrix.

    Columns sum to one, entries are nonnegative and vanish outside the
    neighborhood, and the diagonal is strictly positive.
    """
    n = graph.n_agents
    out: list[str] = []
    w = np.asarray(weights, dtype=float)
    if w.shape != (n, n):
        out.append(f"{name}: shape {w.shape} does not match {n} agents")
        return out
    if not np.all(np.isfinite(w)):
        out.append(f"{name}: non-finite entries")
        return out
    if np.any(w < 0):
        l, k = np.argwhere(w < 0)[0]
        out.append(f"{name}: negative entry at ({l},{k})")
    col_sums = w.sum(axis=0)
    for k in range(n):
        if abs(col_sums[k] - 1.0) > ROW_SUM_TOL:
            out.append(f"{name}: column {k} sums to {float(col_sums[k])!r}, expected 1")
        if w[k, k] <= 0:
            out.append(f"{name}: diagonal entry ({k},{k}) not strictly positive")
        allowed = set(graph.neighbors(k)) | {k}
        for l in range(n):
            if l not in allowed and w[l, k] != 0.0:
                out.append(f"{name}: entry ({l},{k}) nonzero outside the neighborhood")
    return out


def validate_scenario(cfg: ScenarioConfig) -> list[str]:
    """Collect every invariant violation; empty list means well formed."""
    out: list[str] = []
    m = cfg.hypotheses.size
    if m < 2:
        out.append(f"hypotheses: need at least 2, got {m}")
    if len(set(cfg.hypotheses.labels)) != m:
        out.append("hypotheses: labels are not unique")

    n = cfg.graph.n_agents
    if n < 1:
        out.append(f"graph: n_agents must be positive, got {n}")
    for a, b in cfg.graph.edges:
        if a == b:
            out.append(f"graph: self edge ({a},{b}) not allowed")
        if not (0 <= a < n and 0 <= b < n):
            out.append(f"graph: edge ({a},{b}) out of range")

    if len(cfg.likelihoods) != n:
        out.append(f"likelihoods: expected {n} models, got {len(cfg.likelihoods)}")
    for pos, lm in enumerate(cfg.likelihoods):
        tag = f"likelihoods[{pos}]"
        if lm.agent_id != pos:
            out.append(f"{tag}: agent_id {lm.agent_id} does not match position {pos}")
        if lm.table.ndim != 2:
            out.append(f"{tag}: table must be 2-dimensional")
            continue
        rows, z = lm.table.shape
        if rows != m:
            out.append(f"{tag}: {rows} rows for {m} hypotheses")
        if z < 2:
            out.append(f"{tag}: observation alphabet must have at least 2 symbols")
        if not (lm.alpha > 0):
            out.append(f"{tag}: alpha must be strictly positive, got {lm.alpha!r}")
        if not np.all(np.isfinite(lm.table)):
            out.append(f"{tag}: non-finite entries")
            continue
        sums = lm.table.sum(axis=1)
        for j in range(rows):
            if abs(sums[j] - 1.0) > ROW_SUM_TOL:
                out.append(f"{tag}: row {j} sums to {float(sums[j])!r}, expected 1")
        if lm.alpha > 0:
            bad = np.argwhere(lm.table < lm.alpha)
            if bad.size:
                j, z0 = bad[0]
                out.append(
                    f"{tag}: entry ({j},{z0}) = {float(lm.table[j, z0])!r} below the "
                    f"declared full-support bound alpha={lm.alpha!r}"
                )

    if len(cfg.true_states) != n:
        out.append(f"true_states: expected {n} entries, got {len(cfg.true_states)}")
    for k, t in enumerate(cfg.true_states):
        if not (0 <= t < m):
            out.append(f"true_states[{k}]: index {t} out of range for {m} hypotheses")

    if cfg.horizon < 1:
        out.append(f"horizon: must be at least 1, got {cfg.horizon}")
    if not (0 <= cfg.seed < 2**63):
        out.append(f"seed: must be a nonnegative 63-bit integer, got {cfg.seed}")
    if not (0.0 < cfg.epsilon <= 0.5):
        out.append(f"epsilon: must lie in (0, 0.5], got {cfg.epsilon!r}")

    if not cfg.algorithms:
        out.append("algorithms: at least one algorithm must be enabled")
    for a in cfg.algorithms:
        if a not in ALGORITHMS:
            out.append(f"algorithms: unknown name {a!r}")
    if len(set(cfg.algorithms)) != len(cfg.algorithms):
        out.append("algorithms: duplicate names")

    if cfg.wants("static"):
        if cfg.static_weights is None:
            out.append("static_weights: required when the static algorithm is enabled")
        else:
            out.extend(validate_combination_matrix(cfg.static_weights, cfg.graph,
                                                   name="static_weights"))
    return out


# ---------------------------------------------------------------------------
# observation draws

# Streams are counter-based and keyed by (root seed, agent index), so agent
# k's draws are identical no matter how many agents exist, and streams never
# collide across neighbouring root seeds.


def _agent_generator(seed: int, agent: int) -> np.random.Generator:
    key = np.array([seed, agent], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_observation(model: LikelihoodModel, true_state: int,
                       rng: np.random.Generator) -> int:
    """Draw one observation symbol from the row of ``true_state``."""
    if not (0 <= true_state < model.n_hypotheses):
        raise IndexError(f"true_state {true_state} out of range")
    cdf = np.cumsum(model.table[true_state])
    z = int(np.searchsorted(cdf, rng.random(), side="right"))
    return min(z, model.n_observations - 1)


def draw_observations(cfg: ScenarioConfig, horizon: int | None = None) -> np.ndarray:
    """Pre-draw the full observation panel, shape (horizon, n_agents).

    Every algorithm in a run consumes this same panel, so comparisons
    between algorithms are paired.
    """
    t = cfg.horizon if horizon is None else int(horizon)
    n = cfg.n_agents
    obs = np.empty((t, n), dtype=np.int64)
    for k in range(n):
        row = cfg.likelihoods[k].table[cfg.true_states[k]]
        cdf = np.cumsum(row)
        u = _agent_generator(cfg.seed, k).random(t)
        z = np.searchsorted(cdf, u, side="right")
        obs[:, k] = np.minimum(z, cfg.likelihoods[k].n_observations - 1)
    return obs


# ---------------------------------------------------------------------------
# JSON serialization

_SCENARIO_KEYS = {"hypotheses", "graph", "likelihoods", "true_states", "horizon",
                  "seed", "epsilon", "algorithms", "static_weights"}


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    return {
        "hypotheses": {"labels": list(cfg.hypotheses.labels)},
        "graph": {"n_agents": cfg.graph.n_agents,
                  "edges": [list(e) for e in cfg.graph.edges]},
        "likelihoods": [
            {"agent_id": lm.agent_id, "alpha": lm.alpha,
             "table": [list(map(float, row)) for row in lm.table]}
            for lm in cfg.likelihoods
        ],
        "true_states": list(cfg.true_states),
        "horizon": cfg.horizon,
        "seed": cfg.seed,
        "epsilon": cfg.epsilon,
        "algorithms": list(cfg.algorithms),
        "static_weights": None if cfg.static_weights is None
        else [list(map(float, row)) for row in cfg.static_weights],
    }


def _reject_unknown(d: dict, allowed: set[str], where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ValueError(f"{where}: unknown keys {sorted(unknown)}")


def scenario_from_dict(d: dict) -> ScenarioConfig:
    if not isinstance(d, dict):
        raise ValueError("scenario document must be a JSON object")
    _reject_unknown(d, _SCENARIO_KEYS, "scenario")
    missing = _SCENARIO_KEYS - {"static_weights"} - set(d)
    if missing:
        raise ValueError(f"scenario: missing keys {sorted(missing)}")
    _reject_unknown(d["hypotheses"], {"labels"}, "hypotheses")
    _reject_unknown(d["graph"], {"n_agents", "edges"}, "graph")
    hyp = HypothesisSet(tuple(d["hypotheses"]["labels"]))
    graph = NetworkGraph(int(d["graph"]["n_agents"]),
                         tuple((int(a), int(b)) for a, b in d["graph"]["edges"]))
    models = []
    for pos, ld in enumerate(d["likelihoods"]):
        _reject_unknown(ld, {"agent_id", "alpha", "table"}, f"likelihoods[{pos}]")
        models.append(LikelihoodModel(int(ld["agent_id"]), np.array(ld["table"], dtype=float),
                                      float(ld["alpha"])))
    sw = d.get("static_weights")
    return ScenarioConfig(
        hypotheses=hyp,
        graph=graph,
        likelihoods=tuple(models),
        true_states=tuple(int(t) for t in d["true_states"]),
        horizon=int(d["horizon"]),
        seed=int(d["seed"]),
        epsilon=float(d["epsilon"]),
        algorithms=tuple(d["algorithms"]),
        static_weights=None if sw is None else np.array(sw, dtype=float),
    )


def save_scenario(cfg: ScenarioConfig, path) -> None:
    # Full-precision floats on purpose: a saved scenario must parse back to
    # the identical configuration.
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(cfg), fh, indent=2)
        fh.write("\n")


def load_scenario(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return scenario_from_dict(json.load(fh))
