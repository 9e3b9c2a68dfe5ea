"""Belief update rules and the simulation front end.

Three recursions share one observation panel per run:

- noncooperative: each agent does a private Bayes update on its own draw.
- adaptive: agents Bayes-update a cooperative belief, exchange, rebuild
  trust weights from the just-updated private beliefs, then fuse
  neighbors' intermediates geometrically. A thresholded override yields
  the reported global belief: an agent falls back on its private belief
  for any step where the fused belief revives a hypothesis the agent has
  privately all but ruled out.
- static: the same Bayes-then-fuse pipeline with a fixed weight matrix.

Within a step the update order is fixed: cooperative Bayes step first,
then the private Bayes step, then weights from the updated private
beliefs, then fusion. All state is propagated in log space; the fusion
is a weighted arithmetic mean of log beliefs followed by log-space
renormalization, so exponentially small beliefs never underflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend as _backend
from .model import GLOBAL_ALGORITHM, NumericFault, LikelihoodModel, ScenarioConfig, draw_observations

_WEIGHT_TOL = 1e-9


def bayes_update(prior: np.ndarray, model: LikelihoodModel, obs: int) -> np.ndarray:
    """Posterior proportional to likelihood-of-``obs`` times ``prior``.

    Output entries are strictly positive whenever the prior has any
    positive mass, because every likelihood entry is bounded away from
    zero.
    """
    if not (0 <= obs < model.n_observations):
        raise IndexError(f"observation {obs} out of range")
    post = np.asarray(prior, dtype=float) * model.table[:, obs]
    norm = post.sum()
    if norm <= 0.0 or not np.isfinite(norm):
        raise NumericFault("zero or non-finite normalizer in Bayes update")
    return post / norm


def fuse_log_linear(psis: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Geometric fusion of belief vectors with convex weights.

    ``psis`` has one participant per row. Computed as a weighted sum of
    logs with a log-space renormalization, so the output is on the simplex
    even when inputs carry mass as small as 1e-300.
    """
    psis = np.asarray(psis, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if abs(weights.sum() - 1.0) > _WEIGHT_TOL:
        raise ValueError(f"weights sum to {weights.sum()!r}, expected 1")
    if np.any(psis <= 0.0):
        raise ValueError("fusion inputs must be strictly positive")
    combined = weights @ np.log(psis)
    combined -= combined.max()
    lin = np.exp(combined)
    return lin / lin.sum()


def global_belief(pi: np.ndarray, mu: np.ndarray, epsilon: float) -> np.ndarray:
    """Override rule for the reported belief.

    Returns ``pi`` when some hypothesis is simultaneously below the
    threshold privately and above it cooperatively (both comparisons
    strict); otherwise returns ``mu``.
    """
    pi = np.asarray(pi, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if np.any((pi < epsilon) & (mu > epsilon)):
        return pi
    return mu


@dataclass
class Trajectory:
    """Log-belief paths of one run plus the shared observation panel.

    Belief arrays have shape (horizon+1, n_agents, n_hypotheses); row 0 is
    the uniform initialization. Entries are log probabilities. ``a_final``
    is the adaptive weight matrix after the last step and ``weight_gap``
    the per-step sup-norm distance to the supplied limit matrix.
    """

    horizon: int
    epsilon: float
    algorithms: tuple[str, ...]
    obs: np.ndarray
    log_pi: np.ndarray | None
    log_mu: np.ndarray | None
    log_nu: np.ndarray | None
    a_final: np.ndarray | None
    weight_gap: np.ndarray | None
    backend: str

    def log_mu_bar(self) -> np.ndarray:
        """Override applied pointwise along the adaptive trajectory."""
        if self.log_mu is None or self.log_pi is None:
            raise ValueError("adaptive trajectory not recorded")
        pi = np.exp(self.log_pi)
        mu = np.exp(self.log_mu)
        cond = ((pi < self.epsilon) & (mu > self.epsilon)).any(axis=2)
        return np.where(cond[:, :, None], self.log_pi, self.log_mu)

    def log_beliefs(self, algorithm: str) -> np.ndarray:
        if algorithm == "noncooperative" and self.log_pi is not None:
            return self.log_pi
        if algorithm == "adaptive" and self.log_mu is not None:
            return self.log_mu
        if algorithm == "static" and self.log_nu is not None:
            return self.log_nu
        if algorithm == GLOBAL_ALGORITHM:
            return self.log_mu_bar()
        raise KeyError(f"no trajectory recorded for algorithm {algorithm!r}")

    def beliefs(self, algorithm: str) -> np.ndarray:
        return np.exp(self.log_beliefs(algorithm))

    def recorded_algorithms(self) -> tuple[str, ...]:
        out = [a for a in self.algorithms if a != "adaptive"]
        if "adaptive" in self.algorithms:
            out += ["adaptive", GLOBAL_ALGORITHM]
        order = ("noncooperative", "static", "adaptive", GLOBAL_ALGORITHM)
        return tuple(a for a in order if a in out)

    def log_ratio(self, algorithm: str, hyp: int, other: int) -> np.ndarray:
        """Per-step, per-agent log belief ratio between two hypotheses."""
        lb = self.log_beliefs(algorithm)
        return lb[:, :, hyp] - lb[:, :, other]


def simulate(cfg: ScenarioConfig, obs: np.ndarray | None = None,
             a_inf: np.ndarray | None = None,
             backend: str | None = None) -> Trajectory:
    """Run every enabled algorithm of a validated scenario.

    ``obs`` replays a recorded panel instead of drawing from the seed;
    ``a_inf`` enables the per-step weight-gap series.
    """
    if obs is None:
        obs = draw_observations(cfg)
    obs = np.ascontiguousarray(obs, dtype=np.int64)
    if obs.shape[1] != cfg.n_agents:
        raise ValueError("observation panel does not match the agent count")

    kern = _backend.get_backend(backend)
    want_adaptive = cfg.wants("adaptive")
    want_pi = cfg.wants("noncooperative")
    a_static = cfg.static_weights if cfg.wants("static") else None

    res = kern.simulate_paths(
        _pack_log_tables(cfg), obs, cfg.graph.adjacency(),
        want_pi, want_adaptive, a_static,
        a_inf if want_adaptive else None,
    )
    for key in ("log_pi", "log_mu", "log_nu"):
        arr = res[key]
        if arr is not None and not np.all(np.isfinite(arr)):
            raise NumericFault(f"non-finite values in the {key} trajectory")
    return Trajectory(
        horizon=obs.shape[0],
        epsilon=cfg.epsilon,
        algorithms=cfg.algorithms,
        obs=obs,
        log_pi=res["log_pi"] if (want_pi or want_adaptive) else None,
        log_mu=res["log_mu"],
        log_nu=res["log_nu"],
        a_final=res["a_final"],
        weight_gap=res["weight_gap"],
        backend=kern.NAME,
    )


def _pack_log_tables(cfg: ScenarioConfig) -> np.ndarray:
    """Stack per-agent log tables into one dense array.

    Alphabets may differ in size across agents; shorter tables are padded
    with zeros, which are never indexed because each agent's observations
    stay inside its own alphabet.
    """
    n = cfg.n_agents
    m = cfg.n_hypotheses
    zmax = max(lm.n_observations for lm in cfg.likelihoods)
    packed = np.zeros((n, m, zmax))
    for k, lm in enumerate(cfg.likelihoods):
        packed[k, :, : lm.n_observations] = np.log(lm.table)
    return packed
