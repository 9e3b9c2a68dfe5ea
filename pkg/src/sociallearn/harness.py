"""Scenario presets, run orchestration, diagnostics, and result output.

A run executes every enabled algorithm on one shared observation panel, so
algorithm comparisons are paired draw for draw. Summaries, rate fits, the
weight-gap series, and the fixed-weight reference recursion are derived
here from recorded trajectories.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import backend as _backend
from .asymptotics import (
    check_consistency,
    decompose,
    divergence_matrix,
    equivalent_sets,
    limiting_matrix,
    limiting_matrix_exact,
    rejection_rates,
    subnetwork_confidence,
)
from .dynamics import Trajectory, simulate, _pack_log_tables
from .model import (
    GLOBAL_ALGORITHM,
    HypothesisSet,
    LikelihoodModel,
    NetworkGraph,
    ScenarioConfig,
    draw_observations,
    validate_scenario,
)

HIT_THRESHOLD = 0.99
SUSTAIN_STEPS = 10
FULL_RECORD_LIMIT = 2000
THIN_STRIDE = 10
RATE_FIT_MIN_HORIZON = 500


class ScenarioError(ValueError):
    """A scenario failed validation; one message per violation."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = tuple(violations)


# ---------------------------------------------------------------------------
# presets and generators

# Ten-agent benchmark topology: agents 0-4 form one cluster, agents 5-9 the
# other, with four bridging edges. Agent 0 is the best connected agent and
# agent 5 the least connected, which the unidentifiable preset relies on.
TWO_CLUSTER_EDGES: tuple[tuple[int, int], ...] = (
    (0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (3, 4),
    (5, 6), (6, 7), (7, 8), (8, 9), (6, 9),
    (0, 6), (0, 8), (1, 7), (4, 9),
)

TRIANGLE_EDGES: tuple[tuple[int, int], ...] = ((0, 1), (0, 2), (1, 2))

VARIANTS = ("triangle-consistent", "triangle-consensus", "distinct-states",
            "two-groups", "unidentifiable")


def peaked_rows(m: int, z: int, q: float) -> np.ndarray:
    """Identifying table: hypothesis j puts mass q on symbol j, the rest
    spread evenly. All rows distinct, so the agent can reject every false
    hypothesis alone."""
    if not (0.0 < q < 1.0):
        raise ValueError("q must lie in (0, 1)")
    if m > z:
        raise ValueError("need at least as many symbols as hypotheses")
    table = np.full((m, z), (1.0 - q) / (z - 1))
    table[np.arange(m), np.arange(m)] = q
    return table


def uniform_rows(m: int, z: int) -> np.ndarray:
    """Uninformative table: every row uniform, nothing is distinguishable."""
    return np.full((m, z), 1.0 / z)


def block_uniform_rows(m: int, z: int, q: float, uniform_block: range) -> np.ndarray:
    """Peaked table with the rows of ``uniform_block`` flattened to uniform,
    making exactly that block mutually indistinguishable."""
    table = peaked_rows(m, z, q)
    for j in uniform_block:
        table[j] = 1.0 / z
    return table


def _alpha(table: np.ndarray) -> float:
    return float(table.min())


def _config(tables: list[np.ndarray], edges, true_states, horizon, seed, epsilon) -> ScenarioConfig:
    models = tuple(
        LikelihoodModel(agent_id=k, table=t, alpha=_alpha(t)) for k, t in enumerate(tables)
    )
    cfg = ScenarioConfig(
        hypotheses=HypothesisSet.default(tables[0].shape[0]),
        graph=NetworkGraph(len(tables), tuple(edges)),
        likelihoods=models,
        true_states=tuple(true_states),
        horizon=horizon,
        seed=seed,
        epsilon=epsilon,
    )
    return cfg.with_uniform_static_weights()


def generate_scenario(variant: str, q: float | None = None,
                      horizon: int | None = None, seed: int = 1,
                      epsilon: float = 1e-3) -> ScenarioConfig:
    """Build one of the named benchmark scenarios.

    triangle-consistent: three agents, two of them sharing a true
    hypothesis that one cannot identify alone; cooperation resolves it and
    the weight limit splits the triangle into two sub-networks.

    triangle-consensus: one uninformative agent bridging two conflicting
    informed agents; the network reaches consensus on the hypothesis of
    the more informative agent.

    distinct-states: ten identifying agents with ten distinct true
    hypotheses on the two-cluster topology.

    two-groups: two five-agent state groups; group members other than the
    anchors (agents 0 and 5) can only localize their truth to their own
    group's hypotheses.

    unidentifiable: only the anchors observe anything informative;
    everyone else has uniform rows.
    """
    if variant == "triangle-consistent":
        qq = 0.6 if q is None else q
        a0 = np.array([[0.6, 0.2, 0.2], [0.6, 0.2, 0.2], [0.2, 0.6, 0.2]])
        tables = [a0, peaked_rows(3, 3, qq), peaked_rows(3, 3, qq)]
        return _config(tables, TRIANGLE_EDGES, (1, 1, 2),
                       500 if horizon is None else horizon, seed, epsilon)
    if variant == "triangle-consensus":
        tables = [uniform_rows(3, 3), peaked_rows(3, 3, 0.45), peaked_rows(3, 3, 0.7)]
        return _config(tables, TRIANGLE_EDGES, (0, 1, 2),
                       1000 if horizon is None else horizon, seed, epsilon)

    qq = 0.28 if q is None else q
    if variant == "distinct-states":
        tables = [peaked_rows(10, 10, qq) for _ in range(10)]
        return _config(tables, TWO_CLUSTER_EDGES, tuple(range(10)),
                       2000 if horizon is None else horizon, seed, epsilon)
    if variant == "two-groups":
        tables = [peaked_rows(10, 10, qq)]
        tables += [block_uniform_rows(10, 10, qq, range(0, 5)) for _ in range(4)]
        tables += [peaked_rows(10, 10, qq)]
        tables += [block_uniform_rows(10, 10, qq, range(5, 10)) for _ in range(4)]
        return _config(tables, TWO_CLUSTER_EDGES, (0,) * 5 + (5,) * 5,
                       1000 if horizon is None else horizon, seed, epsilon)
    if variant == "unidentifiable":
        tables = [peaked_rows(10, 10, qq)] + [uniform_rows(10, 10) for _ in range(4)]
        tables += [peaked_rows(10, 10, qq)] + [uniform_rows(10, 10) for _ in range(4)]
        return _config(tables, TWO_CLUSTER_EDGES, (0,) * 5 + (5,) * 5,
                       3000 if horizon is None else horizon, seed, epsilon)
    raise ValueError(f"unknown variant {variant!r}; choices: {VARIANTS}")


# ---------------------------------------------------------------------------
# run orchestration

@dataclass(frozen=True)
class AgentOutcome:
    final: np.ndarray
    final_true: float
    hit: bool
    time_to_threshold: int | None


@dataclass
class RunResult:
    cfg: ScenarioConfig
    trajectory: Trajectory
    summary: dict[str, tuple[AgentOutcome, ...]]
    a_inf: np.ndarray | None
    rate_fits: tuple[dict, ...]

    @property
    def weight_gap(self) -> np.ndarray | None:
        return self.trajectory.weight_gap


def time_to_threshold(series: np.ndarray, threshold: float = HIT_THRESHOLD,
                      sustain: int = SUSTAIN_STEPS) -> int | None:
    """First step whose belief exceeds the threshold and stays above it for
    ``sustain`` consecutive steps. None when that never happens."""
    ok = np.asarray(series) > threshold
    if ok.size < sustain:
        return None
    windows = np.lib.stride_tricks.sliding_window_view(ok, sustain).all(axis=1)
    idx = np.nonzero(windows)[0]
    return int(idx[0]) if idx.size else None


def _summarize(cfg: ScenarioConfig, traj: Trajectory) -> dict[str, tuple[AgentOutcome, ...]]:
    out: dict[str, tuple[AgentOutcome, ...]] = {}
    for alg in traj.recorded_algorithms():
        beliefs = traj.beliefs(alg)
        agents = []
        for k in range(cfg.n_agents):
            true = cfg.true_states[k]
            series = beliefs[:, k, true]
            final = beliefs[-1, k]
            agents.append(AgentOutcome(
                final=final,
                final_true=float(series[-1]),
                hit=bool(series[-1] > HIT_THRESHOLD),
                time_to_threshold=time_to_threshold(series),
            ))
        out[alg] = tuple(agents)
    return out


def empirical_rate_fit(traj: Trajectory, agent: int, hyp: int,
                       rejectable: frozenset[int] | None = None) -> float:
    """Least-squares slope of the private log belief of one hypothesis over
    the trailing 80 percent of steps. Only defined for hypotheses the agent
    can reject on its own and for horizons long enough to average out noise."""
    if traj.log_pi is None:
        raise ValueError("private beliefs were not recorded")
    t = traj.horizon
    if t < RATE_FIT_MIN_HORIZON:
        raise ValueError(f"horizon {t} too short for a rate fit")
    if rejectable is not None and hyp in rejectable:
        raise ValueError(f"hypothesis {hyp} is not rejectable for agent {agent}")
    start = t - int(0.8 * t)
    steps = np.arange(start, t + 1)
    return float(np.polyfit(steps, traj.log_pi[start:, agent, hyp], 1)[0])


def run_scenario(cfg: ScenarioConfig, backend: str | None = None,
                 obs: np.ndarray | None = None) -> RunResult:
    """Validate, simulate, and summarize one scenario."""
    violations = validate_scenario(cfg)
    if violations:
        raise ScenarioError(violations)

    a_inf = None
    if cfg.wants("adaptive"):
        a_inf = limiting_matrix(equivalent_sets(cfg), cfg.graph)
    traj = simulate(cfg, obs=obs, a_inf=a_inf, backend=backend)
    summary = _summarize(cfg, traj)

    fits: list[dict] = []
    if traj.log_pi is not None and traj.horizon >= RATE_FIT_MIN_HORIZON:
        sets = equivalent_sets(cfg)
        div = divergence_matrix(cfg)
        for k in range(cfg.n_agents):
            for j in range(cfg.n_hypotheses):
                if j in sets[k]:
                    continue
                fits.append({
                    "agent": k,
                    "hypothesis": j,
                    "slope": empirical_rate_fit(traj, k, j, sets[k]),
                    "expected": -float(div[k, j]),
                })
    return RunResult(cfg=cfg, trajectory=traj, summary=summary,
                     a_inf=a_inf, rate_fits=tuple(fits))


def steady_state_reference(cfg: ScenarioConfig, a_inf: np.ndarray,
                           obs: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Replay recorded draws through the fixed-weight recursion at the
    weight limit. Returns the log-belief trajectory."""
    obs = np.ascontiguousarray(obs, dtype=np.int64)
    if obs.shape[1] != cfg.n_agents or np.asarray(a_inf).shape != (cfg.n_agents,) * 2:
        raise ValueError("dimension mismatch with the recorded draws")
    kern = _backend.get_backend(backend)
    res = kern.simulate_paths(
        _pack_log_tables(cfg), obs, cfg.graph.adjacency(),
        False, False, np.asarray(a_inf, dtype=float), None,
    )
    return res["log_nu"]


def tracking_gap(log_mu: np.ndarray, log_ref: np.ndarray) -> np.ndarray:
    """Per-step sup over agents and hypothesis pairs of the difference in
    log belief ratios between a trajectory and its fixed-weight reference.

    Using per-agent ranges of the log-belief difference avoids forming all
    ordered pairs explicitly; the two are equal because normalizers cancel
    in ratios.
    """
    delta = log_mu - log_ref
    spread = delta.max(axis=2) - delta.min(axis=2)
    return spread.max(axis=1)


# ---------------------------------------------------------------------------
# Monte Carlo

@dataclass
class MonteCarloResult:
    """Stacked per-seed outcomes; axis 0 of every array follows ``seeds``."""

    seeds: tuple[int, ...]
    finals: dict[str, np.ndarray]
    hits: dict[str, np.ndarray]
    times: dict[str, np.ndarray]
    weight_gap_final: np.ndarray | None

    def hit_rate(self, algorithm: str) -> np.ndarray:
        return self.hits[algorithm].mean(axis=0)

    def mean_time_to_threshold(self, algorithm: str) -> np.ndarray:
        # mean over the seeds that reached the threshold; nan when none did
        t = self.times[algorithm]
        out = np.full(t.shape[1], math.nan)
        for k in range(t.shape[1]):
            finite = t[np.isfinite(t[:, k]), k]
            if finite.size:
                out[k] = finite.mean()
        return out


def monte_carlo(cfg: ScenarioConfig, n_seeds: int,
                seeds: tuple[int, ...] | None = None,
                backend: str | None = None) -> MonteCarloResult:
    """Run the scenario over consecutive seeds and stack the outcomes.

    Aggregation is keyed by seed value, so a permuted seed list produces
    identical results.
    """
    if seeds is None:
        if n_seeds < 1:
            raise ValueError("n_seeds must be at least 1")
        seeds = tuple(cfg.seed + i for i in range(n_seeds))
    ordered = tuple(sorted(seeds))
    results = {s: run_scenario(cfg.override(seed=s), backend=backend) for s in seeds}

    algs = results[ordered[0]].trajectory.recorded_algorithms()
    finals = {a: [] for a in algs}
    hits = {a: [] for a in algs}
    times = {a: [] for a in algs}
    gaps = []
    for s in ordered:
        r = results[s]
        for a in algs:
            outcomes = r.summary[a]
            finals[a].append(np.stack([o.final for o in outcomes]))
            hits[a].append([o.hit for o in outcomes])
            times[a].append([math.nan if o.time_to_threshold is None
                             else float(o.time_to_threshold) for o in outcomes])
        if r.weight_gap is not None:
            gaps.append(float(r.weight_gap[-1]))
    return MonteCarloResult(
        seeds=ordered,
        finals={a: np.stack(v) for a, v in finals.items()},
        hits={a: np.array(v, dtype=bool) for a, v in hits.items()},
        times={a: np.array(v) for a, v in times.items()},
        weight_gap_final=np.array(gaps) if gaps else None,
    )


# ---------------------------------------------------------------------------
# closed-form analysis payload

def _fraction_strings(rows) -> list[list[str]]:
    return [[str(x) for x in row] for row in rows]


def analyze_scenario(cfg: ScenarioConfig) -> dict:
    """Closed-form steady-state report for a scenario, JSON-ready.

    Covers the equivalent sets, the exact weight limit, its sub-network
    decomposition with Perron vectors, per-component confidences with the
    predicted consensus hypotheses, the global-consistency predicate with
    witnesses, and per-agent rejection-rate constants.
    """
    violations = validate_scenario(cfg)
    if violations:
        raise ScenarioError(violations)
    sets = equivalent_sets(cfg)
    a_exact = limiting_matrix_exact(sets, cfg.graph)
    a_inf = limiting_matrix(sets, cfg.graph)
    decomp = decompose(a_inf)
    div = divergence_matrix(cfg)
    confidences = subnetwork_confidence(decomp, div)
    consistency = check_consistency(sets, cfg.graph, cfg.true_states, decomp)
    labels = cfg.hypotheses.labels

    rates = []
    for k, lm in enumerate(cfg.likelihoods):
        rc = rejection_rates(lm, cfg.true_states[k])
        rates.append({"agent": k, "rejectable": rc.rejectable, "x": rc.x, "y": rc.y})

    payload = {
        "n_agents": cfg.n_agents,
        "hypotheses": list(labels),
        "true_states": [labels[t] for t in cfg.true_states],
        "equivalent_sets": [sorted(labels[j] for j in s) for s in sets],
        "limit_weights": [[float(x) for x in row] for row in a_inf],
        "limit_weights_exact": _fraction_strings(a_exact),
        "components": [list(c) for c in decomp.components],
        "perron": [[float(x) for x in p] for p in decomp.perron],
        "projector": [[float(x) for x in row] for row in decomp.projector()],
        "confidence": [
            {
                "agents": list(c.agents),
                "values": {labels[j]: float(v) for j, v in enumerate(c.values)},
                "best": [labels[j] for j in c.best],
            }
            for c in confidences
        ],
        "consistency": {
            "disjoint_ok": consistency.disjoint_ok,
            "disjoint_witnesses": [list(w) for w in consistency.disjoint_witnesses],
            "intersection_ok": consistency.intersection_ok,
            "intersection_witnesses": [
                {"component": s, "intersection": [labels[j] for j in inter]}
                for s, inter in consistency.intersection_witnesses
            ],
            "globally_consistent": consistency.globally_consistent,
        },
        "rejection_rates": rates,
    }

    if cfg.static_weights is not None:
        sdec = decompose(np.asarray(cfg.static_weights))
        sconf = subnetwork_confidence(sdec, div)
        payload["static"] = {
            "components": [list(c) for c in sdec.components],
            "perron": [[float(x) for x in p] for p in sdec.perron],
            "best": [[labels[j] for j in c.best] for c in sconf],
        }
    return payload


# ---------------------------------------------------------------------------
# output files

def fmt12(x: float) -> str:
    return format(float(x), ".12g")


def round12(obj):
    """Recursively shorten floats to 12 significant digits for reports."""
    if isinstance(obj, float):
        return float(fmt12(obj))
    if isinstance(obj, dict):
        return {k: round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round12(v) for v in obj]
    return obj


def recorded_steps(horizon: int, thin: int | None = None) -> np.ndarray:
    """Steps written to CSV. Default: every step up to 2000, every 10th
    after, always including the final step. A positive ``thin`` records
    every thin-th step instead."""
    if thin is not None and thin > 0:
        idx = set(range(0, horizon + 1, thin))
    else:
        idx = set(range(0, min(horizon, FULL_RECORD_LIMIT) + 1))
        idx.update(range(0, horizon + 1, THIN_STRIDE))
    idx.update((0, horizon))
    return np.array(sorted(idx), dtype=np.int64)


def write_trajectory_csv(path, cfg: ScenarioConfig, traj: Trajectory,
                         thin: int | None = None) -> None:
    steps = recorded_steps(traj.horizon, thin)
    labels = cfg.hypotheses.labels
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "agent", "algorithm", "hypothesis", "belief"])
        for alg in traj.recorded_algorithms():
            beliefs = traj.beliefs(alg)[steps]
            for si, step in enumerate(steps):
                for k in range(cfg.n_agents):
                    row = beliefs[si, k]
                    for j, label in enumerate(labels):
                        writer.writerow([int(step), k, alg, label, fmt12(row[j])])


def build_run_summary(result: RunResult, thin: int | None = None) -> dict:
    cfg = result.cfg
    labels = cfg.hypotheses.labels
    traj = result.trajectory
    agents = []
    for k in range(cfg.n_agents):
        per_alg = {}
        for alg, outcomes in result.summary.items():
            o = outcomes[k]
            per_alg[alg] = {
                "final_belief_true": o.final_true,
                "hit": o.hit,
                "time_to_threshold": o.time_to_threshold,
            }
        agents.append({
            "agent": k,
            "true_hypothesis": labels[cfg.true_states[k]],
            "algorithms": per_alg,
        })
    payload = {
        "horizon": traj.horizon,
        "seed": cfg.seed,
        "epsilon": cfg.epsilon,
        "backend": traj.backend,
        "agents": agents,
        "rate_fits": [
            {"agent": f["agent"], "hypothesis": labels[f["hypothesis"]],
             "slope": f["slope"], "expected": f["expected"]}
            for f in result.rate_fits
        ],
    }
    if traj.weight_gap is not None:
        steps = recorded_steps(traj.horizon, thin)
        payload["weight_gap"] = {
            "steps": [int(s) for s in steps],
            "values": [float(traj.weight_gap[s]) for s in steps],
            "final": float(traj.weight_gap[-1]),
        }
    return round12(payload)


def build_monte_carlo_summary(cfg: ScenarioConfig, mc: MonteCarloResult) -> dict:
    labels = cfg.hypotheses.labels
    agents = []
    for k in range(cfg.n_agents):
        per_alg = {}
        for alg in mc.hits:
            t = mc.times[alg][:, k]
            finite = t[np.isfinite(t)]
            per_alg[alg] = {
                "hit_rate": float(mc.hits[alg][:, k].mean()),
                "mean_time_to_threshold": float(finite.mean()) if finite.size else None,
                "mean_final_belief_true": float(
                    mc.finals[alg][:, k, cfg.true_states[k]].mean()),
            }
        agents.append({
            "agent": k,
            "true_hypothesis": labels[cfg.true_states[k]],
            "algorithms": per_alg,
        })
    payload = {
        "seeds": list(mc.seeds),
        "agents": agents,
    }
    if mc.weight_gap_final is not None and mc.weight_gap_final.size:
        g = mc.weight_gap_final
        payload["weight_gap_final"] = {
            "median": float(np.median(g)),
            "q10": float(np.quantile(g, 0.1)),
            "q90": float(np.quantile(g, 0.9)),
            "max": float(g.max()),
        }
    return round12(payload)
