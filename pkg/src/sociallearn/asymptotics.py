"""Closed-form steady-state objects for a scenario.

Everything here is computed without simulation: which hypotheses an agent
can never tell apart from its true one, the limit of the adaptive weight
matrix, its decomposition into sub-networks with their Perron vectors, the
centrality-weighted confidence each sub-network assigns to every
hypothesis, the exact predicate for every agent learning its own true
hypothesis, and worst-case rejection-rate constants.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .model import LikelihoodModel, NetworkGraph, NumericFault, ScenarioConfig

ROW_MATCH_TOL = 1e-12
PERRON_RESIDUAL_TOL = 1e-10
CONFIDENCE_TIE_TOL = 1e-12


def observationally_equivalent_set(model: LikelihoodModel, true_state: int,
                                   tol: float = ROW_MATCH_TOL) -> frozenset[int]:
    """Hypotheses whose likelihood row matches the true row entrywise.

    The agent's own observations carry no information against these, so
    the set always contains the true hypothesis itself.
    """
    row = model.table[true_state]
    hits = np.max(np.abs(model.table - row[None, :]), axis=1) <= tol
    return frozenset(int(j) for j in np.nonzero(hits)[0])


def equivalent_sets(cfg: ScenarioConfig, tol: float = ROW_MATCH_TOL) -> tuple[frozenset[int], ...]:
    return tuple(
        observationally_equivalent_set(lm, cfg.true_states[k], tol)
        for k, lm in enumerate(cfg.likelihoods)
    )


def kl_divergence(model: LikelihoodModel, true_state: int, hyp: int) -> float:
    """Divergence of the hypothesis row from the true row, in nats."""
    p = model.table[true_state]
    q = model.table[hyp]
    return float(np.sum(p * (np.log(p) - np.log(q))))


def divergence_matrix(cfg: ScenarioConfig) -> np.ndarray:
    """Entry (k, j): divergence of hypothesis j for agent k."""
    out = np.empty((cfg.n_agents, cfg.n_hypotheses))
    for k, lm in enumerate(cfg.likelihoods):
        for j in range(cfg.n_hypotheses):
            out[k, j] = kl_divergence(lm, cfg.true_states[k], j)
    return out


# ---------------------------------------------------------------------------
# limiting weights

def limiting_matrix_exact(sets: tuple[frozenset[int], ...],
                          graph: NetworkGraph) -> list[list[Fraction]]:
    """Limit of the adaptive weights, in exact rational arithmetic.

    The limiting inner product of two agents' local beliefs is
    ``|intersection| / (|set_k| * |set_l|)``; columns are then normalized
    the same way the running weights are.
    """
    n = graph.n_agents
    a = [[Fraction(0) for _ in range(n)] for _ in range(n)]
    for k in range(n):
        sigma = Fraction(1)
        etas = {}
        for l in graph.neighbors(k):
            eta = Fraction(len(sets[k] & sets[l]), len(sets[k]) * len(sets[l]))
            etas[l] = eta
            sigma += eta
        for l, eta in etas.items():
            a[l][k] = eta / sigma
        a[k][k] = 1 / sigma
    return a


def limiting_matrix(sets: tuple[frozenset[int], ...], graph: NetworkGraph) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in limiting_matrix_exact(sets, graph)])


# ---------------------------------------------------------------------------
# decomposition

@dataclass(frozen=True)
class Decomposition:
    """Sub-networks of a limit weight matrix and their Perron vectors.

    ``components`` partitions the agents; ``perron[s]`` is the positive,
    sum-one vector ``p`` with ``A_s p = p`` for the block restriction
    ``A_s``.
    """

    matrix: np.ndarray
    components: tuple[tuple[int, ...], ...]
    perron: tuple[np.ndarray, ...]

    @property
    def n_components(self) -> int:
        return len(self.components)

    def component_of(self, agent: int) -> int:
        for s, comp in enumerate(self.components):
            if agent in comp:
                return s
        raise KeyError(agent)

    def projector(self) -> np.ndarray:
        """Row-wise limit of repeated column-stochastic averaging.

        Within a block every row equals the block's Perron vector; entries
        across blocks are zero.
        """
        n = self.matrix.shape[0]
        out = np.zeros((n, n))
        for comp, p in zip(self.components, self.perron):
            for k in comp:
                out[k, list(comp)] = p
        return out


def _perron_power(sub: np.ndarray, tol: float = 1e-12, max_iter: int = 200_000) -> np.ndarray:
    n = sub.shape[0]
    p = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = sub @ p
        nxt /= nxt.sum()
        if np.max(np.abs(sub @ nxt - nxt)) < tol:
            return nxt
        p = nxt
    raise NumericFault("power iteration did not converge")


def _perron_solve(sub: np.ndarray) -> np.ndarray:
    # (A - I) p = 0 with the sum-one constraint replacing one row
    n = sub.shape[0]
    b = sub - np.eye(n)
    b[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        return np.linalg.solve(b, rhs)
    except np.linalg.LinAlgError:
        sol, *_ = np.linalg.lstsq(b, rhs, rcond=None)
        return sol


def decompose(a_inf: np.ndarray) -> Decomposition:
    """Split a limit matrix into its sub-networks and solve each one.

    Requires the off-diagonal zero pattern to be symmetric, which holds
    for every matrix produced by the weight limit over an undirected
    graph. Each block's Perron vector is found by power iteration and
    cross-checked against a direct linear solve.
    """
    a = np.asarray(a_inf, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    support = a != 0.0
    if not np.array_equal(support, support.T):
        raise ValueError("off-diagonal zero pattern is not symmetric")

    seen = [False] * n
    comps: list[tuple[int, ...]] = []
    for start in range(n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            k = stack.pop()
            comp.append(k)
            for l in range(n):
                if support[l, k] and not seen[l]:
                    seen[l] = True
                    stack.append(l)
        comps.append(tuple(sorted(comp)))
    comps.sort()

    perron = []
    for comp in comps:
        sub = a[np.ix_(comp, comp)]
        p = _perron_power(sub)
        p_direct = _perron_solve(sub)
        if np.max(np.abs(p - p_direct)) > PERRON_RESIDUAL_TOL:
            raise NumericFault(
                "power iteration and direct solve disagree on a Perron vector"
            )
        if np.max(np.abs(sub @ p - p)) > PERRON_RESIDUAL_TOL or np.any(p <= 0):
            raise NumericFault("invalid Perron vector")
        perron.append(p)
    return Decomposition(matrix=a, components=tuple(comps), perron=tuple(perron))


# ---------------------------------------------------------------------------
# confidences and the consistency predicate

@dataclass(frozen=True)
class ComponentConfidence:
    agents: tuple[int, ...]
    values: np.ndarray
    best: tuple[int, ...]


def subnetwork_confidence(decomp: Decomposition, divergences: np.ndarray,
                          tie_tol: float = CONFIDENCE_TIE_TOL) -> tuple[ComponentConfidence, ...]:
    """Centrality-weighted negative divergence of every hypothesis.

    ``best`` is the arg-max set with ties kept; it is where the
    cooperative beliefs of the block concentrate.
    """
    out = []
    for comp, p in zip(decomp.components, decomp.perron):
        vals = -(p[None, :] @ divergences[list(comp), :])[0]
        top = vals.max()
        best = tuple(int(j) for j in np.nonzero(vals >= top - tie_tol)[0])
        out.append(ComponentConfidence(agents=comp, values=vals, best=best))
    return tuple(out)


@dataclass(frozen=True)
class ConsistencyReport:
    """Exact predicate for every agent learning its own true hypothesis.

    ``disjoint_ok``: neighbors with different true hypotheses have
    disjoint equivalent sets. ``intersection_ok``: within every
    sub-network the equivalent sets intersect exactly in the members'
    common true hypothesis. Both must hold.
    """

    disjoint_ok: bool
    disjoint_witnesses: tuple[tuple[int, int], ...]
    intersection_ok: bool
    intersection_witnesses: tuple[tuple[int, tuple[int, ...]], ...]

    @property
    def globally_consistent(self) -> bool:
        return self.disjoint_ok and self.intersection_ok


def check_consistency(sets: tuple[frozenset[int], ...], graph: NetworkGraph,
                      true_states: tuple[int, ...],
                      decomp: Decomposition) -> ConsistencyReport:
    bad_pairs = []
    for k, l in graph.edges:
        if true_states[k] != true_states[l] and sets[k] & sets[l]:
            bad_pairs.append((k, l))

    bad_comps = []
    for s, comp in enumerate(decomp.components):
        inter = frozenset.intersection(*(sets[k] for k in comp))
        wanted = {true_states[k] for k in comp}
        if not (len(wanted) == 1 and inter == wanted):
            bad_comps.append((s, tuple(sorted(inter))))

    return ConsistencyReport(
        disjoint_ok=not bad_pairs,
        disjoint_witnesses=tuple(bad_pairs),
        intersection_ok=not bad_comps,
        intersection_witnesses=tuple(bad_comps),
    )


# ---------------------------------------------------------------------------
# rejection-rate constants

@dataclass(frozen=True)
class RateConstants:
    """Worst-case decay constants for one agent's private belief.

    ``rejectable`` is False when the agent can reject nothing on its own;
    the constants are None in that case. ``x`` is the (negative) dominant
    exponent per step, ``y`` the positive concentration rate.
    """

    rejectable: bool
    x: float | None
    y: float | None


@dataclass(frozen=True)
class PairRateConstants:
    rejectable: bool
    c: float | None
    d: float | None


def rejection_rates(model: LikelihoodModel, true_state: int,
                    alpha: float | None = None) -> RateConstants:
    if alpha is None:
        alpha = model.alpha
    eq = observationally_equivalent_set(model, true_state)
    rest = [j for j in range(model.n_hypotheses) if j not in eq]
    if not rest:
        return RateConstants(rejectable=False, x=None, y=None)
    dmin = min(kl_divergence(model, true_state, j) for j in rest)
    return RateConstants(
        rejectable=True,
        x=-0.5 * dmin,
        y=dmin**2 / (8.0 * np.log(alpha) ** 2),
    )


def pairwise_rejection_rates(model_k: LikelihoodModel, true_k: int,
                             model_l: LikelihoodModel, true_l: int,
                             alpha: float | None = None) -> PairRateConstants:
    """Joint rejection constants for a cooperating pair.

    The minimization runs over hypotheses outside the intersection of the
    two equivalent sets, the ones at least one of the pair can reject.
    """
    if alpha is None:
        alpha = min(model_k.alpha, model_l.alpha)
    eq = (observationally_equivalent_set(model_k, true_k)
          & observationally_equivalent_set(model_l, true_l))
    rest = [j for j in range(model_k.n_hypotheses) if j not in eq]
    if not rest:
        return PairRateConstants(rejectable=False, c=None, d=None)
    sums = []
    sqsums = []
    for j in rest:
        dk = kl_divergence(model_k, true_k, j)
        dl = kl_divergence(model_l, true_l, j)
        sums.append(dk + dl)
        sqsums.append(dk**2 + dl**2)
    return PairRateConstants(
        rejectable=True,
        c=0.5 * min(sums),
        d=min(sqsums) / (32.0 * np.log(alpha) ** 2),
    )
