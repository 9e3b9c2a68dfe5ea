"""Pure numpy simulation kernel.

Fallback used when the compiled extension is unavailable, and the ground
truth the compiled kernel is tested against. All belief state lives in log
space; linear probabilities appear only inside the weight computation,
where underflow to zero is the correct limiting behavior (the column
normalizer is always at least one).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

NAME = "python"


def _rownorm(x: np.ndarray) -> np.ndarray:
    # log-space renormalization of each row onto the simplex
    m = x.max(axis=1, keepdims=True)
    return x - (m + np.log(np.exp(x - m).sum(axis=1, keepdims=True)))


def _adaptive_from(pi_lin: np.ndarray, adjacency: np.ndarray) -> np.ndarray:
    s = (pi_lin @ pi_lin.T) * adjacency
    sigma = 1.0 + s.sum(axis=0)
    a = s / sigma[None, :]
    np.fill_diagonal(a, 1.0 / sigma)
    return a


def simulate_paths(
    log_lik: np.ndarray,
    obs: np.ndarray,
    adjacency: np.ndarray,
    want_pi: bool,
    want_adaptive: bool,
    a_static: np.ndarray | None,
    a_inf: np.ndarray | None,
) -> dict:
    """Run every enabled recursion over a shared observation panel.

    ``log_lik`` is (n_agents, n_hyp, max_alphabet) with per-agent tables
    left-aligned; padding columns are never indexed because observations
    stay inside each agent's alphabet. Returns log-belief trajectories of
    shape (horizon+1, n_agents, n_hyp), the final adaptive matrix, and the
    per-step sup-norm gap between the adaptive matrix and ``a_inf``.
    """
    t, n = obs.shape
    m = log_lik.shape[1]
    need_pi = want_pi or want_adaptive
    log_u = np.full((n, m), -np.log(m))

    traj_pi = np.empty((t + 1, n, m)) if need_pi else None
    traj_mu = np.empty((t + 1, n, m)) if want_adaptive else None
    traj_nu = np.empty((t + 1, n, m)) if a_static is not None else None
    gap = np.empty(t + 1) if (want_adaptive and a_inf is not None) else None

    log_pi = log_u.copy()
    log_mu = log_u.copy()
    log_nu = log_u.copy()
    if need_pi:
        traj_pi[0] = log_pi
    if want_adaptive:
        traj_mu[0] = log_mu
    if traj_nu is not None:
        traj_nu[0] = log_nu

    a = None
    if want_adaptive:
        a = _adaptive_from(np.exp(log_pi), adjacency)
        if gap is not None:
            gap[0] = np.abs(a - a_inf).max()

    agents = np.arange(n)
    for i in range(1, t + 1):
        ll = log_lik[agents, :, obs[i - 1]]
        if want_adaptive:
            log_psi = _rownorm(log_mu + ll)
        if need_pi:
            log_pi = _rownorm(log_pi + ll)
            traj_pi[i] = log_pi
        if want_adaptive:
            a = _adaptive_from(np.exp(log_pi), adjacency)
            log_mu = _rownorm(a.T @ log_psi)
            traj_mu[i] = log_mu
            if gap is not None:
                gap[i] = np.abs(a - a_inf).max()
        if a_static is not None:
            log_phi = _rownorm(log_nu + ll)
            log_nu = _rownorm(a_static.T @ log_phi)
            traj_nu[i] = log_nu

    return {
        "log_pi": traj_pi,
        "log_mu": traj_mu,
        "log_nu": traj_nu,
        "a_final": a,
        "weight_gap": gap,
    }


def simulate_paths_ordered(
    log_lik: np.ndarray,
    obs: np.ndarray,
    adjacency: np.ndarray,
    want_pi: bool,
    want_adaptive: bool,
    a_static: np.ndarray | None,
    a_inf: np.ndarray | None,
    agent_order: Sequence[int],
) -> dict:
    """Same recursions with explicit per-agent loops in ``agent_order``.

    Updates are synchronous (each phase reads only the previous phase), so
    the result is bit-identical for every processing order. Exists to make
    that property testable; the vectorized path above is the production
    fallback.
    """
    t, n = obs.shape
    m = log_lik.shape[1]
    order = list(agent_order)
    if sorted(order) != list(range(n)):
        raise ValueError("agent_order must be a permutation of all agents")
    need_pi = want_pi or want_adaptive
    log_u = np.full((n, m), -np.log(m))

    traj_pi = np.empty((t + 1, n, m)) if need_pi else None
    traj_mu = np.empty((t + 1, n, m)) if want_adaptive else None
    traj_nu = np.empty((t + 1, n, m)) if a_static is not None else None
    gap = np.empty(t + 1) if (want_adaptive and a_inf is not None) else None

    log_pi = log_u.copy()
    log_mu = log_u.copy()
    log_nu = log_u.copy()
    if need_pi:
        traj_pi[0] = log_pi
    if want_adaptive:
        traj_mu[0] = log_mu
    if traj_nu is not None:
        traj_nu[0] = log_nu

    def norm_row(row: np.ndarray) -> np.ndarray:
        h = row.max()
        return row - (h + np.log(np.exp(row - h).sum()))

    def weight_matrix(pi_lin: np.ndarray) -> np.ndarray:
        a = np.zeros((n, n))
        for k in order:
            sigma = 1.0
            for l in range(n):
                if adjacency[l, k]:
                    s = float(pi_lin[k] @ pi_lin[l])
                    a[l, k] = s
                    sigma += s
            a[:, k] /= sigma
            a[k, k] = 1.0 / sigma
        return a

    a = None
    if want_adaptive:
        a = weight_matrix(np.exp(log_pi))
        if gap is not None:
            gap[0] = np.abs(a - a_inf).max()

    for i in range(1, t + 1):
        log_psi = np.empty((n, m)) if want_adaptive else None
        if want_adaptive:
            for k in order:
                log_psi[k] = norm_row(log_mu[k] + log_lik[k, :, obs[i - 1, k]])
        if need_pi:
            new_pi = np.empty((n, m))
            for k in order:
                new_pi[k] = norm_row(log_pi[k] + log_lik[k, :, obs[i - 1, k]])
            log_pi = new_pi
            traj_pi[i] = log_pi
        if want_adaptive:
            a = weight_matrix(np.exp(log_pi))
            new_mu = np.empty((n, m))
            for k in order:
                new_mu[k] = norm_row(a[:, k] @ log_psi)
            log_mu = new_mu
            traj_mu[i] = log_mu
            if gap is not None:
                gap[i] = np.abs(a - a_inf).max()
        if a_static is not None:
            log_phi = np.empty((n, m))
            for k in order:
                log_phi[k] = norm_row(log_nu[k] + log_lik[k, :, obs[i - 1, k]])
            new_nu = np.empty((n, m))
            for k in order:
                new_nu[k] = norm_row(a_static[:, k] @ log_phi)
            log_nu = new_nu
            traj_nu[i] = log_nu

    return {
        "log_pi": traj_pi,
        "log_mu": traj_mu,
        "log_nu": traj_nu,
        "a_final": a,
        "weight_gap": gap,
    }
