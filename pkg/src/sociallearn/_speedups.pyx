# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernel with the same contract as _reference.simulate_paths."""

import numpy as np

from libc.math cimport exp, fabs, log
from libc.stdint cimport int64_t

NAME = "compiled"


cdef inline void _norm_row(double[:, ::1] buf, Py_ssize_t k, Py_ssize_t m) noexcept:
    cdef Py_ssize_t j
    cdef double h = buf[k, 0]
    cdef double ssum = 0.0
    for j in range(1, m):
        if buf[k, j] > h:
            h = buf[k, j]
    for j in range(m):
        ssum += exp(buf[k, j] - h)
    cdef double lse = h + log(ssum)
    for j in range(m):
        buf[k, j] -= lse


def simulate_paths(log_lik, obs, adjacency, want_pi, want_adaptive, a_static, a_inf):
    cdef Py_ssize_t t = obs.shape[0]
    cdef Py_ssize_t n = obs.shape[1]
    cdef Py_ssize_t m = log_lik.shape[1]
    cdef bint adap = bool(want_adaptive)
    cdef bint need_pi = bool(want_pi) or adap
    cdef bint stat = a_static is not None
    cdef bint track_gap = adap and a_inf is not None

    cdef const double[:, :, ::1] L = np.ascontiguousarray(log_lik, dtype=np.float64)
    cdef const int64_t[:, ::1] O = np.ascontiguousarray(obs, dtype=np.int64)
    cdef const double[:, ::1] ADJ = np.ascontiguousarray(adjacency, dtype=np.float64)
    cdef const double[:, ::1] AS = np.ascontiguousarray(
        a_static if stat else np.zeros((1, 1)), dtype=np.float64)
    cdef const double[:, ::1] AI = np.ascontiguousarray(
        a_inf if track_gap else np.zeros((1, 1)), dtype=np.float64)

    out_pi = np.empty((t + 1, n, m)) if need_pi else None
    out_mu = np.empty((t + 1, n, m)) if adap else None
    out_nu = np.empty((t + 1, n, m)) if stat else None
    out_gap = np.empty(t + 1) if track_gap else None
    out_a = np.zeros((n, n)) if adap else None

    cdef double[:, :, ::1] TPI = out_pi if need_pi else np.empty((1, 1, 1))
    cdef double[:, :, ::1] TMU = out_mu if adap else np.empty((1, 1, 1))
    cdef double[:, :, ::1] TNU = out_nu if stat else np.empty((1, 1, 1))
    cdef double[::1] GAP = out_gap if track_gap else np.empty(1)
    cdef double[:, ::1] A = out_a if adap else np.empty((1, 1))

    cdef double[:, ::1] log_pi = np.empty((n, m))
    cdef double[:, ::1] log_mu = np.empty((n, m))
    cdef double[:, ::1] log_nu = np.empty((n, m))
    cdef double[:, ::1] log_psi = np.empty((n, m))
    cdef double[:, ::1] log_phi = np.empty((n, m))
    cdef double[:, ::1] work = np.empty((n, m))
    cdef double[:, ::1] pi_lin = np.empty((n, m))
    cdef double[::1] sigma = np.empty(n)

    cdef Py_ssize_t i, j, k, l
    cdef int64_t o
    cdef double u0 = -log(<double> m)
    cdef double s, acc, g

    for k in range(n):
        for j in range(m):
            log_pi[k, j] = u0
            log_mu[k, j] = u0
            log_nu[k, j] = u0
        if need_pi:
            for j in range(m):
                TPI[0, k, j] = u0
        if adap:
            for j in range(m):
                TMU[0, k, j] = u0
        if stat:
            for j in range(m):
                TNU[0, k, j] = u0

    if adap:
        for k in range(n):
            for j in range(m):
                pi_lin[k, j] = exp(log_pi[k, j])
        _weights(pi_lin, ADJ, A, sigma, n, m)
        if track_gap:
            g = 0.0
            for l in range(n):
                for k in range(n):
                    s = fabs(A[l, k] - AI[l, k])
                    if s > g:
                        g = s
            GAP[0] = g

    for i in range(1, t + 1):
        if adap:
            for k in range(n):
                o = O[i - 1, k]
                for j in range(m):
                    log_psi[k, j] = log_mu[k, j] + L[k, j, o]
                _norm_row(log_psi, k, m)
        if need_pi:
            for k in range(n):
                o = O[i - 1, k]
                for j in range(m):
                    log_pi[k, j] += L[k, j, o]
                _norm_row(log_pi, k, m)
                for j in range(m):
                    TPI[i, k, j] = log_pi[k, j]
        if adap:
            for k in range(n):
                for j in range(m):
                    pi_lin[k, j] = exp(log_pi[k, j])
            _weights(pi_lin, ADJ, A, sigma, n, m)
            for k in range(n):
                for j in range(m):
                    acc = 0.0
                    for l in range(n):
                        acc += A[l, k] * log_psi[l, j]
                    work[k, j] = acc
                _norm_row(work, k, m)
            for k in range(n):
                for j in range(m):
                    log_mu[k, j] = work[k, j]
                    TMU[i, k, j] = work[k, j]
            if track_gap:
                g = 0.0
                for l in range(n):
                    for k in range(n):
                        s = fabs(A[l, k] - AI[l, k])
                        if s > g:
                            g = s
                GAP[i] = g
        if stat:
            for k in range(n):
                o = O[i - 1, k]
                for j in range(m):
                    log_phi[k, j] = log_nu[k, j] + L[k, j, o]
                _norm_row(log_phi, k, m)
            for k in range(n):
                for j in range(m):
                    acc = 0.0
                    for l in range(n):
                        acc += AS[l, k] * log_phi[l, j]
                    work[k, j] = acc
                _norm_row(work, k, m)
            for k in range(n):
                for j in range(m):
                    log_nu[k, j] = work[k, j]
                    TNU[i, k, j] = work[k, j]

    return {
        "log_pi": out_pi,
        "log_mu": out_mu,
        "log_nu": out_nu,
        "a_final": out_a,
        "weight_gap": out_gap,
    }


cdef void _weights(const double[:, ::1] pi_lin, const double[:, ::1] adj,
                   double[:, ::1] a, double[::1] sigma,
                   Py_ssize_t n, Py_ssize_t m) noexcept:
    # non-neighbor entries of a stay zero; neighbor entries are rewritten
    cdef Py_ssize_t k, l, j
    cdef double s
    for k in range(n):
        sigma[k] = 1.0
        for l in range(n):
            if adj[l, k] > 0.0:
                s = 0.0
                for j in range(m):
                    s += pi_lin[k, j] * pi_lin[l, j]
                a[l, k] = s
                sigma[k] += s
    for k in range(n):
        for l in range(n):
            if adj[l, k] > 0.0:
                a[l, k] /= sigma[k]
        a[k, k] = 1.0 / sigma[k]
