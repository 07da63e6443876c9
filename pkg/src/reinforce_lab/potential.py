"""Poisson-equation matrix Q(T), its derivative flow, and martingale checks.

Q(T) is the symmetric solution of L(T) Q = Q L(T) = I - J/N with J the
all-ones matrix and L(T) the generator-shaped matrix with off-diagonal
entries W_ij e^{T_i + T_j}.  Built spectrally, it is negative semidefinite
with zero row sums by construction.  The centred occupation of the
time-changed process decomposes through Q into a martingale whose quadratic
variation has the closed form -Q(0)_{ll}; `martingale_diagnostics`
reconstructs that martingale along a simulated trajectory.
"""

from __future__ import annotations

import numpy as np

from .graphs import WeightedGraph

SPECTRAL_GAP_FLOOR = 1e-13
RESIDUAL_TOL = 1e-4


class PotentialError(RuntimeError):
    pass


def generator_matrix(g: WeightedGraph, T) -> np.ndarray:
    """L(T): off-diagonal W_ij e^{T_i+T_j}, diagonal minus the row sums."""
    T = np.asarray(T, dtype=float)
    L = np.zeros((g.n, g.n))
    i, j = g.edges[:, 0], g.edges[:, 1]
    w = g.weights * np.exp(T[i] + T[j])
    np.add.at(L, (i, j), w)
    np.add.at(L, (j, i), w)
    L[np.diag_indices(g.n)] = -L.sum(axis=1)
    return L


def solve_q(g: WeightedGraph, T) -> np.ndarray:
    """Pseudo-inverse of L(T) on the mean-zero subspace, via eigendecomposition.

    The returned matrix is symmetric, has zero row sums, nonpositive diagonal
    and all eigenvalues <= 0, and satisfies both Poisson identities.
    """
    L = generator_matrix(g, T)
    evals, evecs = np.linalg.eigh(L)
    # eigh sorts ascending; the top eigenvalue ~0 belongs to the constants
    gap = -evals[-2]
    if gap < SPECTRAL_GAP_FLOOR:
        raise PotentialError(f"near-zero spectral gap {gap:.3g}; graph effectively disconnected")
    inv = np.zeros(g.n)
    inv[:-1] = 1.0 / evals[:-1]
    return (evecs * inv) @ evecs.T


def q_derivative(g: WeightedGraph, T, Q, i: int) -> np.ndarray:
    """Partial derivative of Q with respect to T_i.

    (dQ/dT_i)_{k,l} = sum_{j ~ i} W_ij e^{T_i+T_j} (Q_kj - Q_ki)(Q_jl - Q_il).
    """
    T = np.asarray(T, dtype=float)
    out = np.zeros_like(Q)
    for e, j in g.incident(i):
        w = g.weights[e] * np.exp(T[i] + T[j])
        dk = Q[:, j] - Q[:, i]
        out += w * np.outer(dk, dk)
    return out


def _rk4_sojourn(g, Q, T, cur, sojourn, ode_step):
    """Evolve (Q, integral of (dQ/dT_cur)_{cur,l} rows) across one sojourn.

    Returns (Q_end, row_integral) where row_integral accumulates the full
    (dQ)_{cur,:} row so any target column can be read off.
    """
    n_sub = max(1, int(np.ceil(sojourn / ode_step)))
    h = sojourn / n_sub
    integral = np.zeros(g.n)
    for step in range(n_sub):
        s0 = step * h

        def f(Qv, s):
            Tloc = T.copy()
            Tloc[cur] += s0 + s
            return q_derivative(g, Tloc, Qv, cur)

        k1 = f(Q, 0.0)
        k2 = f(Q + 0.5 * h * k1, 0.5 * h)
        k3 = f(Q + 0.5 * h * k2, 0.5 * h)
        k4 = f(Q + h * k3, h)
        integral += (h / 6.0) * (k1[cur] + 2.0 * k2[cur] + 2.0 * k3[cur] + k4[cur])
        Q = Q + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return Q, integral


def martingale_diagnostics(g: WeightedGraph, traj, target: int,
                           ode_step: float = 1e-3, max_halvings: int = 4) -> dict:
    """Reconstruct the occupation martingale M_target along an X trajectory.

    Q is evolved through each sojourn by fourth-order integration of the
    derivative flow and cross-checked against the direct spectral solve at
    every jump; if the worst residual exceeds 1e-4 the step is halved, up to
    `max_halvings` times, before giving up.  Returns the martingale series at
    jump times, its final value, the jump-increment quadratic variation, and
    the worst consistency residual.
    """
    if traj.kind != "xproc":
        raise PotentialError("martingale reconstruction applies to X trajectories")
    step = ode_step
    for attempt in range(max_halvings + 1):
        try:
            return _diagnostics_once(g, traj, target, step)
        except PotentialError:
            if attempt == max_halvings:
                raise
            step /= 2.0
    raise AssertionError("unreachable")


def _diagnostics_once(g, traj, target, ode_step):
    n = g.n
    T = np.zeros(n)
    cur = traj.start
    Q = solve_q(g, T)
    Q0_row = Q[traj.start].copy()
    integral = 0.0
    T_target = 0.0
    t_prev = 0.0
    max_residual = 0.0
    qv = 0.0
    series_t, series_m = [], []
    q_ll_prev = Q[target, target]
    events = list(zip(traj.times, traj.frm, traj.to)) + [(traj.final_clock, None, None)]
    for t_k, i, j in events:
        sojourn = t_k - t_prev
        if sojourn < 0:
            raise PotentialError("trajectory times not increasing")
        if sojourn > 0:
            Q, row_int = _rk4_sojourn(g, Q, T, cur, sojourn, ode_step)
            integral += row_int[target]
            T[cur] += sojourn
            if cur == target:
                T_target += sojourn
            residual = float(np.abs(Q - solve_q(g, T)).max())
            max_residual = max(max_residual, residual)
            if residual > RESIDUAL_TOL:
                raise PotentialError(
                    f"evolved Q drifted from the direct solve ({residual:.3g}); "
                    f"use a smaller ode_step than {ode_step:.3g}")
        if Q[target, target] < q_ll_prev - 1e-9:
            raise PotentialError("Q diagonal decreased along the trajectory")
        q_ll_prev = Q[target, target]
        m_here = (T_target - t_k / n - Q[cur, target] + Q0_row[target] + integral)
        if i is not None:
            dm = Q[i, target] - Q[j, target]
            qv += dm * dm
            cur = j
            m_here += dm
        series_t.append(t_k)
        series_m.append(m_here)
        t_prev = t_k
    return {
        "times": np.array(series_t),
        "martingale": np.array(series_m),
        "final_m": float(series_m[-1]) if series_m else 0.0,
        "quadratic_variation": float(qv),
        "max_residual": max_residual,
        "ode_step": ode_step,
        "qv_limit": float(-solve_q(g, np.zeros(n))[target, target]),
    }
