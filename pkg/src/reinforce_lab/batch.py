"""Vectorised multi-replica simulation kernels.

These run many independent replicas of the per-event steppers in
`processes` as numpy array programs, which is what makes the million-replica
statistical checks affordable.  Each kernel implements exactly the same
transition law as its scalar counterpart (asserted by tests) but draws its
randomness in replica-batched order, so the two are equal in distribution,
not pathwise.
"""

from __future__ import annotations

import numpy as np

from .graphs import WeightedGraph


def _categorical_rows(weights, rng):
    """One categorical draw per row, proportional to the (masked) row weights."""
    totals = weights.sum(axis=1)
    u = rng.random(len(weights)) * totals
    cum = np.cumsum(weights, axis=1)
    return (cum < u[:, None]).sum(axis=1)


def encode_paths(paths: np.ndarray, n_vertices: int) -> np.ndarray:
    """Encode vertex paths (n_rep, L) as integers, for bincount-based tallies."""
    codes = np.zeros(len(paths), dtype=np.int64)
    for k in range(paths.shape[1]):
        codes = codes * n_vertices + paths[:, k]
    return codes


def errw_jump_chains(g: WeightedGraph, a, n_steps: int, n_rep: int, rng,
                     start: int = 0) -> np.ndarray:
    """Discrete reinforced-walk paths, (n_rep, n_steps+1)."""
    a = np.broadcast_to(np.asarray(a, dtype=float), (g.m,))
    count = np.tile(a, (n_rep, 1))
    cur = np.full(n_rep, start, dtype=np.int64)
    paths = np.empty((n_rep, n_steps + 1), dtype=np.int64)
    paths[:, 0] = cur
    rows = np.arange(n_rep)
    for s in range(n_steps):
        inc_e = g.inc_edges[cur]
        mask = g.inc_mask[cur]
        z = count[rows[:, None], np.where(mask, inc_e, 0)] * mask
        k = _categorical_rows(z, rng)
        e_star = inc_e[rows, k]
        count[rows, e_star] += 1.0
        cur = g.inc_nbrs[cur][rows, k]
        paths[:, s + 1] = cur
    return paths


def rubin_jump_chains(g: WeightedGraph, a, n_steps: int, n_rep: int, rng,
                      start: int = 0) -> np.ndarray:
    """Jump-chain paths of the continuous-time reinforced walk.

    Alarm tables are pregenerated: edge e needs at most n_steps + 1 alarms in
    an n_steps run.  Adjacency clocks advance in lockstep with the walker's
    local time; the first-expiring alarm decides the crossing.
    """
    a = np.broadcast_to(np.asarray(a, dtype=float), (g.m,))
    K = n_steps + 1
    gaps = rng.exponential(size=(n_rep, g.m, K)) / (a[None, :, None] + np.arange(K)[None, None, :])
    alarms = np.cumsum(gaps, axis=2)
    clock = np.zeros((n_rep, g.m))
    crossings = np.zeros((n_rep, g.m), dtype=np.int64)
    cur = np.full(n_rep, start, dtype=np.int64)
    paths = np.empty((n_rep, n_steps + 1), dtype=np.int64)
    paths[:, 0] = cur
    rows = np.arange(n_rep)
    for s in range(n_steps):
        inc_e = g.inc_edges[cur]
        mask = g.inc_mask[cur]
        safe_e = np.where(mask, inc_e, 0)
        next_alarm = alarms[rows[:, None], safe_e, crossings[rows[:, None], safe_e]]
        residual = np.where(mask, next_alarm - clock[rows[:, None], safe_e], np.inf)
        k = residual.argmin(axis=1)             # ties break toward lowest edge slot
        gap = residual[rows, k]
        np.add.at(clock, (rows[:, None], safe_e), np.where(mask, gap[:, None], 0.0))
        e_star = inc_e[rows, k]
        crossings[rows, e_star] += 1
        cur = g.inc_nbrs[cur][rows, k]
        paths[:, s + 1] = cur
    return paths


def x_jump_chains(g: WeightedGraph, W, n_steps: int, n_rep: int, rng,
                  start: int = 0) -> np.ndarray:
    """Jump-chain paths of the exponentially time-changed process X.

    `W` is (m,) shared or (n_rep, m) per-replica conductances (the coupling
    with independent gamma conductances uses the latter).
    """
    W = np.asarray(W, dtype=float)
    if W.ndim == 1:
        W = np.broadcast_to(W, (n_rep, g.m))
    T = np.zeros((n_rep, g.n))
    cur = np.full(n_rep, start, dtype=np.int64)
    paths = np.empty((n_rep, n_steps + 1), dtype=np.int64)
    paths[:, 0] = cur
    rows = np.arange(n_rep)
    for s in range(n_steps):
        inc_e = g.inc_edges[cur]
        nbrs = g.inc_nbrs[cur]
        mask = g.inc_mask[cur]
        w = W[rows[:, None], np.where(mask, inc_e, 0)]
        rates = w * np.exp(T[rows, cur][:, None] + T[rows[:, None], np.where(mask, nbrs, 0)]) * mask
        c0 = rates.sum(axis=1)
        sojourn = np.log1p(rng.exponential(size=n_rep) / c0)
        T[rows, cur] += sojourn
        k = _categorical_rows(rates, rng)
        cur = nbrs[rows, k]
        paths[:, s + 1] = cur
    return paths


def vrjp_jump_chains(g: WeightedGraph, W, n_steps: int, n_rep: int, rng,
                     start: int = 0) -> np.ndarray:
    """Jump-chain paths of the linearly reinforced jump process Y."""
    W = np.asarray(W, dtype=float)
    if W.ndim == 1:
        W = np.broadcast_to(W, (n_rep, g.m))
    L = np.zeros((n_rep, g.n))                  # elapsed local time
    cur = np.full(n_rep, start, dtype=np.int64)
    paths = np.empty((n_rep, n_steps + 1), dtype=np.int64)
    paths[:, 0] = cur
    rows = np.arange(n_rep)
    for s in range(n_steps):
        inc_e = g.inc_edges[cur]
        nbrs = g.inc_nbrs[cur]
        mask = g.inc_mask[cur]
        w = W[rows[:, None], np.where(mask, inc_e, 0)]
        rates = w * (1.0 + L[rows[:, None], np.where(mask, nbrs, 0)]) * mask
        total = rates.sum(axis=1)
        sojourn = rng.exponential(size=n_rep) / total
        L[rows, cur] += sojourn
        k = _categorical_rows(rates, rng)
        cur = nbrs[rows, k]
        paths[:, s + 1] = cur
    return paths


def z_jump_chains(g: WeightedGraph, W, U, n_steps: int, n_rep: int, rng,
                  start: int = 0) -> np.ndarray:
    """Jump-chain paths of the conditionally Markov process Z with field U.

    `U` is (n,) shared or (n_rep, n) per-replica fields.
    """
    U = np.asarray(U, dtype=float)
    if U.ndim == 1:
        U = np.broadcast_to(U, (n_rep, g.n))
    W = np.asarray(W, dtype=float)
    cur = np.full(n_rep, start, dtype=np.int64)
    paths = np.empty((n_rep, n_steps + 1), dtype=np.int64)
    paths[:, 0] = cur
    rows = np.arange(n_rep)
    for s in range(n_steps):
        inc_e = g.inc_edges[cur]
        nbrs = g.inc_nbrs[cur]
        mask = g.inc_mask[cur]
        w = W[np.where(mask, inc_e, 0)]
        rates = w * np.exp(U[rows[:, None], np.where(mask, nbrs, 0)]
                           - U[rows, cur][:, None]) * mask
        k = _categorical_rows(rates, rng)
        cur = nbrs[rows, k]
        paths[:, s + 1] = cur
    return paths


def x_occupation(g: WeightedGraph, W, horizon: float, n_rep: int, rng,
                 start: int = 0):
    """Local-time fields T_i(horizon) of X across replicas, (n_rep, n).

    Synchronously advances all still-active replicas one jump at a time; a
    replica whose sampled sojourn overshoots the horizon parks at its current
    vertex and retires.  Also returns the per-replica jump counts.
    """
    W = np.asarray(W, dtype=float)
    if W.ndim == 1:
        W = np.broadcast_to(W, (n_rep, g.m))
    T = np.zeros((n_rep, g.n))
    clock = np.zeros(n_rep)
    cur = np.full(n_rep, start, dtype=np.int64)
    jumps = np.zeros(n_rep, dtype=np.int64)
    active = np.arange(n_rep)
    while len(active):
        inc_e = g.inc_edges[cur[active]]
        nbrs = g.inc_nbrs[cur[active]]
        mask = g.inc_mask[cur[active]]
        rows = np.arange(len(active))
        w = W[active[:, None], np.where(mask, inc_e, 0)]
        rates = w * np.exp(T[active, cur[active]][:, None]
                           + T[active[:, None], np.where(mask, nbrs, 0)]) * mask
        c0 = rates.sum(axis=1)
        sojourn = np.log1p(rng.exponential(size=len(active)) / c0)
        finish = clock[active] + sojourn > horizon
        # retiring replicas sit at their vertex until the horizon
        T[active, cur[active]] += np.where(finish, horizon - clock[active], sojourn)
        clock[active] = np.where(finish, horizon, clock[active] + sojourn)
        k = _categorical_rows(rates, rng)
        nxt = nbrs[rows, k]
        keep = ~finish
        cur[active[keep]] = nxt[keep]
        jumps[active[keep]] += 1
        active = active[keep]
    return T, jumps


def z_occupancy(g: WeightedGraph, W, U, n_events: int, rng, start: int = 0):
    """Occupancy fractions of a single long Z run with `n_events` jumps.

    The embedded chain is simulated event by event; the exponential sojourns
    at each vertex are then drawn in one vectorised pass (a Gamma(visits)
    total per vertex, which is exactly the sum of the i.i.d. sojourns).
    Returns (occupancy fractions, stationary fractions e^{2U}/sum).
    """
    U = np.asarray(U, dtype=float)
    W = np.asarray(W, dtype=float)
    nbrs, cum, exit_rate = [], [], np.zeros(g.n)
    for i in range(g.n):
        inc = g.incident(i)
        r = np.array([0.5 * W[e] * np.exp(U[j] - U[i]) for e, j in inc])
        exit_rate[i] = r.sum()
        nbrs.append(np.array([j for _, j in inc]))
        cum.append(np.cumsum(r) / r.sum())
    us = rng.random(n_events)
    visits = np.zeros(g.n, dtype=np.int64)
    i = start
    for k in range(n_events):
        visits[i] += 1
        c = cum[i]
        i = nbrs[i][np.searchsorted(c, us[k])]
    total_time = np.zeros(g.n)
    for v in range(g.n):
        if visits[v]:
            total_time[v] = rng.gamma(visits[v]) / exit_rate[v]
    pi = np.exp(2.0 * U - 2.0 * U.max())
    return total_time / total_time.sum(), pi / pi.sum()


def two_vertex_martingale_samples(W: float, horizon: float, n_rep: int, rng,
                                  target: int = 0, chunk: int = 4000):
    """Closed-form reconstruction of the occupation martingale on two vertices.

    On the single-edge graph the jump times of X satisfy e^{t_k} = 1 + P_k/W
    for a unit-rate Poisson process P, the walker alternates vertices, and
    the Poisson-equation matrix is +-1/(4 W e^t), so every term of the
    martingale decomposition has a closed form per sojourn.  Returns M_target
    at the horizon for each replica.  Cross-checked against the generic
    trajectory integrator in tests.
    """
    vmax = np.exp(horizon)
    mean_jumps = W * (vmax - 1.0)
    K = int(mean_jumps + 6.0 * np.sqrt(mean_jumps) + 20)
    out = np.empty(n_rep)
    done = 0
    while done < n_rep:
        c = min(chunk, n_rep - done)
        v = 1.0 + np.cumsum(rng.exponential(size=(c, K)), axis=1) / W
        if v[:, -1].min() <= vmax:
            raise RuntimeError("alarm table too short for requested horizon")
        t = np.log(v)
        # sojourn k (0-based) occupies [t_k, t_{k+1}) at vertex k % 2, t_0 = 0
        t_lo = np.concatenate([np.zeros((c, 1)), t[:, :-1]], axis=1)
        t_hi = np.minimum(t, horizon)
        live = t_lo < horizon
        seg = np.where(live, t_hi - t_lo, 0.0)
        k_par = np.arange(K) % 2
        at_target = (k_par == target)
        T_target = np.sum(seg * at_target, axis=1)
        n_jumps = np.sum(t <= horizon, axis=1)
        x_h = n_jumps % 2
        sign = np.where(at_target, 1.0, -1.0)
        integral = np.sum(sign * np.where(live, np.exp(-t_lo) - np.exp(-t_hi), 0.0),
                          axis=1) / (4.0 * W)
        q_h = 1.0 / (4.0 * W * vmax)
        q_term = np.where(x_h == target, -q_h, q_h)
        q0 = -1.0 / (4.0 * W) if target == 0 else 1.0 / (4.0 * W)
        out[done:done + c] = T_target - 0.5 * horizon - q_term + q0 + integral
        done += c
    return out
