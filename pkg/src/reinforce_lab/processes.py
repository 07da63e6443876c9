"""Exact-event simulation of the five reinforced processes.

The processes share one state container:

* discrete edge-reinforced walk (crossing probabilities proportional to the
  running edge counts);
* its continuous-time version built from per-edge alarm timelines;
* the linearly reinforced jump process Y (rates W_e * (1 + local time));
* its exponential time change X (rates W_e * e^{T_i + T_j});
* the conditionally Markov process Z (constant rates W_e e^{U_j - U_i} / 2).

Local times are stored as elapsed time starting at zero; the +1 offset used
by Y is applied at read sites.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphs import WeightedGraph

T_OVERFLOW_BOUND = 500.0
YULE_EXPLICIT_HORIZON = 10.0


class OverflowAbort(RuntimeError):
    """A local time exceeded the e^T overflow bound; carries the state values."""

    def __init__(self, local_time):
        self.local_time = np.asarray(local_time).copy()
        super().__init__(f"local time exceeded {T_OVERFLOW_BOUND}: max={self.local_time.max():.3g}")


def replica_rng(master_seed: int, replica: int) -> np.random.Generator:
    """Independent stream for one replica, derived from (master seed, index)."""
    return np.random.default_rng([int(master_seed), int(replica)])


@dataclass
class ProcessState:
    current: int
    clock: float = 0.0
    local_time: np.ndarray = None          # per vertex, elapsed
    edge_count: np.ndarray = None          # per edge; running weights for the ERRW
    step_count: int = 0

    @classmethod
    def fresh(cls, g: WeightedGraph, start: int, edge_weights=None):
        ec = None if edge_weights is None else np.asarray(edge_weights, dtype=float).copy()
        return cls(current=int(start), clock=0.0,
                   local_time=np.zeros(g.n), edge_count=ec, step_count=0)


class EdgeTimelines:
    """Per-edge alarm sequences and adjacency clocks for the continuous walk.

    Alarm gaps are extended lazily: either from fresh exponentials with rates
    a_e + k (direct construction), or deterministically from a conductance W_e
    and unit-Poisson arrivals (conditional construction).
    """

    def __init__(self, g: WeightedGraph, a, rng, W=None):
        self.g = g
        self.a = np.asarray(a, dtype=float)
        self.rng = rng
        self.W = None if W is None else np.asarray(W, dtype=float)
        self.alarms = [[] for _ in range(g.m)]       # cumulative alarm times V_k
        self.crossings = np.zeros(g.m, dtype=np.int64)
        self.clock = np.zeros(g.m)                   # elapsed adjacency clock per edge
        self._poisson = np.zeros(g.m)                # last unit-Poisson arrival (conditional)

    def _extend(self, e):
        if self.W is None:
            k = len(self.alarms[e])
            gap = self.rng.exponential(1.0 / (self.a[e] + k))
            prev = self.alarms[e][-1] if self.alarms[e] else 0.0
            self.alarms[e].append(prev + gap)
        else:
            self._poisson[e] += self.rng.exponential(1.0)
            self.alarms[e].append(np.log1p(self._poisson[e] / self.W[e]))

    def next_alarm(self, e) -> float:
        k = int(self.crossings[e])
        while len(self.alarms[e]) <= k:
            self._extend(e)
        return self.alarms[e][k]


def errw_step(g: WeightedGraph, state: ProcessState, rng) -> int:
    """One step of the discrete reinforced walk; returns the new vertex."""
    inc = g.incident(state.current)
    z = np.array([state.edge_count[e] for e, _ in inc])
    probs = z / z.sum()
    k = rng.choice(len(inc), p=probs)
    e, j = inc[k]
    state.edge_count[e] += 1.0
    state.current = j
    state.step_count += 1
    return j


def continuous_errw_step(g: WeightedGraph, state: ProcessState,
                         timelines: EdgeTimelines, rng=None):
    """Advance to the next alarm among edges at the current vertex.

    Adjacency clocks of all incident edges run in lockstep with the walker's
    local time; the edge whose next alarm is reached first is crossed
    instantaneously.  Returns (jump time, new vertex).  Ties (probability
    zero) break toward the lowest edge index.
    """
    i = state.current
    inc = g.incident(i)
    gaps = np.array([timelines.next_alarm(e) - timelines.clock[e] for e, _ in inc])
    k = int(np.argmin(gaps))
    gap = float(gaps[k])
    e_star, j = inc[k]
    state.local_time[i] += gap
    state.clock += gap
    for e, _ in inc:
        timelines.clock[e] += gap
    timelines.crossings[e_star] += 1
    state.current = j
    state.step_count += 1
    return state.clock, j


def yule_limit_sample(timelines: EdgeTimelines, e: int,
                      horizon: float = YULE_EXPLICIT_HORIZON) -> float:
    """Draw the growth-rate limit lim N_t e^{-t} of edge e's birth process.

    Alarms are generated explicitly up to `horizon`; the limit conditional on
    that path is Gamma(N_horizon, 1) * e^{-horizon} exactly (each of the
    N_horizon lineages contributes an independent unit-exponential limit), so
    the draw closes the tail without enumerating the exponentially many later
    alarms.
    """
    k = 0
    while True:
        while len(timelines.alarms[e]) <= k:
            timelines._extend(e)
        if timelines.alarms[e][k] > horizon:
            break
        k += 1
    n_t = timelines.a[e] + k
    return float(timelines.rng.gamma(n_t) * np.exp(-horizon))


def sample_gamma_coupling(g: WeightedGraph, a, rng, method: str = "conditional"):
    """Conductances W and edge timelines realising the birth-process coupling.

    conditional: draw W_e ~ Gamma(a_e, 1) first; alarms are then
    log(1 + p_k / W_e) for unit-Poisson arrivals p_k.  Returns exact W.
    direct: alarms from exponentials with rates a_e + k; W_e recovered as the
    (exact-in-distribution) birth-process limit via `yule_limit_sample`.
    """
    a = np.asarray(a, dtype=float)
    if method == "conditional":
        W = rng.gamma(a)
        return W, EdgeTimelines(g, a, rng, W=W)
    if method == "direct":
        tl = EdgeTimelines(g, a, rng)
        W = np.array([yule_limit_sample(tl, e) for e in range(g.m)])
        return W, tl
    raise ValueError(f"unknown construction {method!r}")


def vrjp_step(g: WeightedGraph, W, state: ProcessState, rng):
    """One jump of the linearly reinforced process Y; returns (sojourn, vertex)."""
    i = state.current
    inc = g.incident(i)
    rates = np.array([W[e] * (1.0 + state.local_time[j]) for e, j in inc])
    total = rates.sum()
    sojourn = rng.exponential(1.0 / total)
    k = rng.choice(len(inc), p=rates / total)
    state.local_time[i] += sojourn
    state.clock += sojourn
    state.current = inc[k][1]
    state.step_count += 1
    return sojourn, state.current


def x_process_step(g: WeightedGraph, W, state: ProcessState, rng):
    """One jump of the exponentially time-changed process X.

    The total exit rate at elapsed s within the sojourn is c * e^s with
    c = sum_j W_ij e^{T_i + T_j} at the sojourn start; the sojourn is sampled
    by exact inversion, log(1 + E/c) with E ~ Exp(1).
    """
    i = state.current
    T = state.local_time
    if T.max() > T_OVERFLOW_BOUND:
        raise OverflowAbort(T)
    inc = g.incident(i)
    c_j = np.array([W[e] * np.exp(T[i] + T[j]) for e, j in inc])
    c = c_j.sum()
    sojourn = np.log1p(rng.exponential(1.0) / c)
    k = rng.choice(len(inc), p=c_j / c)
    state.local_time[i] += sojourn
    state.clock += sojourn
    state.current = inc[k][1]
    state.step_count += 1
    return sojourn, state.current


def z_process_step(g: WeightedGraph, W, U, state: ProcessState, rng):
    """One jump of the conditionally Markov process Z with field U."""
    i = state.current
    U = np.asarray(U, dtype=float)
    inc = g.incident(i)
    rates = np.array([0.5 * W[e] * np.exp(U[j] - U[i]) for e, j in inc])
    total = rates.sum()
    sojourn = rng.exponential(1.0 / total)
    k = rng.choice(len(inc), p=rates / total)
    state.local_time[i] += sojourn
    state.clock += sojourn
    state.current = inc[k][1]
    state.step_count += 1
    return sojourn, state.current


def time_change(kind: str, local_times) -> float:
    """Closed-form additive functionals converting between the process clocks.

    A   = sum log(1 + l_i)       (Y local times, stored as elapsed)
    A_inv = sum (e^{T_i} - 1)    (X local times)
    B   = sum (sqrt(1 + l_i) - 1)  (Z local times)
    C   = sum (e^{2 T_i} - 1)    (X local times)
    D   = sum ((1 + l_i)^2 - 1)  (Y local times; per-term subtraction)
    """
    l = np.asarray(local_times, dtype=float)
    if kind == "A":
        return float(np.sum(np.log1p(l)))
    if kind == "A_inv":
        return float(np.sum(np.expm1(l)))
    if kind == "B":
        return float(np.sum(np.sqrt(1.0 + l) - 1.0))
    if kind == "C":
        return float(np.sum(np.expm1(2.0 * l)))
    if kind == "D":
        return float(np.sum((1.0 + l) ** 2 - 1.0))
    raise ValueError(f"unknown time change {kind!r}")


@dataclass
class Trajectory:
    kind: str
    times: np.ndarray                      # jump times, strictly increasing
    frm: np.ndarray
    to: np.ndarray
    final_local_time: np.ndarray
    final_clock: float
    start: int
    complete: bool = True
    checkpoint_times: np.ndarray = None
    checkpoint_local_time: np.ndarray = None    # (n_checkpoints, n_vertices)
    checkpoint_centred: np.ndarray = None       # T_i(t) - t/N where applicable

    def jump_sequence(self):
        if len(self.frm) == 0:
            return np.array([self.start])
        return np.concatenate([[self.frm[0]], self.to])


_PROCESS_KINDS = ("errw", "errw-ct", "vrjp", "xproc", "z")


def run_until(kind: str, g: WeightedGraph, *, weights=None, U=None, start: int = 0,
              horizon: float = None, max_steps: int = None, checkpoints=(),
              seed=None, rng=None, timelines=None) -> Trajectory:
    """Run one replica of the named process; deterministic given the seed.

    Stops at the native-clock `horizon` (continuous processes; step count for
    the discrete walk) and/or after `max_steps` jumps; hitting the step budget
    before the horizon returns a partial trajectory with complete=False.
    Checkpoints record local times (and, for vrjp/xproc, the centred
    occupation T_i - t/N) at the requested native times.
    """
    if kind not in _PROCESS_KINDS:
        raise ValueError(f"unknown process kind {kind!r}")
    if rng is None:
        rng = np.random.default_rng(seed)
    if horizon is None and max_steps is None:
        raise ValueError("need a horizon or a step budget")
    checkpoints = np.sort(np.asarray(list(checkpoints), dtype=float))
    is_discrete = kind == "errw"
    weights = None if weights is None else np.asarray(weights, dtype=float)

    if is_discrete:
        state = ProcessState.fresh(g, start, edge_weights=weights)
    else:
        state = ProcessState.fresh(g, start)
    if kind == "errw-ct" and timelines is None:
        timelines = EdgeTimelines(g, weights, rng)

    times, frm, to = [], [], []
    cp_lt, cp_cent, cp_done = [], [], 0
    complete = True

    def record_checkpoints(upto, vertex, clock_before):
        # the walker sits at `vertex` from clock_before until `upto`
        nonlocal cp_done
        while cp_done < len(checkpoints) and checkpoints[cp_done] <= upto + 1e-15:
            t_cp = checkpoints[cp_done]
            lt = state.local_time.copy()
            lt[vertex] += max(t_cp - clock_before, 0.0)
            cp_lt.append(lt)
            if kind in ("vrjp", "xproc"):
                cp_cent.append(lt - t_cp / g.n)
            cp_done += 1

    while True:
        if max_steps is not None and state.step_count >= max_steps:
            if horizon is not None and (not is_discrete) and state.clock < horizon:
                complete = False
            if horizon is not None and is_discrete and state.step_count < horizon:
                complete = False
            break
        if is_discrete:
            if horizon is not None and state.step_count >= horizon:
                break
            i = state.current
            errw_step(g, state, rng)
            times.append(float(state.step_count))
            frm.append(i)
            to.append(state.current)
            continue

        i = state.current
        clock_before = state.clock
        if kind == "errw-ct":
            inc = g.incident(i)
            gaps = [timelines.next_alarm(e) - timelines.clock[e] for e, _ in inc]
            sojourn = min(gaps)
        elif kind == "vrjp":
            rates = np.array([weights[e] * (1.0 + state.local_time[j]) for e, j in g.incident(i)])
            sojourn = rng.exponential(1.0 / rates.sum())
        elif kind == "xproc":
            if state.local_time.max() > T_OVERFLOW_BOUND:
                raise OverflowAbort(state.local_time)
            T = state.local_time
            rates = np.array([weights[e] * np.exp(T[i] + T[j]) for e, j in g.incident(i)])
            sojourn = np.log1p(rng.exponential(1.0) / rates.sum())
        else:  # z
            Uv = np.asarray(U, dtype=float)
            rates = np.array([0.5 * weights[e] * np.exp(Uv[j] - Uv[i])
                              for e, j in g.incident(i)])
            sojourn = rng.exponential(1.0 / rates.sum())

        if horizon is not None and clock_before + sojourn > horizon:
            # no further jump before the horizon; settle the quiet stretch
            state.local_time[i] += horizon - clock_before
            state.clock = horizon
            record_checkpoints(horizon, i, clock_before)
            break

        # commit the jump
        if kind == "errw-ct":
            k = int(np.argmin(gaps))
            e_star, j = inc[k]
            for e, _ in inc:
                timelines.clock[e] += sojourn
            timelines.crossings[e_star] += 1
        else:
            total = rates.sum()
            k = rng.choice(len(rates), p=rates / total)
            j = g.incident(i)[k][1]
        record_checkpoints(clock_before + sojourn, i, clock_before)
        state.local_time[i] += sojourn
        state.clock = clock_before + sojourn
        state.current = j
        state.step_count += 1
        times.append(state.clock)
        frm.append(i)
        to.append(j)
        if horizon is not None and state.clock >= horizon:
            break

    if not is_discrete and complete and horizon is not None:
        record_checkpoints(horizon, state.current, state.clock)

    return Trajectory(
        kind=kind,
        times=np.asarray(times), frm=np.asarray(frm, dtype=np.int64),
        to=np.asarray(to, dtype=np.int64),
        final_local_time=state.local_time if not is_discrete else np.zeros(g.n),
        final_clock=float(state.clock), start=start, complete=complete,
        checkpoint_times=checkpoints[:cp_done],
        checkpoint_local_time=np.asarray(cp_lt) if cp_lt else np.zeros((0, g.n)),
        checkpoint_centred=np.asarray(cp_cent) if cp_cent else None,
    )


def export_jsonl(traj: Trajectory, fh):
    """One JSON record per jump: {"t": ..., "from": ..., "to": ...}."""
    import json
    for t, i, j in zip(traj.times, traj.frm, traj.to):
        fh.write(json.dumps({"t": float(t), "from": int(i), "to": int(j)}) + "\n")


def export_checkpoint_csv(traj: Trajectory, fh):
    n = traj.checkpoint_local_time.shape[1]
    fh.write("t," + ",".join(f"T_{i}" for i in range(n)) + "\n")
    for t, row in zip(traj.checkpoint_times, traj.checkpoint_local_time):
        fh.write(",".join([f"{t:.12g}"] + [f"{v:.12g}" for v in row]) + "\n")
