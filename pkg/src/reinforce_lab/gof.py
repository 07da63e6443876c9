"""Exact path-law oracles and goodness-of-fit tests.

The oracle here recomputes reinforced transition probabilities from scratch
(dict-based running edge counts, exact products) and deliberately shares no
code with the simulation kernels, so a bug in one cannot hide in the other.
"""

from __future__ import annotations

import numpy as np
from scipy import stats

MAX_PATH_LEN = 8


class OracleError(ValueError):
    pass


def errw_path_prob(g, a, path) -> float:
    """Exact probability of a reinforced-walk vertex path.

    `a` is the initial edge weight vector; `path` is a vertex sequence of at
    most 8 steps starting anywhere.  Each step multiplies in
    Z({i,j}) / sum_k Z({i,k}) with Z the running (initial + crossings) count.
    """
    path = list(path)
    if len(path) - 1 > MAX_PATH_LEN:
        raise OracleError("oracle restricted to short paths")
    a = np.broadcast_to(np.asarray(a, dtype=float), (g.m,))
    count = {e: a[e] for e in range(g.m)}
    prob = 1.0
    for i, j in zip(path[:-1], path[1:]):
        try:
            e = g.edge_index(i, j)
        except ValueError:
            raise OracleError(f"vertices {i} and {j} are not adjacent") from None
        total = sum(count[f] for f, _ in g.incident(i))
        prob *= count[e] / total
        count[e] += 1.0
    return prob


def enumerate_path_law(g, a, n_steps: int, start: int = 0) -> dict:
    """All length-n paths from `start` with their exact probabilities."""
    if n_steps > MAX_PATH_LEN:
        raise OracleError("path enumeration restricted to short paths")
    frontier = {(start,): 1.0}
    a_arr = np.broadcast_to(np.asarray(a, dtype=float), (g.m,))
    for _ in range(n_steps):
        nxt = {}
        for path, prob in frontier.items():
            count = {e: a_arr[e] for e in range(g.m)}
            for i, j in zip(path[:-1], path[1:]):
                count[g.edge_index(i, j)] += 1.0
            i = path[-1]
            total = sum(count[f] for f, _ in g.incident(i))
            for f, j in g.incident(i):
                nxt[path + (j,)] = prob * count[f] / total
        frontier = nxt
    total = sum(frontier.values())
    if abs(total - 1.0) > 1e-12:
        raise OracleError(f"path law sums to {total!r}, not 1")
    return frontier


def chi_square_gof(observed, expected_probs, min_expected: float = 5.0):
    """Chi-square test of observed counts against expected cell probabilities.

    Cells with expected count below `min_expected` are pooled into one.
    Returns (statistic, p_value, dof).
    """
    observed = np.asarray(observed, dtype=float)
    expected = np.asarray(expected_probs, dtype=float) * observed.sum()
    big = expected >= min_expected
    if big.sum() == 0:
        raise OracleError("all cells fall below the pooling threshold")
    obs = list(observed[big])
    exp = list(expected[big])
    if (~big).any():
        obs.append(observed[~big].sum())
        exp.append(expected[~big].sum())
    obs, exp = np.array(obs), np.array(exp)
    statistic = float(np.sum((obs - exp) ** 2 / exp))
    dof = len(obs) - 1
    p = float(stats.chi2.sf(statistic, dof))
    return statistic, p, dof


def path_law_chi_square(paths, law, n_vertices: int):
    """Chi-square of simulated paths (n_rep, L) against an exact path law."""
    from .batch import encode_paths

    keys = sorted(law)
    probs = np.array([law[k] for k in keys])
    key_codes = np.array([sum(v * n_vertices ** (len(k) - 1 - idx)
                              for idx, v in enumerate(k))
                          for k in keys], dtype=np.int64)
    sim_codes = encode_paths(np.asarray(paths), n_vertices)
    counts = np.bincount(sim_codes, minlength=int(key_codes.max()) + 1)
    observed = counts[key_codes]
    if observed.sum() != len(paths):
        raise OracleError("simulated paths fall outside the enumerated law")
    return chi_square_gof(observed, probs)


def ks_two_sample(xs, ys):
    """Two-sample Kolmogorov-Smirnov test; returns (statistic, p_value)."""
    res = stats.ks_2samp(xs, ys, method="asymp")
    return float(res.statistic), float(res.pvalue)


def ks_one_sample(xs, cdf):
    res = stats.kstest(xs, cdf)
    return float(res.statistic), float(res.pvalue)
