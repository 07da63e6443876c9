"""Log-densities of the limiting field measures.

Three closely related densities are evaluated here, always in the log domain:

* the limiting law of the centred occupation field of the time-changed jump
  process, supported on the zero-sum hyperplane H0 and pinned through a
  distinguished vertex i0;
* the hyperbolic sigma-model measure on the full vertex space, pinned through
  a nonnegative eps-vector (extra vertex delta);
* the Coppersmith-Diaconis mixing density on normalised conductances y.

All determinants are sums over spanning trees of positive edge factors
(matrix-tree theorem); we compute the diagonal minor of the standard weighted
Laplacian, whose sign convention makes the minor positive.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln

from .graphs import PinnedGraph, WeightedGraph

LOG_2PI = float(np.log(2.0 * np.pi))


class DensityError(ValueError):
    pass


def project_zero_sum(u):
    """Project a field onto the zero-sum hyperplane H0."""
    u = np.asarray(u, dtype=float)
    return u - u.mean()


def h_functional(g: WeightedGraph, u) -> float:
    """Interaction energy 2 sum_e W_e sinh^2((u_i - u_j)/2); zero iff u constant."""
    u = np.asarray(u, dtype=float)
    du = u[g.edges[:, 0]] - u[g.edges[:, 1]]
    return float(2.0 * np.sum(g.weights * np.sinh(0.5 * du) ** 2))


def tree_log_determinant(g: WeightedGraph, u=None, extra_diag=None, drop=0) -> float:
    """Log of the diagonal minor of the Laplacian with weights W_e e^{u_i+u_j}.

    Equals log sum over spanning trees of prod W_e e^{u_i+u_j}.  The e^{u}
    factors are pulled out as a diagonal similarity so that fields with
    |u_i| <= 50 on graphs of ~100 vertices stay inside double range.
    `extra_diag` adds nonnegative terms to the diagonal (pinned form); in that
    case the full determinant is taken (`drop=None`).
    """
    u = np.zeros(g.n) if u is None else np.asarray(u, dtype=float)
    # L = D M D with D = diag(e^{u}); M_ij = -W_ij, M_ii = sum_k W_ik e^{u_k-u_i}
    # overflow at absurd fields yields inf/nan and is rejected below
    M = np.zeros((g.n, g.n))
    i, j = g.edges[:, 0], g.edges[:, 1]
    np.subtract.at(M, (i, j), g.weights)
    np.subtract.at(M, (j, i), g.weights)
    diag = np.zeros(g.n)
    with np.errstate(over="ignore", invalid="ignore"):
        np.add.at(diag, i, g.weights * np.exp(u[j] - u[i]))
        np.add.at(diag, j, g.weights * np.exp(u[i] - u[j]))
        if extra_diag is not None:
            diag = diag + np.asarray(extra_diag, dtype=float) * np.exp(-u)
    M[np.diag_indices(g.n)] = diag
    if drop is None:
        keep = np.arange(g.n)
    else:
        if drop == "best":
            # any minor gives the same value; dropping the heaviest diagonal
            # minimises rounding cancellation at extreme weight ratios
            drop = int(np.argmax(diag))
        keep = np.array([k for k in range(g.n) if k != drop])
    with np.errstate(invalid="ignore"):
        sign, logabs = np.linalg.slogdet(M[np.ix_(keep, keep)])
    result = logabs + 2.0 * u[keep].sum()
    if sign <= 0 or not np.isfinite(result):
        raise DensityError(f"non-positive or non-finite tree determinant at u={u!r}")
    return float(result)


def limit_log_density(g: WeightedGraph, u, i0: int, check_gauge: bool = True) -> float:
    """Log-density of the limiting centred occupation field on H0.

    Value: u_{i0} - H(W, u) + (1/2) log D(W, u) - ((N-1)/2) log(2 pi).
    Normalised so that integrating in the difference coordinates
    (u_i - u_{i0})_{i != i0} gives total mass one.
    """
    u = np.asarray(u, dtype=float)
    if check_gauge and abs(u.sum()) > 1e-9 * max(1.0, np.abs(u).max()):
        raise DensityError("field must lie on the zero-sum hyperplane")
    return float(u[i0] - h_functional(g, u)
                 + 0.5 * tree_log_determinant(g, u)
                 - 0.5 * (g.n - 1) * LOG_2PI)


def sigma_log_density(pinned: PinnedGraph, t) -> float:
    """Log-density of the pinned sigma-model measure on the full vertex space.

    Value: -sum t - F(grad t) - M(t) + (1/2) log det A - (|V|/2) log(2 pi),
    with F = sum beta_e (cosh(t_i - t_j) - 1), M = sum eps_i (cosh t_i - 1)
    and A the pinned Laplacian with entries beta_e e^{t_i+t_j} plus
    eps_i e^{t_i} on the diagonal.
    """
    g = pinned.base
    t = np.asarray(t, dtype=float)
    dt = t[g.edges[:, 0]] - t[g.edges[:, 1]]
    with np.errstate(over="ignore", invalid="ignore"):
        F = float(np.sum(g.weights * (np.cosh(dt) - 1.0)))
        M = float(np.sum(pinned.eps * (np.cosh(t) - 1.0)))
    if not np.isfinite(F + M):
        raise DensityError("field too large for the interaction terms")
    logdetA = tree_log_determinant(g, t, extra_diag=pinned.eps, drop=None)
    return float(-t.sum() - F - M + 0.5 * logdetA - 0.5 * g.n * LOG_2PI)


def _vertex_sums(g: WeightedGraph, edge_vals):
    s = np.zeros(g.n)
    np.add.at(s, g.edges[:, 0], edge_vals)
    np.add.at(s, g.edges[:, 1], edge_vals)
    return s


def cd_log_constant(g: WeightedGraph, a, i0: int) -> float:
    """log of the Gamma-function normalisation constant of the mixing density.

    Value: 2^{1 - N + sum a_e} / pi^{(N-1)/2} * Gamma(a_{i0}/2)
    prod_{i != i0} Gamma((a_i+1)/2) / prod_e Gamma(a_e).  The 2-exponent is
    rederived from the Gamma integral over the auxiliary z-variables (each
    contributes (2/y_i)^{c_i} with sum c_i = sum a_e + (N-1)/2); quadrature
    on small graphs confirms unit mass with this constant.
    """
    a = np.asarray(a, dtype=float)
    a_i = _vertex_sums(g, a)
    val = (1.0 - g.n + a.sum()) * np.log(2.0) - 0.5 * (g.n - 1) * np.log(np.pi)
    val += gammaln(a_i[i0] / 2.0)
    val += sum(gammaln((a_i[k] + 1.0) / 2.0) for k in range(g.n) if k != i0)
    val -= gammaln(a).sum()
    return float(val)


def cd_log_density(g: WeightedGraph, a, i0: int, e0: int, y) -> float:
    """Log of the Coppersmith-Diaconis mixing density at conductances y.

    `y` has one entry per edge with y[e0] == 1 (the gauge-fixed edge); the
    value is a density with respect to prod_{e != e0} dy_e, i.e. the reference
    factors dy_e / y_e of the displayed integral are folded in as
    -sum_{e != e0} log y_e.
    """
    a = np.asarray(a, dtype=float)
    y = np.asarray(y, dtype=float)
    if y[e0] != 1.0:
        raise DensityError("gauge edge must have y[e0] == 1")
    if np.any(y <= 0):
        raise DensityError("conductances must be positive")
    y_i = _vertex_sums(g, y)
    logy = np.log(y)
    log_tree = tree_log_determinant(g.with_weights(y), drop="best")
    val = cd_log_constant(g, a, i0)
    val += 0.5 * np.log(y_i[i0])
    val += float(np.sum(a * logy))
    val -= float(np.sum((_vertex_sums(g, a) + 1.0) / 2.0 * np.log(y_i)))
    val += 0.5 * log_tree
    val -= float(logy.sum() - logy[e0])
    return float(val)
