"""Phase constants and finite-box decay / resistance diagnostics.

The quadrature constants I_beta, I_hat, J_hat and the thresholds beta_c(d),
a_c(d) control the exponential-decay regime of the pinned field measure.
`decay_scan` and `resistance_bound_check` turn the corresponding inequalities
into measurable Monte Carlo diagnostics on small lattice boxes.
"""

from __future__ import annotations

import numpy as np
from scipy import integrate, optimize
from scipy.special import gammaln

from .graphs import LatticeBox, PinnedGraph, build_lattice_box, effective_resistance

SQRT_2PI = float(np.sqrt(2.0 * np.pi))


class BracketError(RuntimeError):
    pass


def i_beta(beta: float) -> float:
    """sqrt(beta) * integral of e^{-beta(cosh t - 1)} dt / sqrt(2 pi).

    Strictly increasing in beta with limits 0 and 1.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")

    def f(t):
        with np.errstate(over="ignore"):
            return np.exp(-beta * (np.cosh(t) - 1.0))

    val, _ = integrate.quad(f, -np.inf, np.inf, epsabs=1e-12, epsrel=1e-12, limit=200)
    return float(np.sqrt(beta) * val / SQRT_2PI)


def phase_base_beta(beta: float, d: int) -> float:
    """The decay-bound base I_beta e^{beta(2d-2)} (2d-1)."""
    return i_beta(beta) * np.exp(beta * (2 * d - 2)) * (2 * d - 1)


def beta_c(d: int) -> float:
    """Root of the strictly increasing map beta -> I_beta e^{beta(2d-2)}(2d-1).

    Returns infinity for d = 1 (the map stays below 1 there).
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if d == 1:
        return float("inf")
    lo, hi = 1e-12, 1.0
    while phase_base_beta(hi, d) < 1.0:
        hi *= 2.0
    root = optimize.brentq(lambda b: phase_base_beta(b, d) - 1.0, lo, hi,
                           xtol=1e-15, rtol=8.9e-16)
    return float(root)


def i_hat(a: float, representation: str = "cosh") -> float:
    """Gamma-average of I_beta over beta ~ Gamma(a, 1).

    `cosh` uses the closed reduction Gamma(a+1/2)/Gamma(a) times the
    cosh^{-a-1/2} integral; `average` integrates I_beta against the Gamma
    density directly.  Both agree to 1e-8 (tested).
    """
    if a <= 0:
        raise ValueError("a must be positive")
    if representation == "cosh":
        def f(t):
            with np.errstate(over="ignore"):
                return np.exp(-(a + 0.5) * np.log(np.cosh(t))) if abs(t) < 700 else 0.0
        val, _ = integrate.quad(f, -np.inf, np.inf, epsabs=1e-12, epsrel=1e-12, limit=200)
        return float(np.exp(gammaln(a + 0.5) - gammaln(a)) * val / SQRT_2PI)
    if representation == "average":
        def f(b):
            return i_beta(b) * np.exp((a - 1.0) * np.log(b) - b - gammaln(a))
        val, _ = integrate.quad(f, 0.0, np.inf, epsabs=1e-10, epsrel=1e-10, limit=200)
        return float(val)
    raise ValueError(f"unknown representation {representation!r}")


def j_hat(a: float) -> float:
    """E[max(beta, 1) e^{min(beta, 1)}] over beta ~ Gamma(a, 1); always > 1."""
    if a <= 0:
        raise ValueError("a must be positive")

    def dens(b):
        return np.exp((a - 1.0) * np.log(b) - b - gammaln(a))

    below, _ = integrate.quad(lambda b: np.exp(b) * dens(b), 0.0, 1.0,
                              epsabs=1e-10, epsrel=1e-10, limit=200)
    above, _ = integrate.quad(lambda b: b * np.e * dens(b), 1.0, np.inf,
                              epsabs=1e-10, epsrel=1e-10, limit=200)
    return float(below + above)


def phase_base_a(a: float, d: int) -> float:
    """The Gamma-environment decay base I_hat J_hat^{2d-2} (2d-1)."""
    return i_hat(a) * j_hat(a) ** (2 * d - 2) * (2 * d - 1)


def a_c(d: int, a_max: float = 1e6) -> float:
    """Root of a -> I_hat J_hat^{2d-2}(2d-1) = 1, bracketed by doubling.

    Raises BracketError (with the scanned range) when the product never
    reaches 1, as happens for d = 1.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    lo = 1e-3
    hi = lo
    while phase_base_a(hi, d) < 1.0:
        hi *= 2.0
        if hi > a_max:
            raise BracketError(
                f"no root of the phase product in ({lo:.3g}, {a_max:.3g}) for d={d}")
    root = optimize.brentq(lambda a: phase_base_a(a, d) - 1.0, lo, hi,
                           xtol=1e-12, rtol=8.9e-16)
    return float(root)


def _axis_vertices(box: LatticeBox):
    """Representative vertex per distance 1..radius, on the first lattice axis."""
    out = []
    for k in range(1, box.radius + 1):
        coord = (k,) + (0,) * (box.d - 1)
        out.append((k, box.coord_index(coord)))
    return out


def _pinned_box(box: LatticeBox, beta: float, eta: float) -> PinnedGraph:
    g = box.graph.with_weights(np.full(box.graph.m, beta))
    eps = np.zeros(g.n)
    eps[box.origin] = eta
    return PinnedGraph(g, eps)


def _curvature_transform(pinned: PinnedGraph) -> np.ndarray:
    """Inverse square root of the field measure's curvature at t = 0.

    The quadratic expansion of the negative log-density is
    (1/2) t^T (L + diag(eps)) t with L the coupling-weighted Laplacian, so
    proposals shaped by (L + diag(eps))^{-1/2} move every coordinate at its
    natural scale -- essential on boxes where far-from-pin coordinates
    fluctuate orders of magnitude more than the pinned one.
    """
    H = pinned.base.laplacian()
    H[np.diag_indices(len(H))] += pinned.eps
    evals, evecs = np.linalg.eigh(H)
    return (evecs / np.sqrt(evals)) @ evecs.T


def _field_samples(pinned: PinnedGraph, n_samples: int, seed, burn_in=6000):
    from .mcmc import adapt_and_sample
    from .measures import sigma_log_density

    return adapt_and_sample(lambda t: sigma_log_density(pinned, t),
                            pinned.base.n, n_samples, seed=seed, burn_in=burn_in,
                            proposal_transform=_curvature_transform(pinned),
                            max_thinning=512, pilot_acf_threshold=0.1)


def decay_scan(d: int, n: int, beta: float = None, a: float = None,
               eta: float = 1.0, n_samples: int = 2000, seed=0,
               n_env: int = 20) -> list:
    """Monte Carlo estimates of the pinned-measure observable e^{t_x/2}.

    One row per distance along a lattice axis:
    {distance, estimate, stderr, bound, flagged}.  With `beta` fixed the bound
    is C0 I_eta base^{|x|}, base = I_beta e^{beta(2d-2)}(2d-1); with `a` the
    couplings are Gamma(a,1) per edge, the outer loop averages over `n_env`
    environments and the bound uses the hatted constants.
    """
    if (beta is None) == (a is None):
        raise ValueError("give exactly one of beta, a")
    from .mcmc import effective_sample_size

    box = build_lattice_box(d, n)
    targets = _axis_vertices(box)
    c0 = 2.0 * d / (2.0 * d - 1.0)
    if beta is not None:
        base = phase_base_beta(beta, d)
        pinned = _pinned_box(box, beta, eta)
        samples, diag = _field_samples(pinned, n_samples, seed)
        rows = []
        for dist, v in targets:
            obs = np.exp(0.5 * samples[:, v])
            ess = max(effective_sample_size(obs), 2.0)
            rows.append({
                "distance": dist,
                "estimate": float(obs.mean()),
                "stderr": float(obs.std(ddof=1) / np.sqrt(ess)),
                "bound": float(c0 * i_beta(eta) * base ** dist),
                "flagged": diag["flagged"],
            })
        return rows
    base = phase_base_a(a, d)
    rng = np.random.default_rng(seed)
    per_env = {dist: [] for dist, _ in targets}
    flagged = False
    for env in range(n_env):
        betas = rng.gamma(a, size=box.graph.m)
        g = box.graph.with_weights(betas)
        eps = np.zeros(g.n)
        eps[box.origin] = eta
        pinned = PinnedGraph(g, eps)
        samples, diag = _field_samples(pinned, n_samples, seed=[seed, env])
        flagged = flagged or diag["flagged"]
        for dist, v in targets:
            per_env[dist].append(np.exp(0.5 * samples[:, v]).mean())
    rows = []
    for dist, _ in targets:
        vals = np.array(per_env[dist])
        rows.append({
            "distance": dist,
            "estimate": float(vals.mean()),
            "stderr": float(vals.std(ddof=1) / np.sqrt(len(vals))),
            "bound": float(c0 * i_beta(eta) * base ** dist),
            "flagged": flagged,
        })
    return rows


def fitted_log_slope(rows) -> float:
    """Least-squares slope of log(estimate) against distance."""
    x = np.array([r["distance"] for r in rows], dtype=float)
    y = np.log(np.array([r["estimate"] for r in rows]))
    return float(np.polyfit(x, y, 1)[0])


def resistance_bound_check(d: int, n: int, beta: float, n_samples: int = 200,
                           seed=0, eta: float = 1.0) -> dict:
    """Monte Carlo check of E[c_0 R(0, boundary, c)] <= 16 d R(0, boundary).

    Samples the origin-pinned field, forms conductances c_ij = beta
    e^{t_i + t_j}, and compares the mean of c_0 R(0, boundary, c) (c_0 the
    total conductance at the origin) against 16 d times the unit-conductance
    resistance of the same box.  Also asserts, per sample, the flow bound
    R(0, boundary, c) <= sum theta^2 / c with theta the unit-conductance unit
    current flow, and the energy identity sum theta^2 = R(0, boundary).
    """
    box = build_lattice_box(d, n)
    g = box.graph
    unit = np.ones(g.m)
    r_unit, theta = effective_resistance(g, unit, box.origin, box.boundary,
                                         return_flow=True)
    energy = float(np.sum(theta ** 2))
    pinned = _pinned_box(box, beta, eta)
    samples, diag = _field_samples(pinned, n_samples, seed)
    i, j = g.edges[:, 0], g.edges[:, 1]
    lhs_vals = np.empty(n_samples)
    flow_bound_ok = True
    for k in range(n_samples):
        t = samples[k]
        c = beta * np.exp(t[i] + t[j])
        c0 = float(c[g.inc_edges[box.origin][g.inc_mask[box.origin]]].sum())
        r_c = effective_resistance(g, c, box.origin, box.boundary)
        lhs_vals[k] = c0 * r_c
        if r_c > float(np.sum(theta ** 2 / c)) + 1e-12:
            flow_bound_ok = False
    lhs = float(lhs_vals.mean())
    stderr = float(lhs_vals.std(ddof=1) / np.sqrt(n_samples))
    rhs = float(16.0 * d * r_unit)
    return {
        "lhs": lhs,
        "lhs_stderr": stderr,
        "rhs": rhs,
        "holds": lhs <= rhs + 3.0 * stderr,
        "flow_bound_per_sample": flow_bound_ok,
        "energy_identity_gap": abs(energy - r_unit),
        "flagged": diag["flagged"],
    }
