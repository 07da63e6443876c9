"""Random-walk Metropolis sampling of the field measures.

Targets are the log-densities from `measures`: either on the zero-sum
hyperplane (pinned-vertex mode, proposals projected) or on the full vertex
space (eps-pinned mode).  Adaptation of the proposal scale happens during
burn-in only; the sampling phase runs a fixed kernel so the chain is honestly
Markov.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class McmcChain:
    position: np.ndarray
    scale: float
    zero_sum: bool = False
    transform: np.ndarray | None = None    # proposal shape, step = scale * T xi
    accepted: int = 0
    proposed: int = 0
    rejected_nonfinite: int = 0
    current_logp: float = np.nan


def _project(x):
    return x - x.mean()


def metropolis_step(chain: McmcChain, log_density, rng) -> bool:
    """One Gaussian random-walk proposal; returns True if accepted.

    Proposals landing on a non-finite log-density are rejected outright and
    counted separately.
    """
    step = rng.normal(size=len(chain.position)) * chain.scale
    if chain.transform is not None:
        step = chain.transform @ step
    if chain.zero_sum:
        step = _project(step)
    proposal = chain.position + step
    if chain.zero_sum:
        proposal = _project(proposal)
    chain.proposed += 1
    try:
        logp_new = log_density(proposal)
    except (ValueError, FloatingPointError):
        logp_new = -np.inf
    if not np.isfinite(logp_new):
        chain.rejected_nonfinite += 1
        return False
    if np.log(rng.random()) < logp_new - chain.current_logp:
        chain.position = proposal
        chain.current_logp = logp_new
        chain.accepted += 1
        return True
    return False


def autocorrelation(x, max_lag: int):
    """Normalised autocorrelations of a series at lags 0..max_lag."""
    x = np.asarray(x, dtype=float)
    x = x - x.mean()
    var = float(np.dot(x, x))
    if var == 0.0:
        return np.concatenate([[1.0], np.zeros(max_lag)])
    return np.array([np.dot(x[: len(x) - t], x[t:]) / var for t in range(max_lag + 1)])


def effective_sample_size(x) -> float:
    """ESS via the truncated positive autocorrelation sum."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    rho = autocorrelation(x, min(n // 2, 200))
    s = 0.0
    for t in range(1, len(rho)):
        if rho[t] < 0.05:
            break
        s += rho[t]
    return float(n / (1.0 + 2.0 * s))


def split_rhat(x) -> float:
    """Potential scale reduction of one chain split into halves."""
    x = np.asarray(x, dtype=float)
    half = len(x) // 2
    chains = np.stack([x[:half], x[half: 2 * half]])
    m, n = chains.shape
    means = chains.mean(axis=1)
    w = chains.var(axis=1, ddof=1).mean()
    b = n * means.var(ddof=1)
    if w == 0.0:
        return 1.0
    return float(np.sqrt(((n - 1) / n * w + b / n) / w))


def adapt_and_sample(log_density, dim: int, n_samples: int, *,
                     zero_sum: bool = False, thinning: int | None = None,
                     seed=0, burn_in: int = 10_000, initial=None,
                     initial_scale: float = 1.0,
                     proposal_transform=None, max_thinning: int = 64,
                     pilot_acf_threshold: float = 0.5) -> tuple:
    """Adaptive burn-in followed by fixed-kernel sampling.

    Returns (samples (n_samples, dim), diagnostics dict).  The proposal scale
    follows a Robbins-Monro recursion toward the usual 0.44 / 0.23 acceptance
    targets during burn-in and is frozen afterwards.  If `thinning` is None it
    is chosen from a pilot run so the lag-1 autocorrelation of the first
    coordinate drops below 0.5 (capped at `max_thinning`).  A symmetric
    `proposal_transform` matrix reshapes proposals (step = scale * T xi),
    useful to match badly conditioned targets; symmetry keeps the kernel
    reversible without a Hastings correction.  Diagnostics report per-coordinate effective
    sample size and split-chain potential scale reduction; any Rhat above
    1.05 sets the `flagged` bit (never a silent pass).
    """
    rng = np.random.default_rng(seed)
    x0 = np.zeros(dim) if initial is None else np.asarray(initial, dtype=float)
    if zero_sum:
        x0 = _project(x0)
    if proposal_transform is not None:
        proposal_transform = np.asarray(proposal_transform, dtype=float)
        if not np.allclose(proposal_transform, proposal_transform.T):
            raise ValueError("proposal transform must be symmetric")
    chain = McmcChain(position=x0.copy(), scale=initial_scale, zero_sum=zero_sum,
                      transform=proposal_transform)
    chain.current_logp = log_density(chain.position)
    if not np.isfinite(chain.current_logp):
        raise ValueError("initial point has non-finite log-density")

    eff_dim = dim - 1 if zero_sum else dim
    target = 0.44 if eff_dim == 1 else 0.23
    log_scale = np.log(chain.scale)
    for k in range(burn_in):
        accepted = metropolis_step(chain, log_density, rng)
        log_scale += ((1.0 if accepted else 0.0) - target) / (k + 10) ** 0.6
        chain.scale = float(np.exp(log_scale))
    frozen_scale = chain.scale

    if thinning is None:
        pilot = np.empty(max(2000, 8 * max_thinning))
        for k in range(len(pilot)):
            metropolis_step(chain, log_density, rng)
            pilot[k] = chain.position[0]
        rho = autocorrelation(pilot, max_thinning)
        thinning = 1
        while thinning < max_thinning and rho[thinning] >= pilot_acf_threshold:
            thinning += 1

    chain.accepted = chain.proposed = 0
    samples = np.empty((n_samples, dim))
    for k in range(n_samples):
        for _ in range(thinning):
            metropolis_step(chain, log_density, rng)
        samples[k] = chain.position
    assert chain.scale == frozen_scale        # no adaptation after burn-in

    ess = [effective_sample_size(samples[:, c]) for c in range(dim)]
    rhat = [split_rhat(samples[:, c]) for c in range(dim)]
    diagnostics = {
        "ess": ess,
        "rhat": rhat,
        "acceptance": chain.accepted / max(chain.proposed, 1),
        "scale": frozen_scale,
        "thinning": thinning,
        "rejected_nonfinite": chain.rejected_nonfinite,
        "flagged": bool(max(rhat) > 1.05),
    }
    return samples, diagnostics
