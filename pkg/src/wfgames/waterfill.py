"""Single-user water-filling over parallel Gaussian bins, and rate math.

Given per-bin effective noise nu^f (noise plus interference, both already
divided by the user's direct gain) and a power budget P, the rate-optimal
allocation is

    P^f = max(lambda - nu^f, 0),   sum_f P^f = P,

with a common water level lambda.  Two independent solvers are provided:
a bisection on lambda and a closed-form sort/active-set construction.  They
must agree to tight tolerance on any instance; tests rely on that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, NormalizedChannel

__all__ = [
    "PowerAllocation",
    "waterfill_values",
    "waterfill_batch",
    "waterfill_closed_form",
    "waterfill_bisection",
    "effective_noise",
    "best_response",
    "rate",
    "rate_normalized",
    "all_rates_normalized",
]

# Relative slack allowed when validating a budget constraint.
BUDGET_SLACK = 1e-9


@dataclass
class PowerAllocation:
    """A per-bin transmit power vector tied to the budget it must respect."""

    power: np.ndarray
    budget: float

    def __post_init__(self):
        p = np.array(self.power, dtype=np.float64)
        if p.ndim != 1:
            raise ValueError("power must be a 1-D vector")
        if not np.all(np.isfinite(p)):
            raise ValueError("power must be finite")
        if self.budget <= 0:
            raise ValueError("budget must be positive")
        scale = max(self.budget, 1.0)
        if p.min(initial=0.0) < -1e-12 * scale:
            raise ValueError("power must be nonnegative")
        np.clip(p, 0.0, None, out=p)  # forgive roundoff-level negatives
        if p.sum() > self.budget * (1.0 + BUDGET_SLACK):
            raise ValueError(
                f"allocation spends {p.sum()!r} > budget {self.budget!r}")
        self.power = p

    @property
    def num_bins(self) -> int:
        return self.power.shape[0]


def waterfill_values(nu: np.ndarray, budget: float) -> np.ndarray:
    """Closed-form water-filling, returning the raw power vector.

    Fast path used inside iterative solvers; see waterfill_closed_form for
    the construction.
    """
    return _closed_form(np.asarray(nu, dtype=np.float64), budget)[0]


def _closed_form(nu: np.ndarray, budget: float):
    if budget <= 0:
        raise ValueError("budget must be positive")
    if np.any(nu <= 0) or not np.all(np.isfinite(nu)):
        raise ValueError("effective noise must be positive and finite")
    order = np.argsort(nu, kind="stable")  # ties resolved by ascending bin
    s = nu[order]
    csum = np.cumsum(s)
    j = np.arange(1, s.size + 1)
    # Bins 1..k are active iff  k*s_k - sum_{m<=k} s_m < budget,
    # a nondecreasing left side, so k is just the count of true entries.
    k = int(np.count_nonzero(j * s - csum < budget))
    level = (budget + csum[k - 1]) / k
    p = np.zeros_like(s)
    p[:k] = level - s[:k]
    out = np.empty_like(p)
    out[order] = p
    return out, k, level


def waterfill_batch(nu_rows: np.ndarray, budget: float) -> np.ndarray:
    """Vectorized closed-form water-filling, one instance per row."""
    nu_rows = np.asarray(nu_rows, dtype=np.float64)
    if nu_rows.ndim != 2:
        raise ValueError("nu_rows must be (instances, bins)")
    s = np.sort(nu_rows, axis=1)
    csum = np.cumsum(s, axis=1)
    j = np.arange(1, s.shape[1] + 1)
    k = np.count_nonzero(j * s - csum < budget, axis=1)  # active counts
    rows = np.arange(s.shape[0])
    level = (budget + csum[rows, k - 1]) / k
    p = np.maximum(level[:, None] - nu_rows, 0.0)
    # Ties at the water level cannot make an inactive bin positive: inactive
    # bins satisfy nu >= level, so the clip above already zeroes them.
    return p


def waterfill_closed_form(nu, budget: float):
    """Sort/active-set water-filling.

    Sorts effective noise ascending (ties by bin index), finds the active
    count k as the largest j with  j*nu_(j) - sum_{m<=j} nu_(m) < budget
    (all bins active when that holds at j = N), sets the water level to
    (budget + sum of the k smallest nu) / k, and fills active bins up to it.
    Returns (PowerAllocation, k).
    """
    p, k, _ = _closed_form(np.asarray(nu, dtype=np.float64), budget)
    return PowerAllocation(p, budget), k


def waterfill_bisection(nu, budget: float, rel_tol: float = 1e-10,
                        max_iters: int = 200) -> PowerAllocation:
    """Water-filling by bisection on the water level.

    The spent power sum(lambda - nu)^+ is continuous and nondecreasing in
    lambda, zero at min(nu) and at least budget at min(nu) + budget, so that
    bracket always contains the solution.  Stops when the spent power
    matches the budget within rel_tol * budget.
    """
    nu = np.asarray(nu, dtype=np.float64)
    if budget <= 0:
        raise ValueError("budget must be positive")
    if np.any(nu <= 0) or not np.all(np.isfinite(nu)):
        raise ValueError("effective noise must be positive and finite")
    lo = float(nu.min())
    hi = lo + budget
    eps = rel_tol * budget
    for _ in range(max_iters):
        mid = 0.5 * (lo + hi)
        spent = np.maximum(mid - nu, 0.0).sum()
        if abs(spent - budget) <= eps:
            lo = hi = mid
            break
        if spent < budget:
            lo = mid
        else:
            hi = mid
    level = 0.5 * (lo + hi)
    return PowerAllocation(np.maximum(level - nu, 0.0), budget)


def effective_noise(nc: NormalizedChannel, user: int,
                    powers: np.ndarray) -> np.ndarray:
    """nu_user^f = N_user^f + sum_{j != user} alpha_{j,user}^f P_j^f.

    powers is the (K, N) matrix of everyone's allocation; the user's own
    row is ignored (the cross matrix has zero diagonal).
    """
    return nc.noise_norm[user] + np.einsum(
        "jf,jf->f", nc.cross[:, user, :], powers)


def best_response(nc: NormalizedChannel, user: int, powers: np.ndarray,
                  budget: float) -> PowerAllocation:
    """Rate-optimal reply of one user to everyone else's fixed allocation."""
    alloc, _ = waterfill_closed_form(effective_noise(nc, user, powers), budget)
    return alloc


def rate(ch: ChannelRealization, user: int, powers: np.ndarray) -> float:
    """Achievable rate of one user in bits.

    R_k = sum_f log2(1 + P_k^f |H_kk^f|^2
                         / (sigma_k^f + sum_{j!=k} P_j^f |H_jk^f|^2))
    """
    powers = np.asarray(powers, dtype=np.float64)
    signal = powers[user] * ch.gain[user, user, :]
    received = np.einsum("jf,jf->f", powers, ch.gain[:, user, :])
    interf = received - signal  # remove own term from the full sum
    return float(np.log2(1.0 + signal / (ch.noise[user] + interf)).sum())


def rate_normalized(nc: NormalizedChannel, user: int,
                    powers: np.ndarray) -> float:
    """Same rate computed from the normalized channel."""
    powers = np.asarray(powers, dtype=np.float64)
    nu = effective_noise(nc, user, powers)
    return float(np.log2(1.0 + powers[user] / nu).sum())


def all_rates_normalized(nc: NormalizedChannel,
                         powers: np.ndarray) -> np.ndarray:
    """Rates of every user in bits, as a (K,) vector."""
    return np.array([rate_normalized(nc, k, powers)
                     for k in range(nc.num_users)])
