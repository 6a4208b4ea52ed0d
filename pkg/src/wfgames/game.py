"""Nash equilibria of the multi-user power game by iterated water-filling.

Each user greedily water-fills against the interference the others are
currently causing.  On admissible channels (every bin's hollow cross-gain
matrix has spectral norm below one) the best-response map is a contraction,
the Nash equilibrium is unique, and these sweeps converge to it from any
starting point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import NormalizedChannel
from .waterfill import (PowerAllocation, all_rates_normalized,
                        effective_noise, waterfill_values)

__all__ = [
    "ConvergenceError",
    "GameConfig",
    "EquilibriumResult",
    "iterative_waterfilling",
    "follower_subgame_ne",
]


class ConvergenceError(RuntimeError):
    """An iterative solve did not converge within its caps."""


@dataclass
class GameConfig:
    """Budgets and iteration controls for the water-filling game.

    iw_tolerance is the largest per-bin move a full sweep may make while
    still being declared converged; None means 1e-8 times the largest
    budget.  fixed_users hold their given allocation and never update
    (used for follower sub-games).  simultaneous switches from sequential
    round-robin sweeps to all-at-once updates; convergence is only
    guaranteed for the sequential default.
    """

    budgets: np.ndarray
    iw_tolerance: float | None = None
    iw_max_iters: int = 10_000
    simultaneous: bool = False
    fixed_users: tuple = ()

    def __post_init__(self):
        b = np.atleast_1d(np.asarray(self.budgets, dtype=np.float64))
        if np.any(b <= 0) or not np.all(np.isfinite(b)):
            raise ValueError("budgets must be positive and finite")
        self.budgets = b
        self.fixed_users = tuple(sorted(set(int(u) for u in self.fixed_users)))
        if self.iw_tolerance is not None and self.iw_tolerance <= 0:
            raise ValueError("iw_tolerance must be positive")
        if self.iw_max_iters < 1:
            raise ValueError("iw_max_iters must be at least 1")

    def resolved_tolerance(self) -> float:
        if self.iw_tolerance is not None:
            return float(self.iw_tolerance)
        return 1e-8 * float(self.budgets.max())


@dataclass
class EquilibriumResult:
    """Outcome of an equilibrium solve.

    allocations has one PowerAllocation per user (fixed users included,
    unchanged); rates are recomputed from the final allocations, in bits.
    iterations counts full sweeps.  converged is False when the sweep cap
    was hit; the result is still the last iterate, never fabricated.
    """

    allocations: list
    rates: np.ndarray
    iterations: int
    converged: bool

    def powers(self) -> np.ndarray:
        return np.stack([a.power for a in self.allocations])


def _expand_budgets(cfg: GameConfig, num_users: int) -> np.ndarray:
    if cfg.budgets.size == 1:
        return np.full(num_users, float(cfg.budgets[0]))
    if cfg.budgets.size != num_users:
        raise ValueError(
            f"{cfg.budgets.size} budgets for {num_users} users")
    return cfg.budgets


def iterative_waterfilling(nc: NormalizedChannel, cfg: GameConfig,
                           initial: np.ndarray | None = None
                           ) -> EquilibriumResult:
    """Best-response sweeps until no bin moves more than the tolerance.

    Users update in ascending index order within a sweep (or together when
    cfg.simultaneous).  initial is a (K, N) matrix; by default every free
    user starts uniform at budget/N.  Fixed users must have their rows
    supplied via initial.  Non-convergence flags the result instead of
    raising, so callers can decide what a stale iterate is worth.
    """
    k_users, n_bins = nc.num_users, nc.num_bins
    budgets = _expand_budgets(cfg, k_users)
    fixed = set(cfg.fixed_users)
    if any(u < 0 or u >= k_users for u in fixed):
        raise ValueError("fixed_users outside the user range")
    if fixed and initial is None:
        raise ValueError("fixed users need their allocation passed in initial")

    if initial is None:
        powers = np.tile((budgets / n_bins)[:, None], (1, n_bins))
    else:
        powers = np.array(initial, dtype=np.float64)
        if powers.shape != (k_users, n_bins):
            raise ValueError(f"initial must have shape {(k_users, n_bins)}")
        for u in range(k_users):
            # validate feasibility row by row, fixed rows included
            PowerAllocation(powers[u], budgets[u])

    free = [u for u in range(k_users) if u not in fixed]
    tol = cfg.resolved_tolerance()
    converged = False
    sweeps = 0
    for sweeps in range(1, cfg.iw_max_iters + 1):
        delta = 0.0
        if cfg.simultaneous:
            replies = [waterfill_values(effective_noise(nc, u, powers),
                                        budgets[u]) for u in free]
            for u, p_new in zip(free, replies):
                delta = max(delta, float(np.abs(p_new - powers[u]).max()))
                powers[u] = p_new
        else:
            for u in free:
                p_new = waterfill_values(effective_noise(nc, u, powers),
                                         budgets[u])
                delta = max(delta, float(np.abs(p_new - powers[u]).max()))
                powers[u] = p_new
        if delta <= tol:
            converged = True
            break

    allocations = [PowerAllocation(powers[u].copy(), budgets[u])
                   for u in range(k_users)]
    rates = all_rates_normalized(nc, powers)
    return EquilibriumResult(allocations=allocations, rates=rates,
                             iterations=sweeps, converged=converged)


def follower_subgame_ne(nc: NormalizedChannel, cfg: GameConfig,
                        leader_allocs: dict) -> EquilibriumResult:
    """Nash equilibrium among followers with leaders' transmissions frozen.

    leader_allocs maps user index to that leader's fixed power vector; the
    leaders' interference enters the followers' effective noise exactly as
    extra per-bin noise.  Returns a full K-user result whose leader rows
    are the given allocations.
    """
    k_users, n_bins = nc.num_users, nc.num_bins
    if not leader_allocs:
        raise ValueError("need at least one leader allocation")
    budgets = _expand_budgets(cfg, k_users)
    initial = np.tile((budgets / n_bins)[:, None], (1, n_bins))
    for u, p in leader_allocs.items():
        initial[u] = np.asarray(p, dtype=np.float64)
    sub_cfg = GameConfig(budgets=budgets,
                         iw_tolerance=cfg.iw_tolerance,
                         iw_max_iters=cfg.iw_max_iters,
                         simultaneous=cfg.simultaneous,
                         fixed_users=tuple(leader_allocs))
    return iterative_waterfilling(nc, sub_cfg, initial=initial)
