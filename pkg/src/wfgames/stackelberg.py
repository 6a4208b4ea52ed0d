"""Stackelberg power control: one informed leader against myopic followers.

The leader commits a per-bin power vector p.  Followers cannot see that
commitment as anything but extra noise, so they settle into the unique Nash
equilibrium of their own sub-game given p (for a single follower this is
one closed-form water-fill).  The leader's payoff

    f(p) = sum_f log2(1 + p^f / (N_L^f + sum_k alpha_k^f q_k^f(p)))

is maximized subject to p >= 0, sum_f p^f <= budget.  Solvers here:

  * exhaustive_stackelberg: grid enumeration of the leader simplex, the
    slow-but-sure baseline.
  * dual_bound: grid-exhaustive maximization of the Lagrangian
    L'(p, mu) = ln-rate(p) + mu (budget - sum p) over an enlarged box,
    bisecting mu on the spent power.  Any evaluated D'(mu) upper-bounds
    the constrained optimum (weak duality).
  * algorithm1_dual: the low-complexity variant; inner per-bin coordinate
    ascent of L' at fixed mu, outer bisection on mu, starting from the
    Nash allocation and keeping the best budget-feasible iterate seen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import NormalizedChannel
from .game import ConvergenceError, GameConfig, follower_subgame_ne
from .waterfill import (PowerAllocation, all_rates_normalized,
                        waterfill_batch, waterfill_closed_form)

__all__ = [
    "EvaluationBudgetError",
    "LeaderProblem",
    "StackelbergResult",
    "leader_objective",
    "follower_response",
    "interference_free_bound",
    "exhaustive_stackelberg",
    "lagrangian_value",
    "dual_inner_maximum",
    "dual_power_sums",
    "dual_bound",
    "algorithm1_dual",
]

LN2 = math.log(2.0)


class EvaluationBudgetError(RuntimeError):
    """A grid enumeration would exceed the configured evaluation cap."""


@dataclass
class LeaderProblem:
    """A Stackelberg instance plus solver knobs.

    grid_step is the leader-power quantum for every grid search.  Dual
    searches range over [0, box_factor * leader budget] per bin; the
    budget constraint is only enforced through mu and a final projection.
    mu_tolerance / coord_tolerance of None resolve to 1e-6 of the initial
    bracket width / leader budget.
    """

    nc: NormalizedChannel
    budgets: np.ndarray
    leader: int = 0
    grid_step: float = 0.1
    eval_cap: int = 100_000_000
    box_factor: float = 2.0
    mu_bracket: tuple | None = None
    mu_tolerance: float | None = None
    dual_max_iters: int = 64
    coord_max_sweeps: int = 100
    coord_tolerance: float | None = None
    zoom_levels: int = 2
    zoom_points: int = 17
    polish_sweeps: int = 16
    follower_tolerance: float | None = None
    follower_max_rounds: int = 10_000

    def __post_init__(self):
        b = np.atleast_1d(np.asarray(self.budgets, dtype=np.float64))
        if b.size == 1:
            b = np.full(self.nc.num_users, float(b[0]))
        if b.size != self.nc.num_users:
            raise ValueError(f"{b.size} budgets for {self.nc.num_users} users")
        if np.any(b <= 0) or not np.all(np.isfinite(b)):
            raise ValueError("budgets must be positive and finite")
        self.budgets = b
        if not 0 <= self.leader < self.nc.num_users:
            raise ValueError("leader index out of range")
        if self.nc.num_users < 2:
            raise ValueError("need at least one follower")
        if self.grid_step <= 0:
            raise ValueError("grid_step must be positive")
        if self.box_factor < 1.0:
            raise ValueError("box_factor must be at least 1")

    @property
    def leader_budget(self) -> float:
        return float(self.budgets[self.leader])

    @property
    def followers(self) -> list:
        return [u for u in range(self.nc.num_users) if u != self.leader]

    def resolved_coord_tolerance(self) -> float:
        if self.coord_tolerance is not None:
            return float(self.coord_tolerance)
        return 1e-6 * self.leader_budget

    def resolved_follower_tolerance(self) -> float:
        if self.follower_tolerance is not None:
            return float(self.follower_tolerance)
        return 1e-8 * float(self.budgets.max())

    def default_mu_upper(self) -> float:
        # marginal ln-rate of the leader at zero power is at most 1/N_L^f
        return float((1.0 / self.nc.noise_norm[self.leader]).max())

    def game_config(self) -> GameConfig:
        return GameConfig(budgets=self.budgets,
                          iw_tolerance=self.follower_tolerance,
                          iw_max_iters=self.follower_max_rounds)


@dataclass
class StackelbergResult:
    """Leader commitment, induced follower equilibrium, and bookkeeping.

    allocations covers every user (leader included); rates are bits.
    evaluations counts grid objective evaluations (exhaustive), while
    dual_iterations / sweeps count outer mu steps and total coordinate
    sweeps (dual method).  dual_value, when present, is the final local
    Lagrangian value in bits; mu the final multiplier midpoint.
    """

    method: str
    leader: int
    allocations: list
    rates: np.ndarray
    converged: bool = True
    evaluations: int | None = None
    dual_iterations: int | None = None
    sweeps: int | None = None
    mu: float | None = None
    dual_value: float | None = None

    @property
    def leader_alloc(self) -> PowerAllocation:
        return self.allocations[self.leader]

    @property
    def leader_rate(self) -> float:
        return float(self.rates[self.leader])

    def powers(self) -> np.ndarray:
        return np.stack([a.power for a in self.allocations])


# ---------------------------------------------------------------------------
# objective evaluation

def follower_response(p1: np.ndarray, prob: LeaderProblem) -> np.ndarray:
    """Full (K, N) power matrix induced by leader commitment p1.

    One follower: its closed-form water-fill against noise plus the
    leader's interference.  Several followers: the Nash equilibrium of
    their sub-game (raises ConvergenceError if that solve hits its cap).
    """
    p1 = np.asarray(p1, dtype=np.float64)
    nc, lead = prob.nc, prob.leader
    powers = np.zeros((nc.num_users, nc.num_bins))
    powers[lead] = p1
    if nc.num_users == 2:
        foll = prob.followers[0]
        nu = nc.noise_norm[foll] + nc.cross[lead, foll, :] * p1
        alloc, _ = waterfill_closed_form(nu, prob.budgets[foll])
        powers[foll] = alloc.power
        return powers
    result = follower_subgame_ne(nc, prob.game_config(), {lead: p1})
    if not result.converged:
        raise ConvergenceError(
            "follower sub-game did not converge while evaluating the leader "
            "objective")
    return result.powers()


def leader_objective(p1: np.ndarray, prob: LeaderProblem) -> float:
    """Leader rate in bits against the followers' induced equilibrium."""
    return _leader_ln_rate(p1, prob) / LN2


def _leader_ln_rate(p1: np.ndarray, prob: LeaderProblem) -> float:
    # routed through the batch kernel rather than follower_response: dual
    # iterates may overspend the leader budget (the box, not the budget,
    # bounds them) and only the batch path accepts that
    vals, _ = _ln_rates_batch(prob, p1[None, :], None)
    return float(vals[0])


def _follower_ne_batch(prob: LeaderProblem, p1_rows: np.ndarray,
                       warm: np.ndarray) -> np.ndarray:
    """Follower sub-game equilibria for a batch of leader rows.

    Gauss-Seidel over followers, vectorized across the batch, warm-started
    from a single (K, N) state.  Diagonal dominance keeps this a
    contraction, so warm starts converge in a handful of rounds.
    """
    nc, lead = prob.nc, prob.leader
    m = p1_rows.shape[0]
    q = np.broadcast_to(warm, (m,) + warm.shape).copy()
    q[:, lead, :] = p1_rows
    tol = prob.resolved_follower_tolerance()
    for _ in range(prob.follower_max_rounds):
        delta = 0.0
        for u in prob.followers:
            nu = nc.noise_norm[u] + np.einsum(
                "jf,mjf->mf", nc.cross[:, u, :], q)
            p_new = waterfill_batch(nu, float(prob.budgets[u]))
            delta = max(delta, float(np.abs(p_new - q[:, u, :]).max()))
            q[:, u, :] = p_new
        if delta <= tol:
            return q
    raise ConvergenceError(
        "batched follower sub-game hit its round cap")


def _ln_rates_batch(prob: LeaderProblem, p1_rows: np.ndarray,
                    warm: np.ndarray | None = None):
    """Leader ln-rates for a batch of commitments.

    Returns (values, state) where state lets the caller warm-start the
    next batch: the follower powers of every row, shaped (M, K, N) for
    three or more users, or None for the closed-form two-user path.
    """
    nc, lead = prob.nc, prob.leader
    p1_rows = np.asarray(p1_rows, dtype=np.float64)
    if nc.num_users == 2:
        foll = prob.followers[0]
        nu_f = nc.noise_norm[foll] + nc.cross[lead, foll, :] * p1_rows
        g = waterfill_batch(nu_f, float(prob.budgets[foll]))
        nu_l = nc.noise_norm[lead] + nc.cross[foll, lead, :] * g
        return np.log1p(p1_rows / nu_l).sum(axis=1), None
    if warm is None:
        n = nc.num_bins
        warm = (prob.budgets / n)[:, None] * np.ones((1, n))
    q = _follower_ne_batch(prob, p1_rows, warm)
    others = q.copy()
    others[:, lead, :] = 0.0
    nu_l = nc.noise_norm[lead] + np.einsum(
        "jf,mjf->mf", nc.cross[:, lead, :], others)
    return np.log1p(p1_rows / nu_l).sum(axis=1), q


def _finalize(p1: np.ndarray, prob: LeaderProblem, method: str,
              **meta) -> StackelbergResult:
    powers = follower_response(p1, prob)
    allocations = [PowerAllocation(powers[u].copy(), float(prob.budgets[u]))
                   for u in range(prob.nc.num_users)]
    rates = all_rates_normalized(prob.nc, powers)
    return StackelbergResult(method=method, leader=prob.leader,
                             allocations=allocations, rates=rates, **meta)


# ---------------------------------------------------------------------------
# bounds

def interference_free_bound(prob: LeaderProblem) -> float:
    """Leader rate with every follower silent: water-fill on own noise.

    An upper bound on the leader's rate under any strategy profile, tight
    exactly when the followers' interference onto the leader vanishes.
    """
    alloc, _ = waterfill_closed_form(prob.nc.noise_norm[prob.leader],
                                     prob.leader_budget)
    return float(np.log2(1.0 + alloc.power
                         / prob.nc.noise_norm[prob.leader]).sum())


def lagrangian_value(p1: np.ndarray, mu: float, prob: LeaderProblem) -> float:
    """L'(p1, mu) in nats: ln-rate plus mu times the unspent budget.

    p1 only needs to be nonnegative; the budget enters through mu.
    """
    p1 = np.asarray(p1, dtype=np.float64)
    if np.any(p1 < 0):
        raise ValueError("leader powers must be nonnegative")
    return _leader_ln_rate(p1, prob) + mu * (prob.leader_budget - p1.sum())


class _BoxGridCache:
    """Precomputed ln-rates and power sums over the dual search box.

    The box grid {0, step, ..., box_cap}^N is enumerated once in
    lexicographic (row-major) order; only the two per-row scalars are
    kept.  argmax over (ln_rate - mu * power_sum) then prices any mu in
    O(rows), and unravel_index recovers the arg row.
    """

    def __init__(self, prob: LeaderProblem, cap_rows: int = 20_000_000):
        step = prob.grid_step
        box_cap = prob.box_factor * prob.leader_budget
        units = int(math.floor(box_cap / step + 1e-9))
        pts = units + 1
        n = prob.nc.num_bins
        rows = pts ** n
        if rows > min(prob.eval_cap, cap_rows):
            raise EvaluationBudgetError(
                f"dual box grid needs {rows} evaluations "
                f"(cap {min(prob.eval_cap, cap_rows)}); coarsen grid_step "
                f"or reduce bins")
        self.prob = prob
        self.step = step
        self.shape = (pts,) * n
        self.ln_rates = np.empty(rows)
        self.power_sums = np.empty(rows)
        warm = None
        block = 1 << 18
        for start in range(0, rows, block):
            idx = np.arange(start, min(start + block, rows))
            grid = np.stack(np.unravel_index(idx, self.shape), axis=1)
            p1 = grid * step
            vals, state = _ln_rates_batch(prob, p1, warm)
            if state is not None:
                warm = state[-1]
            self.ln_rates[idx] = vals
            self.power_sums[idx] = p1.sum(axis=1)

    def maximize(self, mu: float):
        obj = self.ln_rates - mu * self.power_sums
        i = int(np.argmax(obj))  # first max: lexicographically smallest row
        p1 = np.array(np.unravel_index(i, self.shape), dtype=np.float64)
        p1 *= self.step
        value = float(obj[i] + mu * self.prob.leader_budget)
        return p1, value, float(self.power_sums[i])


def dual_inner_maximum(prob: LeaderProblem, mu: float,
                       cache: _BoxGridCache | None = None):
    """Grid-exhaustive maximizer of L'(., mu) over the box.

    Returns (p1, value_nats, spent_power).  Exponential in the bin count;
    meant for small instances and for auditing the fast path.
    """
    if cache is None:
        cache = _BoxGridCache(prob)
    return cache.maximize(mu)


def dual_power_sums(prob: LeaderProblem, mus) -> np.ndarray:
    """Spent power of the box-grid maximizer at each mu (for monotonicity
    checks: nonincreasing in mu)."""
    cache = _BoxGridCache(prob)
    return np.array([cache.maximize(mu)[2] for mu in np.asarray(mus)])


def dual_bound(prob: LeaderProblem, max_bracket_doublings: int = 60,
               max_bisections: int = 200):
    """Upper bound on the leader optimum by pricing the budget.

    Every evaluated D'(mu) = max_box L'(p, mu) with mu >= 0 dominates the
    budget-constrained optimum over the primal grid, because the penalty
    term is nonnegative for feasible p and the primal grid is contained in
    the box.  The returned mu* (approximately) minimizes D' by bisection
    on the spent power of the inner maximizer, which is nonincreasing in
    mu; the bound reported is the smallest D' actually evaluated.
    Returns (mu_star, bound_bits).
    """
    cache = _BoxGridCache(prob)
    budget = prob.leader_budget
    best_mu, best_val = 0.0, math.inf

    def evaluate(mu):
        nonlocal best_mu, best_val
        _, val, spent = cache.maximize(mu)
        if val < best_val:
            best_mu, best_val = mu, val
        return spent

    if evaluate(0.0) <= budget:
        return 0.0, best_val / LN2
    if prob.mu_bracket is not None:
        mu_lo, mu_hi = prob.mu_bracket
    else:
        mu_lo, mu_hi = 0.0, prob.default_mu_upper()
    for _ in range(max_bracket_doublings):
        if evaluate(mu_hi) <= budget:
            break
        mu_hi *= 2.0
    else:
        raise ConvergenceError("could not bracket mu for the dual bound")
    tol = 1e-12 * max(1.0, mu_hi)
    for _ in range(max_bisections):
        if mu_hi - mu_lo <= tol:
            break
        mid = 0.5 * (mu_lo + mu_hi)
        if evaluate(mid) > budget:
            mu_lo = mid
        else:
            mu_hi = mid
    return best_mu, best_val / LN2


# ---------------------------------------------------------------------------
# leader solvers

def _simplex_full(dims: int, units: int) -> np.ndarray:
    if dims == 1:
        return np.arange(units + 1, dtype=np.int32)[:, None]
    blocks = []
    for lead in range(units + 1):
        tail = _simplex_full(dims - 1, units - lead)
        head = np.full((tail.shape[0], 1), lead, dtype=np.int32)
        blocks.append(np.hstack([head, tail]))
    return np.vstack(blocks)


def _simplex_blocks(dims: int, units: int, limit: int = 1 << 22):
    """Yield lexicographically increasing blocks of the integer simplex
    {n >= 0 : sum n <= units}."""
    if dims == 1 or math.comb(units + dims, dims) <= limit:
        yield _simplex_full(dims, units)
        return
    for lead in range(units + 1):
        head = None
        for tail in _simplex_blocks(dims - 1, units - lead, limit):
            head = np.full((tail.shape[0], 1), lead, dtype=np.int32)
            yield np.hstack([head, tail])


def exhaustive_stackelberg(prob: LeaderProblem) -> StackelbergResult:
    """Enumerate every leader grid point with sum p <= budget.

    The reference solver: exact up to the grid, exponential in bins.
    Ties in the objective resolve to the lexicographically smallest
    allocation because enumeration is lexicographic and only strict
    improvements are accepted.  Refuses instances whose grid point count
    exceeds eval_cap.
    """
    step = prob.grid_step
    units = int(math.floor(prob.leader_budget / step + 1e-9))
    count = math.comb(units + prob.nc.num_bins, prob.nc.num_bins)
    if count > prob.eval_cap:
        raise EvaluationBudgetError(
            f"exhaustive search needs {count} objective evaluations, "
            f"cap is {prob.eval_cap}")
    best_val = -math.inf
    best_p1 = None
    warm = None
    for block in _simplex_blocks(prob.nc.num_bins, units):
        p1 = block.astype(np.float64) * step
        vals, state = _ln_rates_batch(prob, p1, warm)
        if state is not None:
            warm = state[-1]
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val = float(vals[i])
            best_p1 = p1[i].copy()
    return _finalize(best_p1, prob, method="exhaustive", evaluations=count)


def _scan_bin(prob: LeaderProblem, p: np.ndarray, f: int, mu: float,
              candidates: np.ndarray, warm):
    rows = np.repeat(p[None, :], candidates.size, axis=0)
    rows[:, f] = candidates
    vals, state = _ln_rates_batch(prob, rows, warm)
    return vals - mu * candidates, state


def _maximize_bin(prob: LeaderProblem, p: np.ndarray, f: int, mu: float,
                  coarse: np.ndarray, warm, zoom_u: np.ndarray):
    """Best value of L'(., mu) along coordinate f, all else fixed.

    Coarse grid scan over the box followed by zoom_levels bracket zooms,
    all candidate batches evaluated vectorized.  The current point is
    always the last candidate, and only a strictly better coarse point
    triggers the zoom scans, so settled bins cost one batch and accepted
    moves never lower L'.
    Returns (new_coordinate, value, state_for_warm_start).
    """
    here = p[f]
    box_cap = float(coarse[-1])
    vals, state = _scan_bin(prob, p, f, mu, np.append(coarse, here), warm)
    i = int(np.argmax(vals))
    v_here = float(vals[-1])
    if vals[i] <= v_here:
        return here, v_here, None if state is None else state[-1]
    best_c, best_v = float(coarse[i]), float(vals[i])
    best_state = None if state is None else state[i]
    span = float(coarse[1] - coarse[0]) if coarse.size > 1 else prob.grid_step
    for _ in range(prob.zoom_levels):
        lo = max(0.0, best_c - span)
        hi = min(box_cap, best_c + span)
        vals, state = _scan_bin(prob, p, f, mu, lo + (hi - lo) * zoom_u, warm)
        i = int(np.argmax(vals))
        if vals[i] > best_v:
            best_v = float(vals[i])
            best_c = lo + (hi - lo) * float(zoom_u[i])
            best_state = None if state is None else state[i]
        span = (hi - lo) / (prob.zoom_points - 1)
    return best_c, best_v, best_state


def _coordinate_ascent(prob: LeaderProblem, p: np.ndarray, mu: float,
                       warm, trace: list | None):
    """Sweep the bins until a full sweep moves no bin beyond tolerance.

    Mutates p in place; returns (sweeps, converged, warm).  Each accepted
    update maximizes the full Lagrangian along one coordinate, so traced
    values are nondecreasing within this call.
    """
    tol = prob.resolved_coord_tolerance()
    box_cap = prob.box_factor * prob.leader_budget
    # design choice: budget/grid_step coarse points stretched over the
    # whole box, refined by the zoom scans below the coarse spacing
    coarse = np.linspace(0.0, box_cap,
                         max(2, int(round(prob.leader_budget
                                          / prob.grid_step)) + 1))
    zoom_u = np.linspace(0.0, 1.0, prob.zoom_points)
    sweeps = 0
    for sweeps in range(1, prob.coord_max_sweeps + 1):
        delta = 0.0
        for f in range(p.size):
            new_pf, value, state = _maximize_bin(prob, p, f, mu, coarse,
                                                 warm, zoom_u)
            delta = max(delta, abs(new_pf - p[f]))
            p[f] = new_pf
            if state is not None:
                warm = state
            if trace is not None:
                # full Lagrangian at the accepted point: value carries
                # ln-rate minus mu * p[f], add the rest of the penalty
                others = float(p.sum()) - new_pf
                trace.append(value - mu * others
                             + mu * prob.leader_budget)
        if delta <= tol:
            return sweeps, True, warm
    return sweeps, False, warm


def _polish_exchange(prob: LeaderProblem, p: np.ndarray, warm):
    """Budget-preserving refinement by pairwise power transfers.

    Each sweep evaluates, for every ordered bin pair, transfers of several
    fractions of the source bin (full transfer included, so the search can
    hop between concentration patterns) plus a fine scale bounded by twice
    the grid step, and accepts the single best strictly improving row.
    Stops when a sweep improves nothing or at the sweep cap.  Returns the
    refined point and its ln-rate.
    """
    n = p.size
    best = float(_ln_rates_batch(prob, p[None, :], warm)[0][0])
    if n < 2:
        return p, best
    fracs = np.linspace(0.0, 1.0, 9)[1:]
    for _ in range(prob.polish_sweeps):
        blocks = []
        for i in range(n):
            if p[i] <= 0.0:
                continue
            amounts = np.concatenate(
                [p[i] * fracs, min(p[i], 2.0 * prob.grid_step) * fracs])
            block = np.repeat(p[None, :], amounts.size * (n - 1), axis=0)
            row = 0
            for j in range(n):
                if j == i:
                    continue
                sl = slice(row, row + amounts.size)
                block[sl, i] -= amounts
                block[sl, j] += amounts
                row += amounts.size
            blocks.append(block)
        if not blocks:
            break
        rows = np.clip(np.vstack(blocks), 0.0, None)
        vals, _ = _ln_rates_batch(prob, rows, warm)
        i = int(np.argmax(vals))
        if vals[i] <= best + 1e-12:
            break
        best = float(vals[i])
        p = rows[i]
    return p, best


def algorithm1_dual(prob: LeaderProblem, ne_result=None,
                    trace: list | None = None) -> StackelbergResult:
    """Low-complexity leader solver: coordinate ascent inside, mu outside.

    Starts from the full-game Nash allocation (computed here unless passed
    in).  At each outer step the Lagrangian L'(., mu) is maximized by
    per-bin coordinate ascent twice, once continued from the previous
    iterate and once restarted at the Nash point (the inner problem is
    multimodal, and a single thread tends to follow one basin across the
    whole mu path); the better of the two by L' steers a bisection on mu
    (too much power raises mu, too little lowers it).  Every iterate,
    rescaled onto the budget, is a candidate, and the best budget-feasible
    candidate wins.  The Nash start is the first candidate, so the
    returned leader rate never falls below the Nash rate.
    """
    from .game import iterative_waterfilling  # avoid import cycle at top

    nc = prob.nc
    if ne_result is None:
        ne_result = iterative_waterfilling(nc, prob.game_config())
    ne_powers = ne_result.powers()
    ne_leader = ne_powers[prob.leader]
    multi = nc.num_users > 2
    p = ne_leader.copy()
    warm = ne_powers if multi else None

    budget = prob.leader_budget
    best_p = p.copy()
    best_val = leader_objective(best_p, prob)

    def consider(q: np.ndarray) -> None:
        nonlocal best_p, best_val
        spent = float(q.sum())
        if spent <= 0.0:
            return
        # off-budget iterates are still informative: rescale onto the
        # budget (down when overspent, up when underspent) and compete
        for cand in ((q,) if spent == budget
                     else (q * (budget / spent),) if spent > budget
                     else (q, q * (budget / spent))):
            val = leader_objective(cand, prob)
            if val > best_val:
                best_val = val
                best_p = cand.copy()

    # the interference-free water-fill seeds the concentrated end of the
    # candidate spectrum, which the Nash-started threads tend to miss
    free_alloc, _ = waterfill_closed_form(nc.noise_norm[prob.leader], budget)
    consider(free_alloc.power)

    if prob.mu_bracket is not None:
        mu_lo, mu_hi = (float(prob.mu_bracket[0]), float(prob.mu_bracket[1]))
    else:
        mu_lo, mu_hi = 0.0, prob.default_mu_upper()
    mu_tol = (prob.mu_tolerance if prob.mu_tolerance is not None
              else 1e-6 * (mu_hi - mu_lo))

    dual_iters = 0
    sweeps_total = 0
    inner_ok = True
    mu = 0.5 * (mu_lo + mu_hi)
    while mu_hi - mu_lo > mu_tol and dual_iters < prob.dual_max_iters:
        mu = 0.5 * (mu_lo + mu_hi)
        dual_iters += 1
        sweeps, ok, warm = _coordinate_ascent(prob, p, mu, warm, trace)
        sweeps_total += sweeps
        inner_ok = inner_ok and ok
        consider(p)
        if not np.array_equal(p, ne_leader):
            q = ne_leader.copy()
            sweeps, ok, warm_q = _coordinate_ascent(
                prob, q, mu, ne_powers if multi else None, None)
            sweeps_total += sweeps
            inner_ok = inner_ok and ok
            consider(q)
            if (lagrangian_value(q, mu, prob)
                    > lagrangian_value(p, mu, prob)):
                p, warm = q, warm_q
        spent = float(p.sum())
        if spent > budget:
            mu_lo = mu
        else:
            mu_hi = mu

    if prob.polish_sweeps > 0:
        polished, ln_val = _polish_exchange(prob, best_p.copy(), warm)
        if ln_val / LN2 > best_val:
            best_val = ln_val / LN2
            best_p = polished

    converged = (inner_ok and ne_result.converged
                 and mu_hi - mu_lo <= mu_tol)
    dual_value = lagrangian_value(p, mu, prob) / LN2
    return _finalize(best_p, prob, method="dual", converged=converged,
                     dual_iterations=dual_iters, sweeps=sweeps_total,
                     mu=mu, dual_value=dual_value)
