"""Monte-Carlo experiment harness and canned two-bin study cases.

A run draws admissible channels from the Rayleigh ensemble, solves the
myopic game (Nash) and the informed-leader problem (dual solver) on each,
and aggregates per-user rate improvement statistics.  All randomness is
keyed by (master_seed, trial_index), so runs are reproducible trial by
trial and output files are byte-identical across reruns.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import (ChannelTopology, NormalizedChannel, RayleighProfile,
                      normalize, sample_admissible_channel)
from .game import ConvergenceError, GameConfig, iterative_waterfilling
from .stackelberg import (LeaderProblem, algorithm1_dual, dual_bound,
                          exhaustive_stackelberg, interference_free_bound)

__all__ = [
    "ExperimentSpec",
    "TrialRecord",
    "run_experiment",
    "summarize",
    "empirical_cdf",
    "write_trials_csv",
    "write_summary_json",
    "write_cdf_csvs",
    "example_problem",
    "reproduce_example",
    "ExampleReport",
]


@dataclass
class ExperimentSpec:
    """Everything that defines a Monte-Carlo run.

    budget may be a scalar (shared by all users) or a per-user list.
    leader is a 0-based user index.  grid_step of None resolves to the
    leader budget / 100; solver tolerances of None fall back to the
    solver defaults.
    """

    trials: int
    num_users: int = 2
    num_bins: int = 20
    budget: object = 200.0
    noise: float = 0.01
    cross_power: float = 0.5
    direct_power: float = 1.0
    profile: RayleighProfile = field(default_factory=RayleighProfile)
    master_seed: int = 12345
    leader: int = 0
    max_rejections: int = 10_000
    iw_tolerance: float | None = None
    iw_max_iters: int = 10_000
    grid_step: float | None = None
    mu_tolerance: float | None = None
    dual_max_iters: int = 64
    coord_max_sweeps: int = 100
    coord_tolerance: float | None = None
    cdf_points: int = 101

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 0 <= self.leader < self.num_users:
            raise ValueError("leader index out of range")
        if self.num_users < 2:
            raise ValueError("need at least two users")

    def budgets_vector(self) -> np.ndarray:
        b = np.atleast_1d(np.asarray(self.budget, dtype=np.float64))
        if b.size == 1:
            return np.full(self.num_users, float(b[0]))
        if b.size != self.num_users:
            raise ValueError(f"{b.size} budgets for {self.num_users} users")
        return b

    def topology(self) -> ChannelTopology:
        return ChannelTopology.symmetric(
            self.num_users, self.num_bins, cross_power=self.cross_power,
            direct_power=self.direct_power, noise=self.noise)

    def game_config(self) -> GameConfig:
        return GameConfig(budgets=self.budgets_vector(),
                          iw_tolerance=self.iw_tolerance,
                          iw_max_iters=self.iw_max_iters)

    def resolved_grid_step(self) -> float:
        if self.grid_step is not None:
            return float(self.grid_step)
        return float(self.budgets_vector()[self.leader]) / 100.0

    def leader_problem(self, nc: NormalizedChannel) -> LeaderProblem:
        return LeaderProblem(
            nc=nc, budgets=self.budgets_vector(), leader=self.leader,
            grid_step=self.resolved_grid_step(),
            mu_tolerance=self.mu_tolerance,
            dual_max_iters=self.dual_max_iters,
            coord_max_sweeps=self.coord_max_sweeps,
            coord_tolerance=self.coord_tolerance,
            follower_tolerance=self.iw_tolerance,
            follower_max_rounds=self.iw_max_iters)

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items()}
        d["profile"] = self.profile.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        d = dict(d)
        if "profile" in d and isinstance(d["profile"], dict):
            d["profile"] = RayleighProfile.from_dict(d["profile"])
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        return cls.from_dict(json.loads(text))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def trial_seed(master_seed: int, trial: int) -> int:
    """Canonical per-trial seed; recorded in the CSV so single trials can
    be regenerated without replaying the whole run."""
    ss = np.random.SeedSequence((int(master_seed), int(trial)))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class TrialRecord:
    """One channel draw and both solves on it.

    Rates are bits, ratio = stackelberg / nash per user.  converged means
    every solve involved finished inside its caps; failed trials keep
    whatever numbers exist (NaN where none do) and are excluded from
    aggregate statistics, never dropped from the record list.
    """

    trial: int
    seed: int
    rejections: int
    rate_ne: np.ndarray
    rate_sg: np.ndarray
    ratio: np.ndarray
    iw_iterations: int
    dual_iterations: int
    sweeps: int
    converged: bool


def _run_trial(spec: ExperimentSpec, t: int) -> TrialRecord:
    seed = trial_seed(spec.master_seed, t)
    ch, rejections = sample_admissible_channel(
        spec.profile, spec.topology(), seed,
        max_rejections=spec.max_rejections)
    nc = normalize(ch)
    ne = iterative_waterfilling(nc, spec.game_config())
    prob = spec.leader_problem(nc)
    k = spec.num_users
    try:
        sg = algorithm1_dual(prob, ne_result=ne)
        rate_sg = sg.rates
        converged = bool(ne.converged and sg.converged)
        dual_iters, sweeps = sg.dual_iterations, sg.sweeps
    except ConvergenceError:
        rate_sg = np.full(k, math.nan)
        converged = False
        dual_iters, sweeps = 0, 0
    with np.errstate(invalid="ignore"):
        ratio = rate_sg / ne.rates
    return TrialRecord(trial=t, seed=seed, rejections=rejections,
                       rate_ne=ne.rates, rate_sg=rate_sg, ratio=ratio,
                       iw_iterations=ne.iterations,
                       dual_iterations=dual_iters, sweeps=sweeps,
                       converged=converged)


def run_experiment(spec: ExperimentSpec, progress=None, n_jobs: int = 1):
    """Run all trials; returns (records, summary).

    Trials are keyed by (master_seed, trial) and independent, so records
    do not depend on execution order or on n_jobs; with n_jobs > 1 they
    are farmed out to worker processes and reassembled in trial order.
    progress, if given, is called with each finished trial index.
    """
    if n_jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            records = list(pool.map(_run_trial, [spec] * spec.trials,
                                    range(spec.trials), chunksize=8))
        if progress is not None:
            for t in range(spec.trials):
                progress(t)
    else:
        records = []
        for t in range(spec.trials):
            records.append(_run_trial(spec, t))
            if progress is not None:
                progress(t)
    return records, summarize(records, spec.num_users)


def summarize(records, num_users: int) -> dict:
    """Per-user improvement statistics over converged trials."""
    converged = [r for r in records if r.converged]
    users = {}
    for u in range(num_users):
        if converged:
            ratios = np.array([r.ratio[u] for r in converged])
            users[str(u + 1)] = {
                "mean_ratio": float(ratios.mean()),
                "median_ratio": float(np.median(ratios)),
                "frac_improved": float(np.mean(ratios > 1.0)),
                "n_converged": len(converged),
            }
        else:
            users[str(u + 1)] = {
                "mean_ratio": None, "median_ratio": None,
                "frac_improved": None, "n_converged": 0,
            }
    return {"n_trials": len(records), "n_converged": len(converged),
            "users": users}


def empirical_cdf(values, thresholds) -> np.ndarray:
    """Right-continuous empirical CDF: fraction of values <= threshold."""
    values = np.sort(np.asarray(values, dtype=np.float64))
    if values.size == 0:
        raise ValueError("empirical_cdf needs at least one value")
    thresholds = np.asarray(thresholds, dtype=np.float64)
    return np.searchsorted(values, thresholds, side="right") / values.size


def _g17(x) -> str:
    return format(float(x), ".17g")


def write_trials_csv(records, path):
    """One row per (trial, user); floats carry 17 significant digits."""
    lines = ["trial,seed,rejections,user,rate_ne_bits,rate_sg_bits,"
             "ratio,converged"]
    for r in records:
        flag = "true" if r.converged else "false"
        for u in range(r.rate_ne.size):
            lines.append(
                f"{r.trial},{r.seed},{r.rejections},{u + 1},"
                f"{_g17(r.rate_ne[u])},{_g17(r.rate_sg[u])},"
                f"{_g17(r.ratio[u])},{flag}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_summary_json(summary: dict, path):
    with open(path, "w") as fh:
        fh.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def write_cdf_csvs(records, out_dir, num_users: int, cdf_points: int = 101):
    """Per-user improvement-ratio CDFs as cdf_userU.csv files.

    Thresholds span the observed converged ratios; returns the paths.
    """
    import os
    converged = [r for r in records if r.converged]
    paths = []
    for u in range(num_users):
        path = os.path.join(out_dir, f"cdf_user{u + 1}.csv")
        lines = ["threshold,fraction"]
        if converged:
            ratios = np.array([r.ratio[u] for r in converged])
            thresholds = np.linspace(ratios.min(), ratios.max(), cdf_points)
            fractions = empirical_cdf(ratios, thresholds)
            lines += [f"{_g17(t)},{_g17(fr)}"
                      for t, fr in zip(thresholds, fractions)]
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# canned two-bin study cases

def example_problem(which: int):
    """The two hard-coded two-user, two-bin instances.

    Case 1: normalized noise {4, 1} for user 1 and {1, 4} for user 2,
    all cross ratios 0.5, budgets 10: informed leadership rearranges a
    fair but interference-locked equilibrium.  Case 2: same but noise
    {6, 1} / {1, 6}: the myopic equilibrium is already the leader's
    optimum.  Returns (normalized_channel, budgets).
    """
    if which == 1:
        noise_norm = np.array([[4.0, 1.0], [1.0, 4.0]])
    elif which == 2:
        noise_norm = np.array([[6.0, 1.0], [1.0, 6.0]])
    else:
        raise ValueError("example_problem takes 1 or 2")
    cross = np.full((2, 2, 2), 0.5)
    cross[0, 0, :] = 0.0
    cross[1, 1, :] = 0.0
    nc = NormalizedChannel(noise_norm=noise_norm, cross=cross)
    return nc, np.array([10.0, 10.0])


# Reference rates for the canned cases, in bits (approximate published
# values, quoted to three decimals).
EXAMPLE_REFERENCES = {
    1: {"leader NE rate": 2.645, "follower NE rate": 2.645,
        "leader SE rate": 2.939, "follower SE rate": 3.474,
        "leader interference-free bound": 3.814},
    2: {"leader NE rate": 3.460, "follower NE rate": 3.460,
        "leader SE rate": 3.460, "follower SE rate": 3.460,
        "leader interference-free bound": 3.590},
}


@dataclass
class ExampleReport:
    which: int
    entries: list          # (name, computed, reference, tol, passed)
    extras: dict

    @property
    def all_pass(self) -> bool:
        return all(e[4] for e in self.entries)

    def to_text(self) -> str:
        width = max(len(e[0]) for e in self.entries)
        lines = [f"case {self.which}"]
        for name, computed, ref, tol, ok in self.entries:
            verdict = "pass" if ok else "FAIL"
            lines.append(f"  {name:<{width}}  computed {computed:8.4f}  "
                         f"reference {ref:5.3f}  tol {tol:g}  {verdict}")
        for name, value in self.extras.items():
            lines.append(f"  {name}: {value:.4f}")
        return "\n".join(lines)


def reproduce_example(which: int, tol: float = 5e-3) -> ExampleReport:
    """Recompute the canned case end to end and compare to references.

    NE rates come from iterated water-filling, leader/follower rates under
    leadership from the exhaustive grid (step 0.01), the bound from the
    closed-form water-fill.  Each of the five numbers must match its
    reference within tol bits.
    """
    nc, budgets = example_problem(which)
    refs = EXAMPLE_REFERENCES[which]
    ne = iterative_waterfilling(nc, GameConfig(budgets=budgets))
    prob = LeaderProblem(nc=nc, budgets=budgets, leader=0, grid_step=0.01)
    se = exhaustive_stackelberg(prob)
    bound = interference_free_bound(prob)
    computed = {
        "leader NE rate": float(ne.rates[0]),
        "follower NE rate": float(ne.rates[1]),
        "leader SE rate": float(se.rates[0]),
        "follower SE rate": float(se.rates[1]),
        "leader interference-free bound": bound,
    }
    entries = []
    for name, ref in refs.items():
        got = computed[name]
        entries.append((name, got, ref, tol, abs(got - ref) <= tol))
    dual_prob = LeaderProblem(nc=nc, budgets=budgets, leader=0,
                              grid_step=0.05)
    mu_star, dual_val = dual_bound(dual_prob)
    alg = algorithm1_dual(LeaderProblem(nc=nc, budgets=budgets, leader=0,
                                        grid_step=0.1), ne_result=ne)
    extras = {
        "duality upper bound (bits)": dual_val,
        "dual mu*": mu_star,
        "fast leader solver rate (bits)": alg.leader_rate,
    }
    return ExampleReport(which=which, entries=entries, extras=extras)
