"""A pocket-size run of the fading-channel study.

Fifty channel draws instead of thousands: enough to see the shape of the
improvement distribution without waiting.  Writes the same CSV/JSON
artifacts the command-line tool produces.

Run:  python3 demos/monte_carlo_small.py [output_dir]
"""

import os
import sys
import tempfile

import numpy as np

from wfgames.harness import (ExperimentSpec, empirical_cdf, run_experiment,
                             write_cdf_csvs, write_summary_json,
                             write_trials_csv)

out_dir = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp()
os.makedirs(out_dir, exist_ok=True)

spec = ExperimentSpec(trials=50, num_users=2, num_bins=20, budget=200.0,
                      cross_power=0.5, master_seed=2718)
print(f"running {spec.trials} trials "
      f"({spec.num_bins} bins, budgets {spec.budget}) ...")
records, summary = run_experiment(
    spec, progress=lambda t: print(".", end="", flush=True))
print()

for user in ("1", "2"):
    stats = summary["users"][user]
    role = "leader" if user == "1" else "myopic"
    print(f"user {user} ({role}): mean ratio {stats['mean_ratio']:.3f}, "
          f"median {stats['median_ratio']:.3f}, "
          f"improved in {100 * stats['frac_improved']:.0f}% of trials")

# a crude terminal CDF of the leader's improvement ratio
ratios = np.array([r.ratio[0] for r in records if r.converged])
print("\nleader ratio CDF:")
for q in np.linspace(ratios.min(), ratios.max(), 9):
    frac = empirical_cdf(ratios, [q])[0]
    print(f"  ratio <= {q:5.2f}: {'*' * int(40 * frac):<40} {frac:.2f}")

write_trials_csv(records, f"{out_dir}/trials.csv")
write_summary_json(summary, f"{out_dir}/summary.json")
write_cdf_csvs(records, out_dir, spec.num_users)
print(f"\nartifacts in {out_dir}")
