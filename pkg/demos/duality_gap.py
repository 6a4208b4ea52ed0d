"""Price the power budget and watch the dual path jump.

The leader's rate is not concave in its allocation, so the usual dual
story breaks in an instructive way: the spent power of the priced
maximizer falls in discrete jumps as the price mu rises, and when no
price makes it land exactly on the budget there is a duality gap.  The
dual value still upper-bounds the true optimum, which is what makes it
useful as a certificate.

Run:  python3 demos/duality_gap.py
"""

import numpy as np

from wfgames.harness import example_problem
from wfgames.stackelberg import (LeaderProblem, algorithm1_dual, dual_bound,
                                 dual_inner_maximum, dual_power_sums,
                                 exhaustive_stackelberg)

nc, budgets = example_problem(1)
prob = LeaderProblem(nc=nc, budgets=budgets, leader=0, grid_step=0.05)

optimum = exhaustive_stackelberg(prob).leader_rate
mu_star, bound = dual_bound(prob)
fast = algorithm1_dual(LeaderProblem(nc=nc, budgets=budgets, leader=0))

print(f"exhaustive optimum     : {optimum:.6f} bits")
print(f"dual upper bound       : {bound:.6f} bits at mu* = {mu_star:.6f}")
print(f"fast solver            : {fast.leader_rate:.6f} bits")
print(f"certified gap          : {bound - optimum:.6f} bits")
print()

print("spent power of the priced maximizer as the price rises")
print("(the budget is 10; note the jump straight past it):")
mus = np.linspace(0.0, 0.35, 15)
spent = dual_power_sums(prob, mus)
for mu, s in zip(mus, spent):
    bar = "=" * int(round(s))
    print(f"  mu {mu:5.3f}: spent {s:6.2f}  {bar}")
print()

lo = dual_inner_maximum(prob, mu_star - 1e-3)[2]
hi = dual_inner_maximum(prob, mu_star + 1e-3)[2]
print(f"just below mu* the maximizer spends {lo:.2f}, just above {hi:.2f};")
print("no price lands exactly on the budget, hence the gap above.")
