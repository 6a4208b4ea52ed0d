"""Leadership with two myopic rivals instead of one.

With three users the follower side is itself a game: freezing the
leader's transmission, the other two water-fill against each other until
they settle.  The leader optimizes over that whole reaction.

Run:  python3 demos/three_user.py
"""

import numpy as np

from wfgames.channel import (ChannelTopology, RayleighProfile, normalize,
                             sample_admissible_channel)
from wfgames.game import GameConfig, iterative_waterfilling
from wfgames.stackelberg import LeaderProblem, algorithm1_dual

topo = ChannelTopology.symmetric(3, 12, cross_power=0.25)
ch, rejections = sample_admissible_channel(RayleighProfile(), topo, 424242)
nc = normalize(ch)
print(f"sampled an admissible 3-user channel ({rejections} rejections)")

budgets = np.full(3, 60.0)
ne = iterative_waterfilling(nc, GameConfig(budgets=budgets))
print(f"myopic equilibrium found in {ne.iterations} sweeps, "
      f"rates {ne.rates.round(3)} bits")

prob = LeaderProblem(nc=nc, budgets=budgets, leader=0, grid_step=0.6)
sg = algorithm1_dual(prob, ne_result=ne)
print(f"user 1 leads ({sg.dual_iterations} price steps, "
      f"{sg.sweeps} coordinate sweeps), rates {sg.rates.round(3)} bits")
print()

for u in range(3):
    delta = sg.rates[u] - ne.rates[u]
    role = "leader " if u == 0 else "myopic"
    print(f"  user {u + 1} ({role}): {ne.rates[u]:7.3f} -> "
          f"{sg.rates[u]:7.3f} bits  ({delta:+.3f})")
print()

# where did the leader's power go, relative to plain water-filling?
moved = np.abs(sg.powers()[0] - ne.powers()[0]).sum() / 2.0
print(f"the leader moved {moved:.1f} of its {budgets[0]:g} power units")
print("compared to its own water-fill; the followers rebalanced and")
print("everyone's interference landscape shifted with them.")
