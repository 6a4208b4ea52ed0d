"""Walk through one water-filling solve, then watch the active set grow.

Run:  python3 demos/waterfill_anatomy.py
"""

import numpy as np

from wfgames.waterfill import waterfill_bisection, waterfill_closed_form

noise = np.array([1.0, 3.0, 2.0, 8.0])
budget = 5.0

print("effective noise per bin:", noise)
print("power budget:", budget)
print()

alloc, active = waterfill_closed_form(noise, budget)
level = noise[alloc.power > 0][0] + alloc.power[alloc.power > 0][0]
print(f"closed form fills {active} bins to the common level {level:g}:")
for f, (nu, p) in enumerate(zip(noise, alloc.power)):
    state = "active" if p > 0 else "dry"
    print(f"  bin {f}: noise {nu:g}, power {p:g}  [{state}]")
print()

# the independent route: bisect on the level until the budget is spent
bis = waterfill_bisection(noise, budget)
gap = np.abs(alloc.power - bis.power).max()
print(f"bisection on the water level agrees within {gap:.2e} per bin")
print()

# raising the budget floods more bins; the order follows sorted noise
print("active bins as the budget grows:")
for b in (0.5, 2.0, 5.0, 12.0, 30.0):
    a, k = waterfill_closed_form(noise, b)
    flags = "".join("#" if p > 0 else "." for p in a.power)
    print(f"  budget {b:5g}: {k} active  [{flags}]  "
          f"powers {np.round(a.power, 3)}")
