"""Walk through the two-reference setup: closed form, simulation, copy budgets."""

import math

import numpy as np

from ui_lab import (analytic_two_ref, build_two_ref_setup, mc_success, optimal_t1,
                    resource_tradeoff)

# one copy of everything, references a distance 2 apart
a1, a2 = 1.0, -1.0
p1, p2, p = analytic_two_ref(1, 1, 1, 0.5, a1, a2)
print(f"closed form  P = {p:.6f}   (1 - exp(-4/3) = {1 - math.exp(-4 / 3):.6f})")

setup = build_two_ref_setup(1, 1, 1)
res = mc_success(setup, (a1, a2), 200_000, seed=1)
print(f"simulated    P = {res['p_success']:.6f} +- {res['se_success']:.6f}, wrong = {res['wrong']}")

# more unknown copies help, but with diminishing returns
for n_a in (1, 2, 4, 8):
    print(n_a, round(analytic_two_ref(n_a, 1, 1, 0.5, a1, a2)[2], 4))

# unequal reference counts move the best splitting ratio off 1/2
t = optimal_t1(1, 1, 3, a1, a2, search=True)
print("best t1 with (1, 1, 3) copies:", round(t, 4))

# fixed total budget
for total in (3, 5, 9):
    print(total, resource_tradeoff(total))

# success against separation
deltas = np.linspace(0, 4, 9)
print(np.round([analytic_two_ref(1, 1, 1, 0.5, d, 0)[2] for d in deltas], 4))
