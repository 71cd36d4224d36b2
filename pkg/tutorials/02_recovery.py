"""Reusing references after a conclusive round, and why the printed dilution is optimistic."""

import numpy as np

from ui_lab import compare_strategies, cumulative_success, lambda_step, lambda_step_achievable
from ui_lab.recovery import lambda_sequence, reference2_budget

lam = lambda_sequence(6)
print("printed lambda_k    ", np.round(lam, 6))
print("achievable lambda_k ", np.round(lambda_sequence(6, "achievable"), 6))

# how much of reference 2 is actually left in the spare port
for x in (1.0, 0.9, 0.8, 0.7, lam[1]):
    print(f"lambda={x:.4f}  printed f={lambda_step(x):.4f}  budget={reference2_budget(x):.4f}"
          f"  achievable f={lambda_step_achievable(x):.4f}")

deltas = np.linspace(0, 6, 7)
for k in range(1, 6):
    print(k, np.round(cumulative_success(k, deltas), 4))

for n in (1, 2, 4):
    rec, split, diff = compare_strategies(n, 2.0)
    print(f"N={n}: recovery {rec:.4f}  splitting {split:.4f}  difference {diff:+.4f}")
    rec, split, diff = compare_strategies(n, 2.0, recursion="achievable")
    print(f"      achievable recursion difference {diff:+.4f}")
