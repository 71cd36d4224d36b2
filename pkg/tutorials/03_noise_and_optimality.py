"""Reliability under Gaussian preparation noise, then the optimal detector coupling."""

import numpy as np

from ui_lab import (averaged_rates_closed, mc_rates, optimize_lambda1, reliability_closed,
                    two_detector_P)

rep = averaged_rates_closed(1, 1, sigma=0.2, xi=1.0)
print(rep)
mc = mc_rates(1, 1, 0.2, 1.0, shots=200_000, seed=3)
print(f"R closed {rep.reliability:.5f}   simulated {mc.reliability:.5f} +- {mc.se_reliability:.5f}")

# reliability falls as noise grows relative to the keying spread
for sigma in (0.05, 0.1, 0.2, 0.4, 0.8):
    r, theta = reliability_closed(1, 1, sigma, 1.0)
    print(f"sigma={sigma:<5} theta={theta:.4f} R={r:.4f}")

for delta in (0.5, 1.0, 3.0):
    l1 = optimize_lambda1(delta)
    print(f"delta={delta}: best |lambda_1|^2 = {l1:.6f}, P = {two_detector_P(l1, delta):.6f}")

grid = np.linspace(0, 0.5, 6)
print(np.round([two_detector_P(g, 2.0) for g in grid], 4))
