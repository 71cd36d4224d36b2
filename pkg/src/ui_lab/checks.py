"""Quick invariant checks behind ``ui-lab verify``.

Each check is cheap (well under a second) and returns ``(passed, detail)``.
They cover exact identities only; the statistical comparisons live in the
test suite.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import noise, optimality, protocols, recovery
from .optics import build_concentrator, check_unitarity, compose_network
from .protocols import Hypothesis

__all__ = ["CHECKS", "run_checks"]


def _rand_pairs(n, seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    return [tuple(row) for row in z]


def _unitarity():
    nets = [build_concentrator(5),
            protocols.build_two_ref_setup(3, 2, 4, 0.3).network,
            protocols.build_multi_ref_setup(4, 2, 3).network,
            recovery.same_unknown_second_round(1.0)[2].network]
    worst = max(check_unitarity(compose_network(n)) for n in nets)
    return worst < 1e-12, f"max |U^dagger U - I| = {worst:.2e}"


def _two_ref_dark_port():
    worst = 0.0
    setup = protocols.build_two_ref_setup(2, 3, 1, 0.4)
    for a1, a2 in _rand_pairs(20, 1):
        for h in (1, 2):
            amps = setup.detector_amps(Hypothesis(h, (a1, a2)))
            # D1 (index 0) is dark when the unknown is reference 2 and vice versa
            worst = max(worst, abs(amps[0 if h == 2 else 1]))
    return worst < 1e-12, f"largest cancelled amplitude {worst:.2e}"


def _multi_ref_dark_port():
    worst = 0.0
    setup = protocols.build_multi_ref_setup(3, 2, 1)
    rng = np.random.default_rng(2)
    for _ in range(20):
        refs = rng.normal(size=3) + 1j * rng.normal(size=3)
        for h in (1, 2, 3):
            worst = max(worst, abs(setup.detector_amps(Hypothesis(h, tuple(refs)))[h - 1]))
    return worst < 1e-12, f"largest cancelled amplitude {worst:.2e}"


def _closed_vs_network():
    setup = protocols.build_two_ref_core(1.5, 0.7, 2.0, 0.35)
    worst = 0.0
    for a1, a2 in _rand_pairs(10, 3):
        p1, p2, _ = protocols.analytic_two_ref(1.5, 0.7, 2.0, 0.35, a1, a2)
        for h, ph in ((1, p1), (2, p2)):
            amps = setup.detector_amps(Hypothesis(h, (a1, a2)))
            worst = max(worst, abs(-math.expm1(-abs(amps[h - 1]) ** 2) - ph))
    return worst < 1e-12, f"max |network - closed form| = {worst:.2e}"


def _lambda2():
    err = abs(recovery.lambda_step(1.0) - (7 - math.sqrt(13)) / 6)
    return err < 1e-12, f"|f(1) - (7 - sqrt 13)/6| = {err:.2e}"


def _lambda_decreasing():
    lam = recovery.lambda_sequence(200)
    ok = bool(np.all(np.diff(lam) < 0) and np.all(lam > 0))
    return ok, f"lambda_200 = {lam[-1]:.4g}"


def _recovery_network(recursion):
    step = recovery.lambda_step if recursion == "printed" else recovery.lambda_step_achievable

    def check():
        worst, lam = 0.0, 1.0
        for k in range(1, 11):
            nxt = step(lam)
            for a1, a2 in _rand_pairs(3, 10 + k):
                for w in (1, 2):
                    out = recovery.recover_references(lam, Hypothesis(w, (a1, a2)), recursion)
                    worst = max(worst, abs(out.amps[0] - math.sqrt(nxt) * a1),
                                abs(out.amps[1] - math.sqrt(nxt) * a2))
            lam = nxt
        return worst < 1e-10, f"max amplitude mismatch over k <= 10: {worst:.2e}"

    return check


def _no_recovery_after_inconclusive():
    r = recovery.inconclusive_recovery_rank()
    ok = r["ref1"]["nullity"] == 0 and r["ref2"]["nullity"] == 0
    return ok, f"ranks {r['ref1']['rank']}, {r['ref2']['rank']} of 4"


def _noise_sum_rule():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(200):
        n_a, n_b = rng.integers(1, 6, size=2)
        rep = noise.averaged_rates_closed(int(n_a), int(n_b), rng.uniform(0, 1.5), rng.uniform(0.05, 5))
        worst = max(worst, abs(rep.p_success + rep.p_error + rep.p_failure - 1))
    return worst < 1e-12, f"max |sum - 1| = {worst:.2e}"


def _gaussian_recursion():
    rng = np.random.default_rng(5)
    worst = 0.0
    for m in range(7):
        for _ in range(20):
            a, b = rng.uniform(0.1, 3, size=2)
            x = complex(*rng.normal(size=2))
            s = rng.uniform(0, 1.5)
            c = noise.gaussian_integral_Im(m, a, b, x, s)
            worst = max(worst, abs(c - noise.gaussian_integral_step(m, a, b, x, s)) / c)
    return worst < 1e-12, f"max relative gap {worst:.2e}"


def _lambda1_optimum():
    gaps = [abs(optimality.optimize_lambda1(d) - 1 / 3) for d in (0.5, 1, 2, 4)]
    return max(gaps) < 1e-6, f"max |l1* - 1/3| = {max(gaps):.2e}"


def _bound_saturation():
    l1 = np.linspace(0, 0.499, 500)
    l2 = np.array([optimality.lambda2_sq_max(x) for x in l1])
    gap = float(np.max(np.abs(l1 * l2 - (1 - 2 * l1) * (1 - 2 * l2))))
    return gap < 1e-12, f"max bound residual {gap:.2e}"


CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "network unitarity": _unitarity,
    "two-ref cancellation port dark": _two_ref_dark_port,
    "multi-ref cancellation port dark": _multi_ref_dark_port,
    "two-ref closed form vs network": _closed_vs_network,
    "lambda_2 value": _lambda2,
    "lambda recursion decreasing (200 rounds)": _lambda_decreasing,
    "recovery network vs printed recursion": _recovery_network("printed"),
    "recovery network vs achievable recursion": _recovery_network("achievable"),
    "no recovery after inconclusive": _no_recovery_after_inconclusive,
    "noise rates sum rule": _noise_sum_rule,
    "gaussian integral recursion": _gaussian_recursion,
    "lambda_1 optimum": _lambda1_optimum,
    "unitarity bound saturation": _bound_saturation,
}


def run_checks() -> list[tuple[str, bool, str]]:
    results = []
    for name, fn in CHECKS.items():
        try:
            ok, detail = fn()
        except Exception as exc:  # report, do not abort the suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))
    return results
