import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ui_lab.detection import RngStream
from ui_lab.errors import DomainError, InvalidShotCount
from ui_lab.protocols import Hypothesis, analytic_two_ref, build_two_ref_core, mc_success
from ui_lab.recovery import (RecoveryState, build_recovery_network, compare_strategies,
                             cumulative_success, inconclusive_recovery_rank, lambda_sequence,
                             lambda_step, lambda_step_achievable, recover_references,
                             reference2_budget, round_success_prob, round_transmittivities,
                             run_recovery_rounds, same_unknown_second_round,
                             splitting_strategy_P)

LAMBDA2 = (7 - math.sqrt(13)) / 6


def _printed_f(x):
    # the published expression, evaluated literally
    s = 1 + 2 * x
    return (s * s - 2 * x * x - math.sqrt(4 * x ** 4 + s * s)) / (2 * s)


def test_lambda_step_first_round():
    assert lambda_step(1.0) == pytest.approx(LAMBDA2, abs=1e-15)
    assert lambda_step_achievable(1.0) == pytest.approx(LAMBDA2, abs=1e-15)


@pytest.mark.parametrize("x", [0.9, 0.565741, 0.3, 0.01])
def test_lambda_step_matches_literal_formula(x):
    assert lambda_step(x) == pytest.approx(_printed_f(x), rel=1e-12)


def test_lambda_step_second_round_value():
    assert lambda_step(0.565741) == pytest.approx(0.393520, abs=5e-7)


def test_lambda_step_domain():
    with pytest.raises(DomainError):
        lambda_step(0.0)
    with pytest.raises(DomainError):
        lambda_step(1.2)
    assert lambda_step(1e-9) < 1e-8


def test_recursion_decreasing_positive_200_rounds():
    lam = lambda_sequence(200)
    assert lam[0] == 1.0
    assert np.all(np.diff(lam) < 0) and np.all(lam > 0)


def test_achievable_recursion_collapses_quadratically():
    lam = lambda_sequence(7, "achievable")
    assert np.all(np.diff(lam) < 0)
    # f(x) ~ x^2 for small x
    assert lam[6] / lam[5] ** 2 == pytest.approx(1, rel=1e-4)


def test_recovery_state():
    s = RecoveryState()
    assert (s.k, s.lam) == (1, 1.0)
    nxt = s.next()
    assert nxt.k == 2 and nxt.lam == pytest.approx(LAMBDA2)
    with pytest.raises(DomainError):
        RecoveryState(0)


def test_round_transmittivities_first_round():
    tr = round_transmittivities(1.0)
    assert tr[:3] == pytest.approx((0.5, 2 / 3, 1 / 3))
    assert tr.t1_recovery == pytest.approx((7 - math.sqrt(13)) / 9, abs=1e-15)
    t = tr.t1_recovery
    assert tr.t2_recovery == pytest.approx((9 - 9 * t) / (10 - 9 * t), abs=1e-15)
    # evaluated independently: (9 - 9 T) / (10 - 9 T) with T = (7 - sqrt 13) / 9
    assert tr.t2_recovery == pytest.approx(0.8486121811, abs=1e-10)


def test_round_transmittivities_printed_literal():
    for lam in (0.8, 0.4, 0.05):
        s = 1 + 2 * lam
        t1r = 1 - (2 * lam ** 2 + math.sqrt(4 * lam ** 4 + s * s)) / s ** 2
        assert round_transmittivities(lam).t1_recovery == pytest.approx(t1r, rel=1e-12)


@pytest.mark.parametrize("recursion", ["printed", "achievable"])
def test_round_transmittivities_in_unit_interval(recursion):
    for lam in np.linspace(1e-3, 1, 1000):
        assert all(0 <= v <= 1 for v in round_transmittivities(lam, recursion))


def test_first_round_recovery_example():
    a1, a2 = 0.6 - 0.2j, 1.1j
    out = recover_references(1.0, Hypothesis(1, (a1, a2)))
    assert out.amps[0] == pytest.approx(math.sqrt(LAMBDA2) * a1, abs=1e-14)
    assert out.amps[1] == pytest.approx(math.sqrt(LAMBDA2) * a2, abs=1e-14)
    mirror = recover_references(1.0, Hypothesis(2, (a1, a2)))
    assert np.allclose(mirror.amps[:2], out.amps[:2], atol=1e-14)


def test_recovery_inputs_from_core():
    # unmeasured outputs for a win of reference 1 at lambda = 1
    from ui_lab.recovery import _core_outputs
    a1, a2 = 0.4, -0.9j
    out = _core_outputs(1.0, Hypothesis(1, (a1, a2)))
    assert abs(out["B"]) == pytest.approx(math.sqrt(1.5) * abs(a1), abs=1e-14)
    assert abs(out["D"]) == pytest.approx(abs(math.sqrt(1 / 6) * a1 + math.sqrt(2 / 3) * a2),
                                          abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2),
       st.integers(1, 2), st.integers(1, 10))
def test_achievable_network_reproduces_next_round(x1, y1, x2, y2, winner, k):
    a1, a2 = complex(x1, y1), complex(x2, y2)
    lam = lambda_sequence(k, "achievable")[-1]
    out = recover_references(lam, Hypothesis(winner, (a1, a2)), "achievable")
    nxt = math.sqrt(lambda_step_achievable(lam))
    assert abs(out.amps[0] - nxt * a1) < 1e-10
    assert abs(out.amps[1] - nxt * a2) < 1e-10


def test_printed_recursion_exceeds_what_port_d_carries():
    # from round 2 on the printed dilution asks for more of reference 2 than exists
    for lam in lambda_sequence(10)[1:]:
        assert lambda_step(lam) > reference2_budget(lam)
    lam2 = lambda_sequence(2)[1]
    out = recover_references(lam2, Hypothesis(1, (1.0, 1.0j)))
    assert abs(out.amps[1]) ** 2 < lambda_step(lam2)


def test_equal_references_are_degenerate_but_fine():
    a = 0.8 + 0.3j
    out = recover_references(1.0, Hypothesis(1, (a, a)))
    assert np.allclose(out.amps[:2], math.sqrt(LAMBDA2) * a, atol=1e-14)


def test_recovery_network_validation():
    with pytest.raises(DomainError):
        build_recovery_network(1.0, 3)
    assert len(build_recovery_network(0.5, 2)) == 2


def test_round_success_values():
    assert round_success_prob(1.0, 1.0) == pytest.approx(1 - math.exp(-1 / 3), abs=1e-15)
    exponent = LAMBDA2 / (1 + 2 * LAMBDA2)
    assert exponent == pytest.approx((7 - math.sqrt(13)) / (2 * (10 - math.sqrt(13))), abs=1e-15)
    assert cumulative_success(2, 1.0) == pytest.approx(
        (1 - math.exp(-1 / 3)) * (1 - math.exp(-exponent)), abs=1e-15)
    assert np.all(cumulative_success(5, np.zeros(3)) == 0)


def test_cumulative_non_increasing_in_rounds():
    deltas = np.linspace(0.1, 5, 50)
    curves = np.array([cumulative_success(k, deltas) for k in range(1, 30)])
    assert np.all(np.diff(curves, axis=0) <= 0)
    assert np.all((curves > 0) & (curves < 1))


def test_second_round_success_on_diluted_references():
    a1, a2 = 1.5, -0.5
    lam2 = lambda_sequence(2)[1]
    setup = build_two_ref_core(1.0, lam2, lam2, 0.5)
    expected = analytic_two_ref(1, lam2, lam2, 0.5, a1, a2)[2]
    assert round_success_prob(lam2, a1 - a2) == pytest.approx(expected, abs=1e-15)
    res = mc_success(setup, (a1, a2), 200_000, seed=5)
    assert res["wrong"] == 0
    assert abs(res["p_success"] - expected) < 4 * math.sqrt(expected * (1 - expected) / 200_000)


def test_run_recovery_rounds():
    res = run_recovery_rounds(2.0, -2.0, 5, RngStream(3))
    assert 1 <= len(res) <= 5
    for r in res[:-1]:
        assert r.outcome.index == r.truth and r.recovered_register is not None
    assert all(0 <= r.cumulative_success <= 1 for r in res)
    last = res[-1]
    if not last.outcome.conclusive:
        assert last.recovered_register is None


def test_same_unknown_second_round():
    cond, overall, setup = same_unknown_second_round(2.0)
    assert cond == pytest.approx(1 - math.exp(-4 / 6), abs=1e-15)
    assert overall == pytest.approx(1 - math.exp(-2), abs=1e-15)
    assert overall == pytest.approx(analytic_two_ref(2, 1, 1, 0.5, 2.0, 0)[2], abs=1e-15)
    assert same_unknown_second_round(0.0)[:2] == (0.0, 0.0)
    res = mc_success(setup, (2.0, 0.0), 300_000, seed=17)
    assert res["wrong"] == 0
    assert abs(res["p_success"] - overall) < 3 * math.sqrt(overall * (1 - overall) / 300_000)


def test_same_unknown_measured_states():
    # second-round detectors see (a? - a1)/sqrt 6 and (a2 - a?)/sqrt 6 up to sign
    _, _, setup = same_unknown_second_round(1.0)
    a1, a2 = 0.7 + 0.1j, -0.3j
    for h in (1, 2):
        hyp = Hypothesis(h, (a1, a2))
        out = setup.evolve(hyp).amps
        u = hyp.unknown
        assert abs(out[3]) == pytest.approx(abs(u - a2) / math.sqrt(6), abs=1e-14)
        assert abs(out[4]) == pytest.approx(abs(u - a1) / math.sqrt(6), abs=1e-14)


def test_splitting_strategy():
    assert splitting_strategy_P(1, 1.3) == pytest.approx(1 - math.exp(-1.69 / 3), abs=1e-15)
    assert splitting_strategy_P(2, 2.0) == pytest.approx((1 - math.exp(-1)) ** 2, abs=1e-15)
    assert splitting_strategy_P(3, 0.0) == 0
    with pytest.raises(InvalidShotCount):
        splitting_strategy_P(0, 1.0)


def test_compare_strategies():
    rec, split, diff = compare_strategies(1, np.linspace(0.1, 4, 40))
    assert np.all(np.abs(diff) < 1e-15)
    rec, split, diff = compare_strategies(3, 10.0)
    assert abs(diff) < 1e-6 and rec > 0.999


def test_achievable_recovery_loses_to_splitting():
    # with the recursion the optics can reach, splitting wins for N >= 4 at large delta
    _, _, diff = compare_strategies(4, 4.0, recursion="achievable")
    assert diff < -0.2


def test_no_recovery_after_inconclusive():
    r = inconclusive_recovery_rank()
    assert r["ref1"] == {"rank": 4, "nullity": 0}
    assert r["ref2"] == {"rank": 4, "nullity": 0}
    equal = inconclusive_recovery_rank(alpha_equal=True)
    assert equal["ref1"]["nullity"] > 0
