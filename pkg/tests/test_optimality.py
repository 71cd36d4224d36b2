import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize

from ui_lab.errors import DomainError
from ui_lab.optimality import (DEGENERATE, DetectorCoupling, grid_argmax_lambda1,
                               householder_to_axis, lambda2_sq_max, lambda2_sq_printed,
                               multi_detector_reduction_check, optimize_lambda1, two_detector_P)


def test_saturated_coupling_values():
    assert lambda2_sq_max(0.0) == 0.5
    assert lambda2_sq_max(0.5) == 0.0
    assert lambda2_sq_max(1 / 3) == pytest.approx(1 / 3)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 0.5))
def test_saturation_is_an_involution_on_the_bound(l1):
    l2 = lambda2_sq_max(l1)
    assert l1 * l2 == pytest.approx((1 - 2 * l1) * (1 - 2 * l2), abs=1e-12)
    assert lambda2_sq_max(l2) == pytest.approx(l1, abs=1e-12)


def test_printed_form_breaks_the_bound():
    for l1 in (0.1, 1 / 3, 0.45):
        with pytest.raises(DomainError):
            DetectorCoupling(l1, lambda2_sq_printed(l1))
    # it also exceeds the admissible range near the edge
    assert lambda2_sq_printed(0.5) == 1.0


def test_coupling_validation():
    with pytest.raises(DomainError):
        DetectorCoupling(0.6, 0.0)
    c = DetectorCoupling.saturated(1 / 3)
    assert c.success(2.0) == pytest.approx(1 - math.exp(-4 / 3))


# at large separation the peak is flat to ~exp(-delta^2 / 3), so the argmax is ill-conditioned
@pytest.mark.parametrize("delta,tol", [(0.3, 1e-7), (1.0, 1e-7), (2.5, 1e-7), (6.0, 1e-5)])
def test_optimum_is_one_third(delta, tol):
    assert optimize_lambda1(delta) == pytest.approx(1 / 3, abs=tol)
    # independent optimiser on the same objective
    res = optimize.minimize_scalar(lambda l1: -two_detector_P(l1, delta), bounds=(0, 0.5),
                                   method="bounded", options={"xatol": 1e-10})
    assert res.x == pytest.approx(1 / 3, abs=max(tol, 1e-6))
    grid, h = grid_argmax_lambda1(delta)
    assert abs(grid - 1 / 3) <= h


def test_optimum_reproduces_the_setup():
    for delta in (0.5, 2.0):
        assert two_detector_P(1 / 3, delta) == pytest.approx(1 - math.exp(-delta ** 2 / 3),
                                                             abs=1e-15)


def test_printed_form_peaks_at_the_boundary():
    assert optimize_lambda1(2.0, form="printed") == pytest.approx(0.5, abs=1e-6)
    grid, _ = grid_argmax_lambda1(2.0, form="printed")
    assert grid == 0.5


def test_degenerate_at_zero_separation():
    assert optimize_lambda1(0.0) is DEGENERATE
    assert not DEGENERATE and repr(DEGENERATE) == "DEGENERATE"
    with pytest.raises(DomainError):
        optimize_lambda1(-1.0)
    with pytest.raises(DomainError):
        two_detector_P(0.2, 1.0, form="other")


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=6))
def test_householder(x):
    x = np.array(x, dtype=complex)
    u = householder_to_axis(x)
    assert np.allclose(u.conj().T @ u, np.eye(x.size), atol=1e-12)
    y = u @ x
    assert abs(y[0] - np.linalg.norm(x)) < 1e-10
    assert np.all(np.abs(y[1:]) < 1e-10)


def test_multi_detector_reduces_to_two():
    lams1 = np.array([0.3, 0.2j, -0.25])
    lams2 = np.array([0.1 + 0.1j, 0.35])
    p_multi, p_two, same = multi_detector_reduction_check(lams1, lams2, 1.7)
    assert same
    k1, k2 = np.sum(np.abs(lams1) ** 2), np.sum(np.abs(lams2) ** 2)
    expected = 0.5 * (1 - math.exp(-k1 * 1.7 ** 2)) + 0.5 * (1 - math.exp(-k2 * 1.7 ** 2))
    assert p_two == pytest.approx(expected, abs=1e-14)
    with pytest.raises(DomainError):
        multi_detector_reduction_check([], [0.1], 1.0)
