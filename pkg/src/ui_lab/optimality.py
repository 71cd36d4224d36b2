"""Optimality of the two-detector linear-optics identification scheme.

Any conclusive detector must see ``lambda_j (alpha_? - alpha_2)`` (or the
mirror image), and detectors supporting the same verdict can be merged into
one without changing the success probability. With one detector per verdict
the rows of the network give::

    l1 * l2 <= (1 - 2 l1) (1 - 2 l2),        l_i = |lambda_i|^2

Saturating the bound, ``l2 = (1 - 2 l1) / (2 - 3 l1)``. The map ``l1 -> l2``
is an involution with fixed point 1/3, and ``l1 + l2`` is concave, which is
why the symmetric choice wins for every separation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._golden import golden_section_max
from .errors import DomainError

__all__ = [
    "DEGENERATE",
    "Degenerate",
    "DetectorCoupling",
    "lambda2_sq_max",
    "lambda2_sq_printed",
    "two_detector_P",
    "optimize_lambda1",
    "grid_argmax_lambda1",
    "householder_to_axis",
    "multi_detector_reduction_check",
]

L1_MAX = 0.5
_FEAS_TOL = 1e-12


class Degenerate:
    """Marker returned when the objective is flat and has no unique maximiser."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "DEGENERATE"

    def __bool__(self):
        return False


DEGENERATE = Degenerate()


def _check_l1(l1) -> float:
    l1 = float(l1)
    if not (0.0 <= l1 <= L1_MAX):
        raise DomainError(f"|lambda_1|^2 must lie in [0, 1/2], got {l1!r}")
    return l1


@dataclass(frozen=True)
class DetectorCoupling:
    """Squared couplings of the two conclusive detectors to ``alpha_? - alpha_j``."""

    lambda1_sq: float
    lambda2_sq: float

    def __post_init__(self):
        l1, l2 = _check_l1(self.lambda1_sq), _check_l1(self.lambda2_sq)
        if l1 * l2 > (1 - 2 * l1) * (1 - 2 * l2) + _FEAS_TOL:
            raise DomainError(f"couplings ({l1}, {l2}) violate the unitarity bound")
        object.__setattr__(self, "lambda1_sq", l1)
        object.__setattr__(self, "lambda2_sq", l2)

    def success(self, delta) -> float:
        d2 = float(delta) ** 2
        return 0.5 * (-math.expm1(-self.lambda1_sq * d2)) + 0.5 * (-math.expm1(-self.lambda2_sq * d2))

    @classmethod
    def saturated(cls, l1) -> "DetectorCoupling":
        return cls(l1, lambda2_sq_max(l1))


def lambda2_sq_max(l1) -> float:
    """Largest ``|lambda_2|^2`` compatible with ``l1``: ``(1 - 2 l1) / (2 - 3 l1)``."""
    l1 = _check_l1(l1)
    return (1.0 - 2.0 * l1) / (2.0 - 3.0 * l1)


def lambda2_sq_printed(l1) -> float:
    """``(1 - l1) / (2 - 3 l1)``; kept for comparison only, it breaks the bound for l1 > 0."""
    l1 = _check_l1(l1)
    return (1.0 - l1) / (2.0 - 3.0 * l1)


_FORMS = {"saturated": lambda2_sq_max, "printed": lambda2_sq_printed}


def two_detector_P(l1, delta, form: str = "saturated") -> float:
    """Equal-prior success with couplings ``l1`` and the matching ``l2``.

    ``delta`` is ``|alpha_1 - alpha_2|``.
    """
    if form not in _FORMS:
        raise DomainError(f"form must be one of {sorted(_FORMS)}, got {form!r}")
    delta = float(delta)
    if not delta >= 0.0:
        raise DomainError(f"delta must be >= 0, got {delta!r}")
    l1 = _check_l1(l1)
    l2 = _FORMS[form](l1)
    d2 = delta * delta
    return 0.5 * (-math.expm1(-l1 * d2)) + 0.5 * (-math.expm1(-l2 * d2))


def optimize_lambda1(delta, form: str = "saturated", tol: float = 1e-8):
    """Maximiser of :func:`two_detector_P` over ``l1`` in ``[0, 1/2]``.

    Returns :data:`DEGENERATE` when ``delta == 0`` since the objective is then
    identically zero.
    """
    delta = float(delta)
    if not delta >= 0.0:
        raise DomainError(f"delta must be >= 0, got {delta!r}")
    if delta == 0.0:
        return DEGENERATE
    return golden_section_max(lambda l1: two_detector_P(l1, delta, form), 0.0, L1_MAX, tol)


def grid_argmax_lambda1(delta, points: int = 100_001, form: str = "saturated") -> tuple[float, float]:
    """Brute-force argmax on a uniform grid; returns ``(argmax, spacing)``."""
    grid = np.linspace(0.0, L1_MAX, int(points))
    d2 = float(delta) ** 2
    l2 = (1 - 2 * grid) / (2 - 3 * grid) if form == "saturated" else (1 - grid) / (2 - 3 * grid)
    p = 0.5 * (-np.expm1(-grid * d2)) + 0.5 * (-np.expm1(-l2 * d2))
    return float(grid[int(np.argmax(p))]), float(grid[1] - grid[0])


def householder_to_axis(x) -> np.ndarray:
    """Unitary ``U`` with ``U @ x = ||x|| e_0`` (real, nonnegative first entry)."""
    x = np.asarray(x, dtype=complex).reshape(-1)
    n = x.size
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        return np.eye(n, dtype=complex)
    phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
    w = x.copy()
    w[0] += phase * norm
    h = np.eye(n, dtype=complex) - 2.0 * np.outer(w, w.conj()) / np.vdot(w, w).real
    # h @ x = -phase * norm * e_0; undo the phase on the first row
    h[0, :] *= -np.conj(phase)
    return h


def _success_from_amps(amps1, amps2) -> float:
    # verdict k succeeds unless every detector supporting it stays dark
    dark1 = math.exp(-float(np.sum(np.abs(amps1) ** 2)))
    dark2 = math.exp(-float(np.sum(np.abs(amps2) ** 2)))
    return 0.5 * (1.0 - dark1) + 0.5 * (1.0 - dark2)


def multi_detector_reduction_check(lams1, lams2, delta, tol: float = 1e-12):
    """Compare many conclusive detectors with their two-detector reduction.

    ``lams1`` couple to ``alpha_? - alpha_2`` and ``lams2`` to
    ``alpha_? - alpha_1``. Block Householder unitaries fold each group into a
    single mode of weight ``kappa_i = ||lams_i||``. Returns
    ``(P_multi, P_two, equal)``.
    """
    lams1 = np.asarray(lams1, dtype=complex).reshape(-1)
    lams2 = np.asarray(lams2, dtype=complex).reshape(-1)
    if lams1.size == 0 or lams2.size == 0:
        raise DomainError("each verdict needs at least one detector")
    delta = float(delta)
    # with alpha_1 - alpha_2 = delta every conclusive mode has amplitude lambda_j * delta
    out1, out2 = lams1 * delta, lams2 * delta
    p_multi = _success_from_amps(out1, out2)
    red1 = householder_to_axis(lams1) @ out1
    red2 = householder_to_axis(lams2) @ out2
    p_two = _success_from_amps(red1[:1], red2[:1])
    return p_multi, p_two, abs(p_multi - p_two) <= tol
