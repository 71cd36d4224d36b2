"""Reusing reference states after an identification round.

After a conclusive single-copy identification the two unmeasured output
modes (B and D of the two-reference core) still hold a mixture of the
references. Once the winner is known, a two-splitter network with one
vacuum ancilla cancels the cross term and leaves both references diluted by
the same factor ``lambda_{k+1} = f(lambda_k)``. The diluted pair then feeds
the next round as fractional-weight references.

Two recursions are available. ``"printed"`` is the published closed form
and drives the default success curves. ``"achievable"`` is what the
recovery optics actually deliver when the references enter with intensity
``lambda``. The two agree at ``lambda = 1`` and the achievable one is smaller
everywhere below. After a win of reference 1, port D holds only
``2 lambda^2 / (1 + 2 lambda)`` of reference 2; the printed ``f(lambda)``
exceeds that budget once ``lambda`` drops below about 0.8, so from the second
round on no passive network can deliver it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .detection import RngStream
from .errors import DomainError, InvalidShotCount
from .optics import ModeRegister, Network, apply_network
from .protocols import (INCONCLUSIVE, DetectorBank, Hypothesis, UIOutcome, UISetup,
                        _decide_two_ref, analytic_two_ref, build_two_ref_core)

__all__ = [
    "RecoveryState",
    "RoundResult",
    "RoundTransmittivities",
    "RECURSIONS",
    "lambda_step",
    "lambda_step_achievable",
    "reference2_budget",
    "lambda_sequence",
    "round_transmittivities",
    "build_recovery_network",
    "recover_references",
    "round_success_prob",
    "cumulative_success",
    "run_recovery_rounds",
    "same_unknown_second_round",
    "splitting_strategy_P",
    "compare_strategies",
    "inconclusive_recovery_rank",
]


def _check_lambda(x):
    x = float(x)
    if not (0.0 < x <= 1.0):
        raise DomainError(f"dilution factor must lie in (0, 1], got {x!r}")
    return x


RECURSIONS = ("printed", "achievable")


def _check_recursion(recursion):
    if recursion not in RECURSIONS:
        raise DomainError(f"recursion must be one of {RECURSIONS}, got {recursion!r}")


def lambda_step(x: float) -> float:
    """Dilution after one more round of identification plus recovery (published form)."""
    x = _check_lambda(x)
    s = 1.0 + 2.0 * x
    # rationalised form of (s^2 - 2x^2 - sqrt(4x^4 + s^2)) / (2s)
    return 2.0 * x * s / (s * s - 2.0 * x * x + math.sqrt(4.0 * x ** 4 + s * s))


def lambda_step_achievable(x: float) -> float:
    """Equal dilution the two-splitter recovery really reaches from references of intensity ``x``."""
    x = _check_lambda(x)
    s = 1.0 + 2.0 * x
    # rationalised form of (s^2 - 2x - sqrt(4x^2 + s^2)) / (2s); no cancellation at small x
    return 2.0 * x * x * s / (s * s - 2.0 * x + math.sqrt(4.0 * x * x + s * s))


def reference2_budget(x: float) -> float:
    """Intensity of the reference carried by the unmeasured D port after a win of reference 1."""
    x = _check_lambda(x)
    return 2.0 * x * x / (1.0 + 2.0 * x)


def lambda_sequence(rounds: int, recursion: str = "printed") -> np.ndarray:
    """``[lambda_1, ..., lambda_rounds]`` starting from ``lambda_1 = 1``."""
    _check_recursion(recursion)
    if int(rounds) != rounds or rounds < 1:
        raise DomainError(f"need at least one round, got {rounds!r}")
    step = lambda_step if recursion == "printed" else lambda_step_achievable
    lam = np.empty(int(rounds))
    lam[0] = 1.0
    for k in range(1, int(rounds)):
        lam[k] = step(lam[k - 1])
    return lam


@dataclass(frozen=True)
class RecoveryState:
    k: int = 1
    lam: float = 1.0

    def __post_init__(self):
        if self.k < 1:
            raise DomainError("rounds are numbered from 1")
        _check_lambda(self.lam)

    def next(self) -> "RecoveryState":
        return RecoveryState(self.k + 1, lambda_step(self.lam))


class RoundTransmittivities(NamedTuple):
    t1: float
    t2: float
    t3: float
    t1_recovery: float
    t2_recovery: float


def round_transmittivities(lam: float, recursion: str = "printed") -> RoundTransmittivities:
    """Identification splitters of a round with dilution ``lam`` and its recovery splitters.

    The second recovery splitter always cancels the winner's cross term; the
    first one is set so the kept reference ends at ``lambda_{k+1}`` of the
    chosen recursion.
    """
    _check_recursion(recursion)
    lam = _check_lambda(lam)
    s = 1.0 + 2.0 * lam
    # 1 - (2q + sqrt(4q^2 + s^2)) / s^2 with q = lam^2 (printed) or lam, which equals 2 f / s
    f = lambda_step(lam) if recursion == "printed" else lambda_step_achievable(lam)
    t1r = 2.0 * f / s
    g = (1.0 - t1r) * s * s
    return RoundTransmittivities(0.5, 2.0 * lam / s, 1.0 / s, t1r, g / (1.0 + g))


def build_recovery_network(lam: float, winner: int, recursion: str = "printed") -> Network:
    """Recovery network on modes ``(B, D, ancilla)``.

    Input: the unmeasured B and D outputs of a round with dilution ``lam``
    plus a vacuum ancilla. For ``winner == 1`` mode B holds only reference 1;
    the first splitter taps part of it into the ancilla and the second uses
    that tap to cancel the reference-1 term in D. ``winner == 2`` swaps the
    roles of B and D. Either way reference 1 leaves on mode 0, reference 2 on
    mode 1, and the ancilla carries the discarded remainder.
    """
    tr = round_transmittivities(lam, recursion)
    if winner == 1:
        keep, clean = 0, 1
    elif winner == 2:
        keep, clean = 1, 0
    else:
        raise DomainError(f"winner must be 1 or 2, got {winner!r}")
    return (Network(3)
            .append(tr.t1_recovery, (2, keep))
            .append(tr.t2_recovery, (2, clean)))


def _core_outputs(lam: float, hyp: Hypothesis, setup: UISetup | None = None) -> ModeRegister:
    setup = setup or build_two_ref_core(1.0, lam, lam, 0.5)
    return setup.evolve(hyp)


def recover_references(lam: float, hyp: Hypothesis, recursion: str = "printed") -> ModeRegister:
    """Run one round's optics on ``hyp`` and recover both references.

    The references enter with amplitude ``sqrt(lam) * alpha_i``; the result
    is the three-mode register ``(ref1, ref2, junk)`` after recovery.
    """
    out = _core_outputs(lam, hyp)
    reg = ModeRegister([out["B"], out["D"], 0.0], ("ref1", "ref2", "junk"))
    return apply_network(reg, build_recovery_network(lam, hyp.index, recursion))


def round_success_prob(lam, delta):
    """Success of a single round whose references are diluted by ``lam``."""
    lam = _check_lambda(lam)
    return -np.expm1(-(lam / (1.0 + 2.0 * lam)) * np.abs(delta) ** 2)


def cumulative_success(k: int, delta, recursion: str = "printed"):
    """Probability that rounds ``1..k`` all succeed (so round ``k`` happens and succeeds)."""
    lam = lambda_sequence(k, recursion)
    d2 = np.abs(np.asarray(delta, dtype=float)) ** 2
    coeff = lam / (1.0 + 2.0 * lam)
    return np.prod(-np.expm1(-np.multiply.outer(d2, coeff)), axis=-1)


@dataclass(frozen=True)
class RoundResult:
    k: int
    outcome: UIOutcome
    truth: int
    cumulative_success: float
    recovered_register: ModeRegister | None


def run_recovery_rounds(alpha1, alpha2, rounds: int, rng: RngStream,
                        recursion: str = "achievable") -> list[RoundResult]:
    """Sequential database search with recovered references.

    In every round a fresh unknown equal to either reference (probability
    1/2 each) is identified with the current diluted references. A
    conclusive verdict triggers recovery for the next round; an inconclusive
    one ends the run because the references cannot be restored.

    The references handed to each round are the ones the recovery network
    actually produced, so the default here is the ``"achievable"`` recursion.
    """
    if int(rounds) != rounds or rounds < 1:
        raise InvalidShotCount(f"need at least one round, got {rounds!r}")
    refs = (complex(alpha1), complex(alpha2))
    delta = abs(refs[0] - refs[1])
    lam = 1.0
    results = []
    for k in range(1, int(rounds) + 1):
        truth = 1 if rng.uniform() < 0.5 else 2
        hyp = Hypothesis(truth, refs)
        setup = build_two_ref_core(1.0, lam, lam, 0.5)
        outcome, _ = setup.measure(hyp, rng)
        p_cum = float(cumulative_success(k, delta, recursion))
        if not outcome.conclusive:
            results.append(RoundResult(k, outcome, truth, p_cum, None))
            break
        recovered = recover_references(lam, Hypothesis(outcome.index, refs), recursion)
        results.append(RoundResult(k, outcome, truth, p_cum, recovered))
        lam = (lambda_step if recursion == "printed" else lambda_step_achievable)(lam)
    return results


def _decide_two_rounds(patterns: np.ndarray) -> np.ndarray:
    first = _decide_two_ref(patterns[:, :2])
    second = _decide_two_ref(patterns[:, 2:4])
    return np.where(first > 0, first, second)


def same_unknown_second_round(delta):
    """Second identification of the same unknown from the unmeasured modes.

    Returns ``(conditional_p, overall_p, setup)``. The setup has six modes
    ``A, B, C, D, A2, E``: the single-copy core on the first four, then a
    second unknown copy ``A2`` split with vacuum ``E`` at 1/2 and compared
    with B (``t = 3/4``) and D (``t = 1/4``). Patterns are
    ``(D1, D2, D1', D2')``; the second pair is read only when the first
    round is inconclusive.
    """
    d2 = abs(delta) ** 2
    conditional = -math.expm1(-d2 / 6.0)
    overall = -math.expm1(-d2 / 2.0)
    core = build_two_ref_core(1, 1, 1, 0.5)
    net = Network(6, core.network.elements).append(0.5, (5, 4)).append(0.75, (1, 4)).append(0.25, (5, 3))
    setup = UISetup(
        network=net,
        detector_bank=DetectorBank((2, 0, 3, 4)),
        decide=_decide_two_rounds,
        sources=(0, 1, 2, None, 0, None),
        scales=(1.0, 1.0, 1.0, 0.0, 1.0, 0.0),
        labels=("A", "B", "C", "D", "A2", "E"),
        params={"t1": 0.5, "t2": 2 / 3, "t3": 1 / 3, "t1_second": 0.5, "t2_second": 0.75,
                "t3_second": 0.25},
    )
    return conditional, overall, setup


def splitting_strategy_P(n: int, delta):
    """All ``n`` identifications succeed when references are pre-split ``n`` ways."""
    if int(n) != n or n < 1:
        raise InvalidShotCount(f"need at least one identification, got {n!r}")
    return (-np.expm1(-np.abs(delta) ** 2 / (n + 2))) ** n


def compare_strategies(n: int, delta, recursion: str = "printed"):
    """``(recovery_p, splitting_p, recovery_p - splitting_p)``."""
    rec = cumulative_success(n, delta, recursion)
    split = splitting_strategy_P(n, delta)
    return rec, split, rec - split


def inconclusive_recovery_rank(lam: float = 1.0, pairs: int = 8, seed: int = 0,
                               alpha_equal: bool = False) -> dict:
    """Is any fixed affine map of the unmeasured modes a recovered reference?

    Looks for ``(a, b, gamma, mu)`` with
    ``a * out_B + b * out_D + gamma == mu * alpha_target`` under both
    hypotheses for many random reference pairs. Each (pair, hypothesis) gives
    one linear equation; a full-rank system (rank 4) admits only the trivial
    solution, i.e. no recovery without knowing the verdict.
    Returns the rank and the null-space dimension for both targets.
    """
    rng = np.random.default_rng(seed)
    setup = build_two_ref_core(1.0, lam, lam, 0.5)
    result = {}
    for target in (1, 2):
        rows = []
        for _ in range(pairs):
            a1, a2 = rng.normal(size=2) + 1j * rng.normal(size=2)
            if alpha_equal:
                a2 = a1
            for h in (1, 2):
                out = setup.evolve(Hypothesis(h, (a1, a2)))
                rows.append([out["B"], out["D"], 1.0, -(a1 if target == 1 else a2)])
        mat = np.array(rows, dtype=complex)
        rank = int(np.linalg.matrix_rank(mat, tol=1e-9))
        result[f"ref{target}"] = {"rank": rank, "nullity": 4 - rank}
    return result
