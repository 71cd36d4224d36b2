"""Unambiguous identification (UI) setups built from beam splitters.

Two families are provided:

* the two-reference setup: concentrate each group of copies, split the
  unknown amplitude on ``B1``, compare the halves with each reference on
  ``B2`` and ``B3``, watch the two cancellation ports;
* the ``m``-reference generalisation: split the concentrated unknown into
  ``m`` equal parts and compare part ``k`` with reference ``k``.

Each builder returns a :class:`UISetup` that can be evolved exactly on any
hypothesis and sampled shot by shot. The closed-form success probabilities
live next to the builders so the two can be checked against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._golden import golden_section_max
from .detection import DetectorBank, RngStream, run_blocks, sample_batch, sample_counts
from .errors import DomainError, InvalidCopyCount, InvalidShotCount, InvalidTotal, InvalidTransmittivity
from .optics import ModeRegister, Network, apply_network, build_concentrator, compose_network, evolve

__all__ = [
    "UIOutcome",
    "INCONCLUSIVE",
    "UIConfig",
    "Hypothesis",
    "UISetup",
    "ResourceSplit",
    "two_ref_transmittivities",
    "build_two_ref_core",
    "build_two_ref_setup",
    "classify_two_ref",
    "analytic_two_ref",
    "optimal_t1",
    "resource_tradeoff",
    "idp_limit_P",
    "multi_ref_transmittivity",
    "build_multi_ref_setup",
    "analytic_multi_ref_P",
    "build_splitter",
    "weak_ui_run",
    "weak_ui_batch",
    "weak_leftover",
    "mc_outcomes",
    "mc_success",
]


@dataclass(frozen=True)
class UIOutcome:
    """Measurement verdict: ``index`` of the identified reference, or None."""

    index: int | None = None

    @property
    def conclusive(self) -> bool:
        return self.index is not None

    def __str__(self):
        return f"Conclusive({self.index})" if self.conclusive else "Inconclusive"


INCONCLUSIVE = UIOutcome()


def _check_count(n, name, fractional=False):
    if fractional:
        if not (n > 0) or not math.isfinite(n):
            raise InvalidCopyCount(f"{name} must be a positive weight, got {n!r}")
        return float(n)
    if int(n) != n or n < 1:
        raise InvalidCopyCount(f"{name} must be a positive integer, got {n!r}")
    return int(n)


def _check_t(t, name="t1"):
    t = float(t)
    if not (0.0 <= t <= 1.0):
        raise InvalidTransmittivity(f"{name}={t!r} not in [0, 1]")
    return t


@dataclass(frozen=True)
class UIConfig:
    """Resources of one identification task.

    ``n_refs`` holds the copy count of each reference kind. With
    ``fractional=True`` the counts are read as intensity weights, as needed
    when recovered or split references enter a later round.
    """

    m: int
    n_a: float
    n_refs: tuple[float, ...]
    priors: tuple[float, ...] | None = None
    t1_override: float | None = None
    fractional: bool = False

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise InvalidCopyCount(f"need at least two reference kinds, got m={self.m!r}")
        n_refs = tuple(self.n_refs)
        if len(n_refs) != self.m:
            raise InvalidCopyCount(f"{len(n_refs)} reference counts for m={self.m}")
        object.__setattr__(self, "n_a", _check_count(self.n_a, "n_a", self.fractional))
        object.__setattr__(self, "n_refs", tuple(
            _check_count(n, f"n_refs[{k}]", self.fractional) for k, n in enumerate(n_refs)))
        priors = self.priors if self.priors is not None else (1.0 / self.m,) * self.m
        priors = tuple(float(p) for p in priors)
        if len(priors) != self.m or any(p < 0 for p in priors) or abs(sum(priors) - 1) > 1e-12:
            raise DomainError(f"priors {priors} must be {self.m} nonnegative numbers summing to 1")
        object.__setattr__(self, "priors", priors)
        if self.t1_override is not None:
            object.__setattr__(self, "t1_override", _check_t(self.t1_override))


@dataclass(frozen=True)
class Hypothesis:
    """The unknown equals reference ``index`` (1-based) out of ``ref_amps``."""

    index: int
    ref_amps: tuple[complex, ...]

    def __post_init__(self):
        amps = tuple(complex(a) for a in self.ref_amps)
        if not 1 <= self.index <= len(amps):
            raise DomainError(f"hypothesis index {self.index} outside 1..{len(amps)}")
        object.__setattr__(self, "ref_amps", amps)

    @property
    def unknown(self) -> complex:
        return self.ref_amps[self.index - 1]


@dataclass(frozen=True)
class UISetup:
    """A concrete UI measurement: network, detectors and decision rule.

    ``sources[q]`` says what mode ``q`` is fed with: ``0`` for the unknown
    state, ``k`` for reference ``k`` and ``None`` for vacuum. ``scales[q]``
    multiplies that amplitude (1 for a physical copy, ``sqrt(w)`` for a
    pre-concentrated input of weight ``w``).
    """

    network: Network
    detector_bank: DetectorBank
    decide: Callable[[np.ndarray], np.ndarray]
    sources: tuple[int | None, ...]
    scales: tuple[float, ...]
    labels: tuple[str, ...]
    m: int = 2
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        n = self.network.mode_count
        if not (len(self.sources) == len(self.scales) == len(self.labels) == n):
            raise InvalidCopyCount("input layout does not match the network size")
        self.detector_bank.validate(n)

    @property
    def matrix(self) -> np.ndarray:
        cached = self.params.get("_matrix")
        if cached is None:
            cached = compose_network(self.network)
            self.params["_matrix"] = cached
        return cached

    def mode(self, label: str) -> int:
        return self.labels.index(label)

    def input_amps(self, unknown, refs) -> np.ndarray:
        """Input amplitudes for one or many shots.

        ``unknown`` has shape ``(shots,)`` (or scalar), ``refs`` has shape
        ``(shots, m)`` (or ``(m,)``).
        """
        unknown = np.asarray(unknown, dtype=complex)
        refs = np.asarray(refs, dtype=complex)
        cols = []
        for src, scale in zip(self.sources, self.scales):
            if src is None:
                cols.append(np.zeros_like(unknown))
            elif src == 0:
                cols.append(scale * unknown)
            else:
                cols.append(scale * refs[..., src - 1])
        return np.stack(cols, axis=-1)

    def input_register(self, hyp: Hypothesis) -> ModeRegister:
        return ModeRegister(self.input_amps(hyp.unknown, hyp.ref_amps), self.labels)

    def evolve(self, hyp: Hypothesis) -> ModeRegister:
        """Exact output register, composed-matrix route."""
        return ModeRegister(evolve(self.matrix, self.input_register(hyp).amps), self.labels)

    def evolve_stepwise(self, hyp: Hypothesis) -> ModeRegister:
        """Exact output register, splitter-by-splitter route."""
        return apply_network(self.input_register(hyp), self.network)

    def detector_amps(self, hyp: Hypothesis) -> np.ndarray:
        return self.evolve(hyp).amps[list(self.detector_bank.monitored_modes)]

    def classify(self, pattern) -> UIOutcome:
        k = int(self.decide(np.asarray(pattern)[None, :])[0])
        return UIOutcome(k) if k else INCONCLUSIVE

    def measure(self, hyp: Hypothesis, rng: RngStream) -> tuple[UIOutcome, tuple[int, ...]]:
        pattern = sample_counts(self.evolve(hyp), self.detector_bank, rng)
        return self.classify(pattern), pattern


# --------------------------------------------------------------------------
# two references


def two_ref_transmittivities(n_a, n_b, n_c, t1) -> tuple[float, float]:
    """``(T2, T3)`` making the A port dark for reference 1 and C for reference 2."""
    t1 = _check_t(t1)
    t2 = 1.0 / (1.0 + (n_a / n_b) * t1)
    t3 = (1.0 - t1) / (n_c / n_a + 1.0 - t1)
    return t2, t3


def _decide_two_ref(patterns: np.ndarray) -> np.ndarray:
    d1 = patterns[:, 0] > 0
    d2 = patterns[:, 1] > 0
    return np.where(d1 & ~d2, 1, np.where(d2 & ~d1, 2, 0))


def classify_two_ref(pattern) -> UIOutcome:
    """Pattern ``(D1, D2)``: D1 alone means reference 1, D2 alone reference 2."""
    k = int(_decide_two_ref(np.asarray(pattern).reshape(1, 2))[0])
    return UIOutcome(k) if k else INCONCLUSIVE


def _two_ref_core_net(t1, t2, t3, a, b, c, d, mode_count):
    return (Network(mode_count)
            .append(t1, (d, a))
            .append(t2, (b, a))
            .append(t3, (d, c)))


def build_two_ref_core(w_a, w_b, w_c, t1=0.5) -> UISetup:
    """Four-mode setup (A, B, C, D) fed with already-concentrated inputs.

    The weights may be any positive reals; mode A receives
    ``sqrt(w_a) * unknown`` and so on. Used for recovered references,
    whose intensities are not whole copies.
    """
    w_a = _check_count(w_a, "n_a", True)
    w_b = _check_count(w_b, "n_b", True)
    w_c = _check_count(w_c, "n_c", True)
    t2, t3 = two_ref_transmittivities(w_a, w_b, w_c, t1)
    net = _two_ref_core_net(t1, t2, t3, 0, 1, 2, 3, 4)
    return UISetup(
        network=net,
        detector_bank=DetectorBank((2, 0)),
        decide=_decide_two_ref,
        sources=(0, 1, 2, None),
        scales=(math.sqrt(w_a), math.sqrt(w_b), math.sqrt(w_c), 0.0),
        labels=("A", "B", "C", "D"),
        params={"t1": float(t1), "t2": t2, "t3": t3},
    )


def build_two_ref_setup(n_a, n_b, n_c, t1=0.5) -> UISetup:
    """Full multi-copy two-reference setup.

    Modes are ``A1..A{n_a}, B1..B{n_b}, C1..C{n_c}, D``. Each group is first
    concentrated onto its first mode, then ``B1`` (``t1``) acts on (D, A1),
    ``B2`` on (B1, A1) and ``B3`` on (D, C1). Detector D1 watches C1, D2
    watches A1; patterns are ordered ``(D1, D2)``.
    """
    n_a = _check_count(n_a, "n_a")
    n_b = _check_count(n_b, "n_b")
    n_c = _check_count(n_c, "n_c")
    t1 = _check_t(t1)
    t2, t3 = two_ref_transmittivities(n_a, n_b, n_c, t1)
    size = n_a + n_b + n_c + 1
    a0, b0, c0, d = 0, n_a, n_a + n_b, size - 1
    net = Network(size)
    for start, count in ((a0, n_a), (b0, n_b), (c0, n_c)):
        net = net.then(build_concentrator(count).embed(range(start, start + count), size))
    net = net.then(_two_ref_core_net(t1, t2, t3, a0, b0, c0, d, size))
    labels = ([f"A{i + 1}" for i in range(n_a)] + [f"B{i + 1}" for i in range(n_b)]
              + [f"C{i + 1}" for i in range(n_c)] + ["D"])
    sources = (0,) * n_a + (1,) * n_b + (2,) * n_c + (None,)
    return UISetup(
        network=net,
        detector_bank=DetectorBank((c0, a0)),
        decide=_decide_two_ref,
        sources=sources,
        scales=(1.0,) * (size - 1) + (0.0,),
        labels=tuple(labels),
        params={"t1": t1, "t2": t2, "t3": t3, "n_a": n_a, "n_b": n_b, "n_c": n_c},
    )


def analytic_two_ref(n_a, n_b, n_c, t1, alpha1, alpha2, priors=(0.5, 0.5)):
    """Closed-form ``(P1, P2, P)`` of the two-reference setup.

    ``P1`` is the success probability when the unknown equals reference 1,
    ``P2`` likewise for reference 2, and ``P`` their prior-weighted sum.
    Copy counts may be fractional weights.
    """
    t1 = _check_t(t1)
    for name, n in (("n_a", n_a), ("n_b", n_b), ("n_c", n_c)):
        _check_count(n, name, True)
    if len(priors) != 2:
        raise DomainError("two priors required")
    d2 = abs(complex(alpha1) - complex(alpha2)) ** 2
    k1 = n_c * n_a * (1 - t1) / (n_c + n_a * (1 - t1))
    k2 = n_b * n_a * t1 / (n_b + n_a * t1)
    p1 = -math.expm1(-k1 * d2)
    p2 = -math.expm1(-k2 * d2)
    return p1, p2, priors[0] * p1 + priors[1] * p2


def symmetric_two_ref_P(n_a, n_b, delta) -> float:
    """Success probability for ``n_b == n_c`` and ``t1 = 1/2``."""
    return -math.expm1(-(n_a * n_b / (n_a + 2 * n_b)) * delta ** 2)


def optimal_t1(n_a, n_b, n_c, alpha1=None, alpha2=None, priors=(0.5, 0.5),
               search=False, tol=1e-8) -> float:
    """Splitting ratio ``t1`` that maximises the two-reference success.

    For ``n_b == n_c`` with equal priors the optimum is 1/2 whatever the
    references are. Otherwise it depends on ``|alpha1 - alpha2|`` and is found
    by golden-section search on ``[0, 1]``; ``search=True`` forces the search.
    """
    if n_b == n_c and priors[0] == priors[1] and not search:
        return 0.5
    if alpha1 is None or alpha2 is None:
        raise DomainError("the optimal t1 depends on the references here; pass alpha1 and alpha2")
    if complex(alpha1) == complex(alpha2):
        raise DomainError("identical references: every t1 gives zero success")
    return golden_section_max(
        lambda t: analytic_two_ref(n_a, n_b, n_c, t, alpha1, alpha2, priors)[2], 0.0, 1.0, tol)


@dataclass(frozen=True)
class ResourceSplit:
    """How to spend ``total`` modes: ``n_a`` unknowns, ``n_b`` of each reference."""

    total: int
    n_a: int
    n_b: int

    @property
    def coefficient(self) -> float:
        return self.n_a * (self.total - self.n_a) / (2 * self.total)

    def success(self, delta) -> float:
        return -math.expm1(-self.coefficient * abs(delta) ** 2)


def resource_tradeoff(total: int) -> ResourceSplit:
    """Best split of ``total`` modes between unknown and reference copies.

    Only ``n_a`` with ``total - n_a`` even is admissible. The exponent
    ``n_a (N - n_a) / 2N`` peaks at ``N/2``; ties go to the smaller ``n_a``.
    """
    if int(total) != total or total < 3:
        raise InvalidTotal(f"need at least 3 modes, got {total!r}")
    total = int(total)
    best = max((n for n in range(1, total - 1) if (total - n) % 2 == 0),
               key=lambda n: (n * (total - n), -n))
    return ResourceSplit(total, best, (total - best) // 2)


def idp_limit_P(n_a, alpha1, alpha2) -> float:
    """Success with perfectly known references, ``1 - |<a1|a2>|^n_a``."""
    _check_count(n_a, "n_a", True)
    return -math.expm1(-(n_a / 2) * abs(complex(alpha1) - complex(alpha2)) ** 2)


# --------------------------------------------------------------------------
# m references


def multi_ref_transmittivity(m, n_a, n_b) -> float:
    return n_a / (n_a + m * n_b)


def _decide_all_but_one(patterns: np.ndarray) -> np.ndarray:
    fired = patterns > 0
    silent = ~fired
    exactly_one = silent.sum(axis=1) == 1
    return np.where(exactly_one, np.argmax(silent, axis=1) + 1, 0)


def build_multi_ref_setup(m, n_a, n_b) -> UISetup:
    """``m``-reference setup with equal splitting of the unknown.

    Modes: ``n_a`` unknown copies, ``m`` groups of ``n_b`` reference copies,
    then ``m - 1`` vacuum ancillas receiving the split-off parts. Stage ``j``
    of the split keeps ``1 - 1/(m - j + 1)`` of the remaining intensity, so
    every branch carries ``n_a / m``. Comparison ``C_k`` acts on (branch k,
    reference k) with ``t = n_a / (n_a + m n_b)`` and detector ``D_k``
    watches reference k's mode. Reference ``k`` is concluded when every
    detector except ``D_k`` fires.
    """
    if int(m) != m or m < 2:
        raise InvalidCopyCount(f"need m >= 2 reference kinds, got {m!r}")
    m = int(m)
    n_a = _check_count(n_a, "n_a")
    n_b = _check_count(n_b, "n_b")
    size = n_a + m * n_b + (m - 1)
    ref0 = [n_a + k * n_b for k in range(m)]
    anc = [n_a + m * n_b + j for j in range(m - 1)]
    net = build_concentrator(n_a).embed(range(n_a), size)
    for start in ref0:
        net = net.then(build_concentrator(n_b).embed(range(start, start + n_b), size))
    for j in range(1, m):
        net = net.append(1.0 - 1.0 / (m - j + 1), (anc[j - 1], 0))
    branches = anc + [0]
    tk = multi_ref_transmittivity(m, n_a, n_b)
    for branch, ref in zip(branches, ref0):
        net = net.append(tk, (branch, ref))
    labels = ([f"A{i + 1}" for i in range(n_a)]
              + [f"R{k + 1}_{i + 1}" for k in range(m) for i in range(n_b)]
              + [f"S{j + 1}" for j in range(m - 1)])
    sources = (0,) * n_a + tuple(k + 1 for k in range(m) for _ in range(n_b)) + (None,) * (m - 1)
    scales = (1.0,) * (n_a + m * n_b) + (0.0,) * (m - 1)
    return UISetup(
        network=net,
        detector_bank=DetectorBank(tuple(ref0)),
        decide=_decide_all_but_one,
        sources=sources,
        scales=scales,
        labels=tuple(labels),
        m=m,
        params={"t_compare": tk, "n_a": n_a, "n_b": n_b},
    )


def analytic_multi_ref_P(m, n_a, n_b, ref_amps) -> float:
    """Closed-form success of the ``m``-reference setup with equal priors."""
    refs = np.asarray(ref_amps, dtype=complex)
    if refs.size != m:
        raise DomainError(f"expected {m} reference amplitudes, got {refs.size}")
    k = n_a * n_b / (n_a + m * n_b)
    d2 = np.abs(refs[:, None] - refs[None, :]) ** 2
    factors = -np.expm1(-k * d2)
    np.fill_diagonal(factors, 1.0)
    return float(np.mean(np.prod(factors, axis=1)))


# --------------------------------------------------------------------------
# Monte Carlo over a setup


def _hypothesis_draws(u: np.ndarray, priors) -> np.ndarray:
    edges = np.cumsum(priors)[:-1]
    return np.searchsorted(edges, u, side="right") + 1


def _simulate(setup: UISetup, ref_amps, shots, seed, hyp_index=None, priors=None, workers=None):
    refs = np.asarray(ref_amps, dtype=complex)
    if refs.size != setup.m:
        raise DomainError(f"setup expects {setup.m} references, got {refs.size}")
    priors = np.full(setup.m, 1.0 / setup.m) if priors is None else np.asarray(priors, float)
    u_mat = setup.matrix

    def block(size, rng):
        if hyp_index is None:
            truth = _hypothesis_draws(rng.uniform(size), priors)
        else:
            truth = np.full(size, int(hyp_index))
        inputs = setup.input_amps(refs[truth - 1], np.broadcast_to(refs, (size, setup.m)))
        patterns = sample_batch(evolve(u_mat, inputs), setup.detector_bank, rng)
        verdict = setup.decide(patterns)
        # counts[i, j]: truth i (1-based), verdict j (0 = inconclusive)
        counts = np.zeros((setup.m + 1, setup.m + 1), dtype=np.int64)
        np.add.at(counts, (truth, verdict), 1)
        return counts

    return sum(run_blocks(block, shots, seed, workers))


def mc_outcomes(setup: UISetup, hyp: Hypothesis, shots: int, seed: int,
                workers: int | None = None) -> np.ndarray:
    """Counts of each verdict (index 0 = inconclusive) under a fixed hypothesis."""
    counts = _simulate(setup, hyp.ref_amps, shots, seed, hyp_index=hyp.index, workers=workers)
    return counts[hyp.index]


def mc_success(setup: UISetup, ref_amps, shots: int, seed: int, priors=None,
               workers: int | None = None) -> dict:
    """Estimate success/error/failure frequencies with the truth drawn from ``priors``."""
    counts = _simulate(setup, ref_amps, shots, seed, priors=priors, workers=workers)
    truth = counts[1:, :]
    correct = int(np.trace(truth[:, 1:]))
    inconclusive = int(truth[:, 0].sum())
    wrong = int(shots - correct - inconclusive)
    p = correct / shots
    return {
        "shots": int(shots),
        "correct": correct,
        "wrong": wrong,
        "inconclusive": inconclusive,
        "p_success": p,
        "se_success": math.sqrt(p * (1 - p) / shots),
        "counts": counts,
    }


# --------------------------------------------------------------------------
# weak implementation


def build_splitter(k: int) -> Network:
    """Inverse of :func:`build_concentrator`: ``(sqrt(k) b, 0, ...) -> (b, ..., b)``."""
    conc = build_concentrator(k)
    return Network(k, tuple(
        type(bs)(bs.t, (bs.modes[1], bs.modes[0])) for bs in reversed(conc.elements)))


def _weak_networks(n_rounds: int):
    """Splitting network and the per-round comparison networks.

    Round ``r`` uses modes ``4r .. 4r+3`` as (unknown, ref1, ref2, vacuum).
    """
    size = 4 * n_rounds
    split = Network(size)
    for offset in range(3):
        modes = [4 * r + offset for r in range(n_rounds)]
        split = split.then(build_splitter(n_rounds).embed(modes, size))
    core = build_two_ref_core(1, 1, 1, 0.5).network
    compare = Network(size)
    for r in range(n_rounds):
        compare = compare.then(core.embed([4 * r + q for q in range(4)], size))
    return split, compare


def _weak_registers(n_rounds: int, hyp: Hypothesis):
    size = 4 * n_rounds
    amps = np.zeros(size, dtype=complex)
    amps[0], amps[1], amps[2] = hyp.unknown, hyp.ref_amps[0], hyp.ref_amps[1]
    labels = tuple(f"{name}{r + 1}" for r in range(n_rounds) for name in ("A", "B", "C", "D"))
    split_net, compare_net = _weak_networks(n_rounds)
    split = apply_network(ModeRegister(amps, labels), split_net)
    # rounds touch disjoint modes, so evolving all comparisons at once is exact
    return split, apply_network(split, compare_net)


def _round_bank(r: int) -> DetectorBank:
    return DetectorBank((4 * r + 2, 4 * r))


def weak_ui_run(n_rounds: int, hyp: Hypothesis, rng: RngStream):
    """One run of the weak (split-into-``n_rounds``) identification.

    Each resource is split into ``n_rounds`` equal parts and the single-copy
    setup is run on one triple at a time until a conclusive verdict. The
    untouched triples are then concentrated, the leftover unknowns joining
    the reference they were just identified with.

    Returns ``(outcome, leftover, round)``. ``leftover`` is a two-mode register
    ``(ref1, ref2)``; it and ``round`` are None when every round was
    inconclusive.
    """
    if int(n_rounds) != n_rounds or n_rounds < 1:
        raise InvalidShotCount(f"number of rounds must be >= 1, got {n_rounds!r}")
    if len(hyp.ref_amps) != 2:
        raise DomainError("weak implementation needs exactly two references")
    n_rounds = int(n_rounds)
    split, measured = _weak_registers(n_rounds, hyp)
    for r in range(n_rounds):
        outcome = classify_two_ref(sample_counts(measured, _round_bank(r), rng))
        if outcome.conclusive:
            return outcome, weak_leftover(split, r + 1, outcome.index), r + 1
    return INCONCLUSIVE, None, None


def weak_leftover(split: ModeRegister, k: int, winner: int) -> ModeRegister:
    """Concentrate the triples after round ``k`` once ``winner`` is known."""
    n_rounds = len(split) // 4
    rest = range(k, n_rounds)
    unknowns = [split.amps[4 * q] for q in rest]
    ref1 = [split.amps[4 * q + 1] for q in rest]
    ref2 = [split.amps[4 * q + 2] for q in rest]
    groups = (unknowns + ref1, ref2) if winner == 1 else (ref1, unknowns + ref2)
    return ModeRegister([_concentrate(g) for g in groups], ("ref1", "ref2"))


def _concentrate(values) -> complex:
    if not values:
        return 0j
    reg = apply_network(ModeRegister(values), build_concentrator(len(values)))
    return complex(reg.amps[0])


def weak_ui_batch(n_rounds: int, hyp: Hypothesis, runs: int, seed: int,
                  workers: int | None = None) -> dict:
    """Many independent weak-implementation runs.

    Returns the verdict counts and the histogram of the round at which the
    first conclusive result occurred.
    """
    if int(n_rounds) != n_rounds or n_rounds < 1:
        raise InvalidShotCount(f"number of rounds must be >= 1, got {n_rounds!r}")
    n_rounds = int(n_rounds)
    if len(hyp.ref_amps) != 2:
        raise DomainError("weak implementation needs exactly two references")
    out = _weak_registers(n_rounds, hyp)[1].amps
    bank = DetectorBank(tuple(m for r in range(n_rounds) for m in _round_bank(r).monitored_modes))

    def block(size, rng):
        patterns = sample_batch(np.broadcast_to(out, (size, out.size)), bank, rng)
        verdicts = _decide_two_ref(patterns.reshape(-1, 2)).reshape(size, n_rounds)
        done = verdicts > 0
        first = np.where(done.any(axis=1), np.argmax(done, axis=1), -1)
        final = np.where(first >= 0, verdicts[np.arange(size), np.maximum(first, 0)], 0)
        return np.bincount(final, minlength=3), np.bincount(first + 1, minlength=n_rounds + 1)

    parts = run_blocks(block, runs, seed, workers)
    verdict_counts = sum(p[0] for p in parts)
    round_counts = sum(p[1] for p in parts)
    return {"runs": int(runs), "verdicts": verdict_counts, "first_round": round_counts}
