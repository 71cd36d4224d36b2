"""Ideal photodetection on coherent modes and the Monte Carlo shot engine.

Randomness comes from counter-based Philox streams keyed by ``(seed,
stream_id)``. Large shot counts are cut into fixed-size blocks and block ``b``
always draws from stream ``(seed, b)``, so results do not depend on how many
workers evaluate the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import IndexOutOfRange, InvalidShotCount
from .optics import ModeRegister, Network, compose_network, evolve

__all__ = [
    "BLOCK_SIZE",
    "DetectorBank",
    "RngStream",
    "p_click",
    "poisson_inversion",
    "sample_batch",
    "sample_counts",
    "run_blocks",
    "run_shots",
]

BLOCK_SIZE = 1 << 16
# inversion is exact and cheap below this mean; above it fall back to numpy
_INVERSION_MAX_MEAN = 30.0


class RngStream:
    """Reproducible random stream identified by ``(seed, stream_id)``.

    Two streams built from the same pair produce identical sequences; streams
    with different ids are statistically independent.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.stream_id = int(stream_id) & 0xFFFFFFFFFFFFFFFF
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self.gen = np.random.Generator(np.random.Philox(ss))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def uniform(self, size=None):
        return self.gen.random(size)

    def normal(self, scale=1.0, size=None):
        return self.gen.normal(0.0, scale, size)


@dataclass(frozen=True)
class DetectorBank:
    """Photodetectors on ``monitored_modes``.

    With ``resolve_numbers=False`` a pattern entry is 1 for "at least one
    photon" and 0 otherwise.
    """

    monitored_modes: tuple[int, ...]
    resolve_numbers: bool = False

    def __post_init__(self):
        modes = tuple(int(m) for m in self.monitored_modes)
        if len(set(modes)) != len(modes):
            raise IndexOutOfRange(f"monitored modes must be distinct: {modes}")
        if any(m < 0 for m in modes):
            raise IndexOutOfRange(f"negative monitored mode in {modes}")
        object.__setattr__(self, "monitored_modes", modes)

    def __len__(self):
        return len(self.monitored_modes)

    def validate(self, n_modes: int):
        if self.monitored_modes and max(self.monitored_modes) >= n_modes:
            raise IndexOutOfRange(
                f"detector on mode {max(self.monitored_modes)} of a {n_modes}-mode register")


def p_click(amp) -> float:
    """Probability that an ideal detector sees at least one photon, 1 - exp(-|amp|^2)."""
    return -math.expm1(-abs(complex(amp)) ** 2)


def poisson_inversion(u: np.ndarray, mean: np.ndarray) -> np.ndarray:
    """Poisson counts by sequential CDF inversion of the uniforms ``u``.

    ``u`` and ``mean`` broadcast together. ``count == 0`` exactly when
    ``u < exp(-mean)``, which is also the click-only threshold.
    """
    u, mean = np.broadcast_arrays(np.asarray(u, float), np.asarray(mean, float))
    p = np.exp(-mean)
    cdf = p.copy()
    k = np.zeros(u.shape, dtype=np.int64)
    active = u >= cdf
    step = 0
    while active.any():
        step += 1
        p = np.where(active, p * mean / step, p)
        cdf = np.where(active, cdf + p, cdf)
        k += active
        # p underflows to 0 once far in the tail; stop instead of spinning
        active = active & (u >= cdf) & (p > 0)
    return k


def sample_batch(amps: np.ndarray, bank: DetectorBank, rng: RngStream) -> np.ndarray:
    """Draw one pattern per row of evolved amplitudes ``amps`` (shots x modes)."""
    amps = np.atleast_2d(np.asarray(amps, dtype=complex))
    bank.validate(amps.shape[1])
    if not bank.monitored_modes:
        return np.zeros((amps.shape[0], 0), dtype=np.int64)
    mean = np.abs(amps[:, list(bank.monitored_modes)]) ** 2
    u = rng.uniform(mean.shape)
    if not bank.resolve_numbers:
        return (u >= np.exp(-mean)).astype(np.int64)
    counts = np.empty(mean.shape, dtype=np.int64)
    small = mean < _INVERSION_MAX_MEAN
    counts[small] = poisson_inversion(u[small], mean[small])
    if (~small).any():
        counts[~small] = rng.gen.poisson(mean[~small])
    return counts


def sample_counts(reg: ModeRegister, bank: DetectorBank, rng: RngStream) -> tuple[int, ...]:
    """One detection event on ``reg``; returns the per-detector counts."""
    row = sample_batch(reg.amps[None, :], bank, rng)[0]
    return tuple(int(c) for c in row)


def _blocks(shots: int, block: int):
    start = 0
    index = 0
    while start < shots:
        size = min(block, shots - start)
        yield index, size
        start += size
        index += 1


def run_blocks(fn: Callable[[int, RngStream], object], shots: int, seed: int,
               workers: int | None = None, block: int = BLOCK_SIZE) -> list:
    """Evaluate ``fn(size, RngStream(seed, b))`` for each shot block ``b``.

    Results come back in block order whatever ``workers`` is.
    """
    if int(shots) != shots or shots < 1:
        raise InvalidShotCount(f"shots must be a positive integer, got {shots!r}")
    jobs = list(_blocks(int(shots), block))
    if workers is None or workers <= 1 or len(jobs) == 1:
        return [fn(size, RngStream(seed, b)) for b, size in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(job[1], RngStream(seed, job[0])), jobs))


def histogram(patterns: np.ndarray) -> dict[tuple[int, ...], int]:
    if patterns.shape[0] == 0:
        return {}
    rows, counts = np.unique(patterns, axis=0, return_counts=True)
    return {tuple(int(v) for v in r): int(c) for r, c in zip(rows, counts)}


def merge_histograms(parts) -> dict[tuple[int, ...], int]:
    total: dict[tuple[int, ...], int] = {}
    for part in parts:
        for key, count in part.items():
            total[key] = total.get(key, 0) + count
    return dict(sorted(total.items()))


def run_shots(net: Network, input: ModeRegister, bank: DetectorBank, shots: int,
              seed: int, workers: int | None = None) -> dict[tuple[int, ...], int]:
    """Evolve ``input`` through ``net`` once and histogram ``shots`` detections."""
    if len(input) != net.mode_count:
        raise IndexOutOfRange(
            f"{len(input)}-mode register fed into a {net.mode_count}-mode network")
    out = evolve(compose_network(net), input.amps)
    bank.validate(out.size)

    def block(size, rng):
        return histogram(sample_batch(np.broadcast_to(out, (size, out.size)), bank, rng))

    return merge_histograms(run_blocks(block, shots, seed, workers))
