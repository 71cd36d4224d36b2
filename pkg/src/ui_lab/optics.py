"""Coherent-state amplitudes evolving through beam-splitter networks.

A product of coherent states stays a product under passive linear optics, so
the full state of ``n`` modes is just the vector of their complex amplitudes
and a network is an ``n x n`` unitary acting on that vector.

The two-mode splitter convention is fixed throughout the package::

    (a, b) -> (sqrt(t) a + sqrt(1 - t) b,  -sqrt(1 - t) a + sqrt(t) b)

where ``a`` sits on the first listed mode and ``b`` on the second. Mode order
therefore matters and is always recorded explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import IndexOutOfRange, InvalidCopyCount, InvalidTransmittivity

__all__ = [
    "ModeRegister",
    "BeamSplitterSpec",
    "Network",
    "apply_beamsplitter",
    "apply_network",
    "build_concentrator",
    "compose_network",
    "check_unitarity",
    "evolve",
]


def _as_amp_array(values) -> np.ndarray:
    arr = np.array(values, dtype=complex).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ModeRegister:
    """Complex amplitudes of a set of modes, optionally labelled."""

    amps: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        amps = _as_amp_array(self.amps)
        if amps.size < 1:
            raise IndexOutOfRange("a register needs at least one mode")
        object.__setattr__(self, "amps", amps)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != amps.size:
                raise IndexOutOfRange(
                    f"{len(labels)} labels given for {amps.size} modes")
            if len(set(labels)) != len(labels):
                raise IndexOutOfRange("mode labels must be unique")
            object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.amps.size

    def __getitem__(self, key):
        if isinstance(key, str):
            return self.amps[self.index(key)]
        return self.amps[key]

    def index(self, label: str) -> int:
        if self.labels is None or label not in self.labels:
            raise IndexOutOfRange(f"no mode labelled {label!r}")
        return self.labels.index(label)

    def replace(self, amps) -> "ModeRegister":
        return ModeRegister(amps, self.labels)

    def energy(self) -> float:
        """Total mean photon number, sum of |amp|^2."""
        return float(np.sum(np.abs(self.amps) ** 2))

    @classmethod
    def vacuum(cls, n: int, labels=None) -> "ModeRegister":
        return cls(np.zeros(n, dtype=complex), labels)


@dataclass(frozen=True)
class BeamSplitterSpec:
    """A beam splitter of transmittivity ``t`` acting on ``modes = (i, j)``."""

    t: float
    modes: tuple[int, int]

    def __post_init__(self):
        t = float(self.t)
        if not (0.0 <= t <= 1.0) or math.isnan(t):
            raise InvalidTransmittivity(f"transmittivity {t!r} not in [0, 1]")
        i, j = (int(m) for m in self.modes)
        if i == j:
            raise IndexOutOfRange(f"beam splitter needs two distinct modes, got {i}")
        if i < 0 or j < 0:
            raise IndexOutOfRange(f"negative mode index in {(i, j)}")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "modes", (i, j))

    @property
    def r(self) -> float:
        return 1.0 - self.t

    def block(self) -> np.ndarray:
        st, sr = math.sqrt(self.t), math.sqrt(1.0 - self.t)
        return np.array([[st, sr], [-sr, st]])


@dataclass(frozen=True)
class Network:
    """Ordered list of beam splitters on ``mode_count`` modes."""

    mode_count: int
    elements: tuple[BeamSplitterSpec, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.mode_count < 1:
            raise IndexOutOfRange("a network needs at least one mode")
        elements = tuple(self.elements)
        for bs in elements:
            if max(bs.modes) >= self.mode_count:
                raise IndexOutOfRange(
                    f"splitter on modes {bs.modes} outside a {self.mode_count}-mode network")
        object.__setattr__(self, "elements", elements)

    def __len__(self):
        return len(self.elements)

    def then(self, other: "Network") -> "Network":
        """This network followed by ``other`` (same mode count)."""
        if other.mode_count != self.mode_count:
            raise IndexOutOfRange("cannot chain networks of different size")
        return Network(self.mode_count, self.elements + other.elements)

    def embed(self, mode_map: Sequence[int], mode_count: int) -> "Network":
        """Relabel mode ``k`` of this network as ``mode_map[k]`` in a larger one."""
        if len(mode_map) != self.mode_count:
            raise IndexOutOfRange("mode_map must cover every mode of the network")
        return Network(mode_count, tuple(
            BeamSplitterSpec(bs.t, (mode_map[bs.modes[0]], mode_map[bs.modes[1]]))
            for bs in self.elements))

    def append(self, t: float, modes: tuple[int, int]) -> "Network":
        return Network(self.mode_count, self.elements + (BeamSplitterSpec(t, modes),))


def apply_beamsplitter(reg: ModeRegister, bs: BeamSplitterSpec) -> ModeRegister:
    """Apply one splitter; all modes other than ``bs.modes`` are untouched."""
    i, j = bs.modes
    if max(i, j) >= len(reg):
        raise IndexOutOfRange(f"modes {bs.modes} outside a {len(reg)}-mode register")
    st, sr = math.sqrt(bs.t), math.sqrt(1.0 - bs.t)
    a, b = reg.amps[i], reg.amps[j]
    out = reg.amps.copy()
    out[i] = st * a + sr * b
    out[j] = -sr * a + st * b
    return reg.replace(out)


def apply_network(reg: ModeRegister, net: Network) -> ModeRegister:
    """Sequentially apply every element of ``net``."""
    if len(reg) != net.mode_count:
        raise IndexOutOfRange(
            f"{len(reg)}-mode register fed into a {net.mode_count}-mode network")
    for bs in net.elements:
        reg = apply_beamsplitter(reg, bs)
    return reg


def compose_network(net: Network) -> np.ndarray:
    """Unitary amplitude-space matrix of ``net`` (first element acts first)."""
    u = np.eye(net.mode_count)
    for bs in net.elements:
        i, j = bs.modes
        rows = u[[i, j], :]
        u[[i, j], :] = bs.block() @ rows
    return u.astype(complex)


def evolve(u: np.ndarray, amps: np.ndarray) -> np.ndarray:
    """Apply a composed matrix to one register (1-D) or a batch (rows)."""
    amps = np.asarray(amps, dtype=complex)
    return amps @ u.T


def check_unitarity(u, tol: float | None = None) -> float:
    """Largest entry of ``|U^dagger U - I|``.

    ``tol`` is accepted for call-site symmetry; comparing against it is the
    caller's job.
    """
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise IndexOutOfRange(f"expected a square matrix, got shape {u.shape}")
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def build_concentrator(k: int) -> Network:
    """Network merging ``k`` equal coherent amplitudes into mode 0.

    Element ``j`` (1-based) merges the accumulated mode with copy ``j``
    using ``t = j / (j + 1)``, so ``sqrt(j) b`` and ``b`` combine into
    ``sqrt(j + 1) b`` and copy ``j`` is left in vacuum.
    """
    if int(k) != k or k < 1:
        raise InvalidCopyCount(f"need at least one copy, got {k!r}")
    k = int(k)
    return Network(k, tuple(BeamSplitterSpec(j / (j + 1), (0, j)) for j in range(1, k)))
