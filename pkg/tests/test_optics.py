import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ui_lab.errors import IndexOutOfRange, InvalidCopyCount, InvalidTransmittivity
from ui_lab.optics import (BeamSplitterSpec, ModeRegister, Network, apply_beamsplitter,
                           apply_network, build_concentrator, check_unitarity,
                           compose_network, evolve)

finite = st.floats(-5, 5, allow_nan=False)
amps = st.builds(complex, finite, finite)


def test_splitter_convention():
    out = apply_beamsplitter(ModeRegister([1.0, 0.0]), BeamSplitterSpec(0.25, (0, 1)))
    assert out.amps[0] == pytest.approx(0.5)
    assert out.amps[1] == pytest.approx(-math.sqrt(0.75))


def test_balanced_splitter_on_equal_inputs():
    out = apply_beamsplitter(ModeRegister([1.0, 1.0]), BeamSplitterSpec(0.5, (0, 1)))
    assert out.amps[0] == pytest.approx(math.sqrt(2))
    assert abs(out.amps[1]) < 1e-15


def test_untouched_modes_are_kept():
    reg = ModeRegister([1, 2j, 3])
    out = apply_beamsplitter(reg, BeamSplitterSpec(0.3, (0, 2)))
    assert out.amps[1] == 2j


@pytest.mark.parametrize("t", [-0.1, 1.1, float("nan")])
def test_bad_transmittivity(t):
    with pytest.raises(InvalidTransmittivity):
        BeamSplitterSpec(t, (0, 1))


def test_bad_modes():
    with pytest.raises(IndexOutOfRange):
        BeamSplitterSpec(0.5, (1, 1))
    with pytest.raises(IndexOutOfRange):
        Network(2, (BeamSplitterSpec(0.5, (0, 2)),))
    with pytest.raises(IndexOutOfRange):
        apply_network(ModeRegister([1, 2, 3]), Network(2))


def test_register_labels():
    reg = ModeRegister([1, 2], ("a", "b"))
    assert reg["b"] == 2
    with pytest.raises(IndexOutOfRange):
        reg["c"]
    with pytest.raises(IndexOutOfRange):
        ModeRegister([1, 2], ("a", "a"))
    assert reg.amps.flags.writeable is False


@pytest.mark.parametrize("k", [1, 2, 3, 7])
def test_concentrator_merges_copies(k):
    b = 0.3 - 1.2j
    out = apply_network(ModeRegister([b] * k), build_concentrator(k))
    assert out.amps[0] == pytest.approx(math.sqrt(k) * b, abs=1e-14)
    assert np.max(np.abs(out.amps[1:]), initial=0) < 1e-14


def test_concentrator_rejects_zero():
    with pytest.raises(InvalidCopyCount):
        build_concentrator(0)


def test_embed_relabels():
    net = build_concentrator(2).embed([3, 1], 4)
    assert net.elements[0].modes == (3, 1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1), st.integers(0, 4), st.integers(0, 4)),
                max_size=12), st.lists(amps, min_size=5, max_size=5))
def test_composed_matrix_matches_stepwise_and_is_unitary(specs, values):
    net = Network(5)
    for t, i, j in specs:
        if i != j:
            net = net.append(t, (i, j))
    u = compose_network(net)
    assert check_unitarity(u) < 1e-12
    reg = ModeRegister(values)
    stepwise = apply_network(reg, net).amps
    assert np.allclose(evolve(u, reg.amps), stepwise, atol=1e-12)
    # passive optics conserve total photon number
    assert abs(np.sum(np.abs(stepwise) ** 2) - reg.energy()) < 1e-9 * max(1.0, reg.energy())


def test_evolve_batches_rows():
    u = compose_network(build_concentrator(3))
    batch = np.array([[1, 1, 1], [2j, 2j, 2j]])
    out = evolve(u, batch)
    assert out.shape == (2, 3)
    assert out[1, 0] == pytest.approx(2j * math.sqrt(3))


def test_then_requires_same_size():
    with pytest.raises(IndexOutOfRange):
        Network(2).then(Network(3))
