#!/usr/bin/env python3
"""
Tests for the SeCoMC, NoCoMC and threshold detectors, mostly on injected energies
"""

import sys
from pathlib import Path

import numpy as np
from numpy.testing import assert_allclose

sys.path.append(str(Path(__file__).parent))

from src.coding import diff_manchester_encode
from src.detectors import (
    BaselineState,
    DiffSign,
    EnergyPair,
    NoCoMCState,
    Relation,
    SeCoMCState,
    baseline_detect,
    baseline_detect_many,
    baseline_train,
    chip_energies,
    half_energies,
    nocomc_detect,
    nocomc_detect_frame,
    secomc_detect,
    secomc_detect_many,
    secomc_train,
    symbol_energies,
)
from src.errors import FramingError, ParameterError, TrainingError
from src.signal_model import AmbientSource, NoiseModel, receive_chips, synthesize_channel_with_rcd


def _raises(exc, fn, *args, **kwargs):
    try:
        fn(*args, **kwargs)
    except exc:
        return True
    return False


def test_half_energies():
    e = half_energies([1, 1j, 2, 0])
    assert e == EnergyPair(2.0, 4.0)
    assert _raises(FramingError, half_energies, [1, 2, 3])
    assert _raises(ParameterError, EnergyPair, -1.0, 0.0)


def test_chip_and_symbol_energies():
    rows = np.array([[1, 1], [2, 0], [0, 1j], [3, 0]])
    za, zb = chip_energies(rows)
    assert_allclose(za, [2.0, 1.0])
    assert_allclose(zb, [4.0, 9.0])
    assert_allclose(symbol_energies(rows), [2.0, 4.0, 1.0, 9.0])
    assert _raises(FramingError, chip_energies, rows[:3])


def test_secomc_training_picks_relation():
    # training symbols are bit 1: first half under h0, second under h1
    state = secomc_train([EnergyPair(20.0, 60.0), EnergyPair(24.0, 50.0)], n=10)
    assert state.relation == Relation.SIGMA1_GREATER
    assert_allclose(state.at, 2.2)
    assert_allclose(state.bt, 5.5)

    flipped = secomc_train([EnergyPair(60.0, 20.0)], n=10)
    assert flipped.relation == Relation.SIGMA0_GREATER
    assert _raises(TrainingError, secomc_train, [], 10)


def test_secomc_decisions():
    sigma1_greater = SeCoMCState.genie(1.0, 3.0)
    assert secomc_detect(sigma1_greater, EnergyPair(1.0, 5.0)) == 1
    assert secomc_detect(sigma1_greater, EnergyPair(5.0, 1.0)) == 0
    assert secomc_detect(sigma1_greater, EnergyPair(2.0, 2.0)) == 1

    sigma0_greater = SeCoMCState.genie(3.0, 1.0)
    assert secomc_detect(sigma0_greater, EnergyPair(5.0, 1.0)) == 1
    assert secomc_detect(sigma0_greater, EnergyPair(1.0, 5.0)) == 0
    assert secomc_detect(sigma0_greater, EnergyPair(2.0, 2.0)) == 0

    za = np.array([1.0, 5.0, 2.0])
    zb = np.array([5.0, 1.0, 2.0])
    assert secomc_detect_many(sigma1_greater, za, zb).tolist() == [1, 0, 1]
    assert secomc_detect_many(sigma0_greater, za, zb).tolist() == [0, 1, 0]


def test_secomc_state_validation():
    assert _raises(ParameterError, SeCoMCState, Relation.SIGMA0_GREATER, 1.0, 2.0)
    assert SeCoMCState.genie(2.0, 2.0).degenerate
    assert not SeCoMCState.genie(1.0, 2.0).degenerate


def test_nocomc_sign_rule():
    positive = NoCoMCState(DiffSign.POSITIVE)
    nonpositive = NoCoMCState(DiffSign.NONPOSITIVE)
    assert nocomc_detect(positive, EnergyPair(1.0, 3.0)) == (1, nonpositive)
    assert nocomc_detect(positive, EnergyPair(3.0, 1.0)) == (0, positive)
    assert nocomc_detect(nonpositive, EnergyPair(3.0, 1.0)) == (1, positive)
    assert nocomc_detect(nonpositive, EnergyPair(1.0, 3.0)) == (0, nonpositive)
    # an exact tie never produces a negative product
    assert nocomc_detect(positive, EnergyPair(2.0, 2.0)) == (0, nonpositive)
    assert NoCoMCState.from_preamble(EnergyPair(2.0, 2.0)) == nonpositive


def test_nocomc_frame_matches_stepwise():
    rng = np.random.default_rng(4)
    za = rng.exponential(1.0, 50)
    zb = rng.exponential(1.0, 50)
    za[7] = zb[7]
    state = NoCoMCState.from_preamble(EnergyPair(za[0], zb[0]))
    stepwise = []
    for a, b in zip(za[1:], zb[1:]):
        bit, state = nocomc_detect(state, EnergyPair(a, b))
        stepwise.append(bit)
    assert nocomc_detect_frame(za, zb).tolist() == stepwise
    assert _raises(FramingError, nocomc_detect_frame, [], [])


def test_nocomc_decodes_clean_energies_for_either_channel_order():
    bits = [1, 0, 1, 1, 0, 0, 1]
    chips = np.asarray(diff_manchester_encode(bits).chips, dtype=float)
    for low, high in ((1.0, 4.0), (4.0, 1.0)):
        energy = np.where(chips == 1, high, low)
        decided = nocomc_detect_frame(energy[0::2], energy[1::2])
        assert decided.tolist() == bits


def test_baseline_midpoint_threshold():
    state = baseline_train([10.0, 12.0], [30.0, 32.0])
    assert_allclose(state.threshold, 21.0)
    assert state.one_is_upper
    assert baseline_detect(state, 25.0) == 1
    assert baseline_detect(state, 15.0) == 0
    assert baseline_detect_many(state, [5.0, 40.0]).tolist() == [0, 1]

    inverted = baseline_train([30.0], [10.0])
    assert not inverted.one_is_upper
    assert baseline_detect(inverted, 12.0) == 1
    assert baseline_detect_many(inverted, [12.0, 29.0]).tolist() == [1, 0]


def test_baseline_blind_threshold_follows_prior():
    pilots0, pilots1 = [10.0], [30.0]
    mostly_zeros = baseline_train(pilots0, pilots1, [10.0] * 8 + [30.0] * 2)
    assert_allclose(mostly_zeros.threshold, (10.0 * 9 + 30.0 * 3) / 12)
    balanced = baseline_train(pilots0, pilots1, [10.0] * 5 + [30.0] * 5)
    assert_allclose(balanced.threshold, 20.0)
    clamped = baseline_train(pilots0, pilots1, [100.0] * 10)
    assert_allclose(clamped.threshold, 30.0)


def test_baseline_state_validation():
    assert _raises(TrainingError, baseline_train, [], [1.0])
    assert _raises(ParameterError, BaselineState, 50.0, 10.0, 30.0)
    assert _raises(ParameterError, BaselineState, 5.0, -1.0, 30.0)

def test_decisions_survive_sample_scaling():
    rng = np.random.default_rng(12)
    samples = rng.standard_normal((40, 8)) + 1j * rng.standard_normal((40, 8))
    za, zb = chip_energies(samples)
    state = SeCoMCState.genie(1.0, 3.0)
    flipped = SeCoMCState.genie(3.0, 1.0)
    for c in (0.25, 2.0, 1024.0, 3.7):
        sa, sb = chip_energies(c * samples)
        assert secomc_detect_many(state, sa, sb).tolist() == secomc_detect_many(state, za, zb).tolist()
        assert secomc_detect_many(flipped, sa, sb).tolist() == secomc_detect_many(flipped, za, zb).tolist()
        assert nocomc_detect_frame(sa, sb).tolist() == nocomc_detect_frame(za, zb).tolist()
        assert [secomc_detect(state, EnergyPair(a, b)) for a, b in zip(sa, sb)] == \
            secomc_detect_many(state, za, zb).tolist()

    # the threshold detector is scale free only when pilots and data scale together
    energy = symbol_energies(samples)
    trained = baseline_train(energy[:4], energy[4:8], energy[8:])
    for c in (0.5, 8.0):
        scaled = symbol_energies(c * samples)
        rescaled = baseline_train(scaled[:4], scaled[4:8], scaled[8:])
        assert baseline_detect_many(rescaled, scaled[8:]).tolist() == \
            baseline_detect_many(trained, energy[8:]).tolist()


def test_genie_secomc_follows_the_half_carrying_h1():
    # bit 1 is the pair (0, 1): the first half sees h0, the second h1
    rng = np.random.default_rng(3)
    za = rng.integers(0, 25, 100_000).astype(float)
    zb = rng.integers(0, 25, 100_000).astype(float)
    for sigma0_sq, sigma1_sq in ((1.0, 4.0), (4.0, 1.0), (2.0, 2.5), (0.3, 0.2)):
        state = SeCoMCState.genie(sigma0_sq, sigma1_sq)
        if sigma1_sq > sigma0_sq:
            expected = zb >= za
        else:
            expected = za > zb
        decided = secomc_detect_many(state, za, zb)
        assert np.array_equal(decided, expected.astype(np.int8)), (sigma0_sq, sigma1_sq)
        picks = rng.integers(0, za.size, 500)
        assert [secomc_detect(state, EnergyPair(za[i], zb[i])) for i in picks] == decided[picks].tolist()


def test_nocomc_decodes_every_clean_payload_end_to_end():
    ch = synthesize_channel_with_rcd(0.5)
    src = AmbientSource(kind="psk", ps=1.0)
    quiet = NoiseModel(nw=1e-12)
    rng = np.random.default_rng(10)
    for value in range(2 ** 10):
        bits = [(value >> i) & 1 for i in range(10)]
        received = receive_chips(diff_manchester_encode(bits).chips, ch, src, quiet, 4, rng)
        za, zb = chip_energies(received)
        assert nocomc_detect_frame(za, zb).tolist() == bits, bits


def test_baseline_tie_decides_zero():
    state = baseline_train([2.0], [4.0])
    assert_allclose(state.threshold, 3.0)
    assert baseline_detect(state, 3.5) == 1
    assert baseline_detect(state, 2.5) == 0
    assert baseline_detect(state, 3.0) == 0

    inverted = baseline_train([4.0], [2.0])
    assert baseline_detect(inverted, 3.0) == 0
    assert baseline_detect_many(state, [3.0, 3.0]).tolist() == [0, 0]
    assert baseline_detect_many(inverted, [3.0]).tolist() == [0]



if __name__ == "__main__":
    tests = [(name, fn) for name, fn in list(globals().items()) if name.startswith("test_") and callable(fn)]
    failed = 0
    for name, fn in tests:
        try:
            fn()
            print(f"✅ {name}")
        except AssertionError as e:
            failed += 1
            print(f"❌ {name}: {e}")
    print(f"\n{len(tests) - failed}/{len(tests)} passed")
    sys.exit(1 if failed else 0)
