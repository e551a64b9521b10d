#!/usr/bin/env python3
"""
Tests for channel, source and noise models
"""

import sys
import math
from pathlib import Path

import numpy as np
from numpy.testing import assert_allclose

sys.path.append(str(Path(__file__).parent))

from src.errors import DomainError, ParameterError
from src.signal_model import (
    AmbientSource,
    ChannelState,
    LinkParams,
    NoiseModel,
    RcdBranch,
    SourceKind,
    draw_channel,
    rcd,
    receive_chip,
    receive_chips,
    sigma_sq,
    synthesize_channel_with_rcd,
)


def _raises(exc, fn, *args, **kwargs):
    try:
        fn(*args, **kwargs)
    except exc:
        return True
    return False


def test_effective_channels():
    ch = ChannelState(h_st=1j, h_sr=1.0, h_tr=2.0, eta=0.5)
    assert ch.h0 == 1.0
    assert ch.h1 == 1.0 + 1.0j
    assert_allclose(ch.h0_sq, 1.0)
    assert_allclose(ch.h1_sq, 2.0)


def test_eta_out_of_range():
    assert _raises(ParameterError, ChannelState, 1.0, 1.0, 1.0, 0.0)
    assert _raises(ParameterError, ChannelState, 1.0, 1.0, 1.0, 1.5)


def test_rcd_values():
    assert rcd(1.0, 1.0) == 0.0
    assert rcd(1.0, -1.0) == 0.0
    assert_allclose(rcd(1.0, 0.0), 1.0)
    assert_allclose(rcd(1.0, math.sqrt(3.0)), 2.0 / math.sqrt(10.0))
    assert_allclose(rcd(2.0, 1j), rcd(1j, 2.0))
    assert _raises(DomainError, rcd, 0.0, 0.0)


def test_rcd_synthesis_round_trip():
    for value in (0.0, 0.05, 0.3, 0.5, 0.9, 0.999):
        for branch in RcdBranch:
            ch = synthesize_channel_with_rcd(value, branch)
            assert_allclose(ch.h0_sq, 1.0)
            assert_allclose(rcd(ch.h0, ch.h1), value, atol=1e-12)
            if branch == RcdBranch.H1_STRONGER:
                assert ch.h1_sq >= 1.0
            else:
                assert ch.h1_sq <= 1.0


def test_rcd_synthesis_limits():
    ch = synthesize_channel_with_rcd(1.0, RcdBranch.H0_STRONGER)
    assert_allclose(ch.h1_sq, 0.0, atol=1e-24)
    assert _raises(ParameterError, synthesize_channel_with_rcd, 1.0, RcdBranch.H1_STRONGER)
    assert _raises(ParameterError, synthesize_channel_with_rcd, -0.1)
    assert _raises(ParameterError, synthesize_channel_with_rcd, 1.2, RcdBranch.H0_STRONGER)


def test_draw_channel_is_seeded():
    a = draw_channel(np.random.default_rng(5))
    b = draw_channel(np.random.default_rng(5))
    assert a == b
    assert a.eta == 0.5

    fixed = draw_channel(None, fixed=(1.0, 0.5j, 2.0, 0.25))
    assert fixed.h_sr == 0.5j
    assert_allclose(fixed.h1, 0.5j + 0.5)


def test_rayleigh_draw_statistics():
    rng = np.random.default_rng(1)
    draws = [draw_channel(rng) for _ in range(100_000)]
    assert_allclose(np.mean([abs(c.h_st) ** 2 for c in draws]), 1.0, rtol=0.02)
    assert_allclose(np.mean([abs(c.h_sr) ** 2 for c in draws]), 1.0, rtol=0.02)
    assert_allclose(np.mean([abs(c.h_tr) ** 2 for c in draws]), 10.0, rtol=0.02)
    assert {c.eta for c in draws[:100]} == {0.5}


def test_draw_channel_uses_given_eta():
    a = draw_channel(np.random.default_rng(5), eta=0.1)
    b = draw_channel(np.random.default_rng(5), eta=0.9)
    assert a.eta == 0.1 and b.eta == 0.9
    assert a.h0 == b.h0
    assert_allclose(a.h1 - a.h0, (b.h1 - b.h0) / 9)
    assert _raises(ParameterError, draw_channel, np.random.default_rng(5), eta=0.0)


def test_sources():
    rng = np.random.default_rng(2)
    psk = AmbientSource(kind="psk", ps=3.0, modulation_order=8)
    assert psk.kind == SourceKind.CONSTANT_MODULUS
    s = psk.sample(rng, 1000)
    assert_allclose(np.abs(s) ** 2, 3.0)

    gauss = AmbientSource(kind=SourceKind.COMPLEX_GAUSSIAN, ps=2.0)
    g = gauss.sample(rng, 200000)
    assert_allclose(np.mean(np.abs(g) ** 2), 2.0, rtol=0.02)
    assert abs(np.mean(g)) < 0.02

    w = NoiseModel(nw=0.5).sample(rng, 200000)
    assert_allclose(np.mean(np.abs(w) ** 2), 0.5, rtol=0.02)


def test_invalid_models():
    assert _raises(ParameterError, AmbientSource, "gaussian", 0.0)
    assert _raises(ParameterError, AmbientSource, "psk", 1.0, 1)
    assert _raises(ValueError, AmbientSource, "chirp")
    assert _raises(ParameterError, NoiseModel, -1.0)
    assert _raises(ParameterError, LinkParams, 0, 1.0)
    assert _raises(ParameterError, LinkParams, 10, 0.0)
    assert _raises(ParameterError, LinkParams, 10, 1.0, 1.5)
    assert _raises(ParameterError, sigma_sq, 1.0, 0.0, 1.0)


def test_sigma_sq():
    assert_allclose(sigma_sq(1 + 1j, 3.0, 0.5), 6.5)


def test_receive_chips_uses_hypothesis_gain():
    ch = ChannelState(h_st=1.0, h_sr=1.0, h_tr=2.0, eta=0.5)
    src = AmbientSource(kind="psk", ps=1.0)
    quiet = NoiseModel(nw=1e-12)
    y = receive_chips([0, 1, 1, 0], ch, src, quiet, 16, np.random.default_rng(3))
    assert y.shape == (4, 16)
    energy = np.sum(np.abs(y) ** 2, axis=1)
    assert_allclose(energy, [16.0, 64.0, 64.0, 16.0], rtol=1e-5)


def test_receive_chip():
    ch = synthesize_channel_with_rcd(0.5)
    y = receive_chip(1, ch, AmbientSource(), NoiseModel(), 10, np.random.default_rng(0))
    assert y.shape == (10,)
    assert _raises(ParameterError, receive_chip, 2, ch, AmbientSource(), NoiseModel(), 10, np.random.default_rng(0))


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
