#!/usr/bin/env python3
"""
Basic functionality test for the backscatter link simulator
Runs one small experiment end to end: channel, coding, detection, theory, result files
"""

import os
import sys
import tempfile
from pathlib import Path

import numpy as np

# Add repo root to path
sys.path.append(str(Path(__file__).parent))

from src import analysis
from src.coding import diff_manchester_decode, diff_manchester_encode, manchester_decode, manchester_encode
from src.detectors import chip_energies, nocomc_detect_frame, secomc_detect_many, secomc_train_arrays
from src.montecarlo import ChannelSpec, ExperimentConfig, estimate_ber, sweep
from src.report_writer import RunManifest, table_to_csv, write_csv, write_manifest
from src.signal_model import AmbientSource, NoiseModel, rcd, receive_chips, sigma_sq, synthesize_channel_with_rcd


def test_single_frame_by_hand():
    """Encode, transmit and decode one frame without the Monte Carlo harness"""
    print("\n" + "=" * 80)
    print("📡 SINGLE FRAME WALK-THROUGH")
    print("=" * 80)

    rng = np.random.default_rng(1)
    ch = synthesize_channel_with_rcd(0.5)
    src = AmbientSource(kind="psk", ps=100.0)
    noise = NoiseModel(nw=1.0)
    n = 40
    print(f"✅ Channel: |h0|^2={ch.h0_sq:.3f}, |h1|^2={ch.h1_sq:.3f}, RCD={rcd(ch.h0, ch.h1):.3f}")

    bits = rng.integers(0, 2, 64)
    training = np.ones(2, dtype=np.int8)
    frame = manchester_encode(np.concatenate((training, bits)))
    assert manchester_decode(frame)[2:].tolist() == bits.tolist()
    za, zb = chip_energies(receive_chips(frame.chips, ch, src, noise, n, rng))
    state = secomc_train_arrays(za[:2], zb[:2], n)
    decided = secomc_detect_many(state, za[2:], zb[2:])
    errors = int(np.count_nonzero(decided != bits))
    print(f"✅ SeCoMC relation {state.relation.value}: {errors} errors in {bits.size} bits")
    assert state.relation.value == "sigma1_greater"
    assert errors <= 2

    frame = diff_manchester_encode(bits)
    assert diff_manchester_decode(frame).tolist() == bits.tolist()
    za, zb = chip_energies(receive_chips(frame.chips, ch, src, noise, n, rng))
    errors = int(np.count_nonzero(nocomc_detect_frame(za, zb) != bits))
    print(f"✅ NoCoMC: {errors} errors in {bits.size} bits")
    assert errors <= 4


def test_theory_snapshot():
    print("\n📐 CLOSED-FORM SNAPSHOT (N=20, RCD=0.5, 5 dB)")
    print("-" * 50)
    ch = synthesize_channel_with_rcd(0.5)
    gamma = 10 ** 0.5
    v = analysis.VarPair(sigma_sq(ch.h0, gamma, 1.0), sigma_sq(ch.h1, gamma, 1.0))
    values = {
        "SeCoMC exact": analysis.ber_secomc_gaussian_exact(v, 20),
        "SeCoMC approx": analysis.ber_secomc_gaussian_approx(ch.h0_sq, ch.h1_sq, gamma, 20),
        "SeCoMC floor": analysis.ber_secomc_gaussian_floor(ch.h0_sq, ch.h1_sq, 20),
        "NoCoMC exact": analysis.ber_nocomc_gaussian_exact(v, 20),
        "Baseline approx": analysis.ber_baseline_gaussian_approx(ch.h0_sq, ch.h1_sq, gamma, 20),
        "8-PSK SeCoMC approx": analysis.ber_secomc_deterministic_approx(ch.h0_sq, ch.h1_sq, gamma, 20),
    }
    for name, value in values.items():
        print(f"   {name:<22} {value:.4e}")
    assert values["SeCoMC exact"] < values["NoCoMC exact"]
    assert values["SeCoMC floor"] < values["SeCoMC approx"]
    assert values["8-PSK SeCoMC approx"] < values["SeCoMC approx"]


def test_small_experiment_and_files():
    print("\n🎲 SMALL MONTE CARLO RUN")
    print("-" * 50)
    cfg = ExperimentConfig.build(
        n=20, gamma=10 ** 0.5, channel=ChannelSpec(mode="fixed_rcd", rcd=0.5), blocks=300, seed=2024,
    )
    result = estimate_ber(cfg)
    for name, est in result.estimates.items():
        exact, approx, floor = result.analytic[name]
        print(f"   {name:<13} sim={est.ber:.4e} ±{est.half_width_95:.1e}  exact={exact:.4e}  approx={approx:.4e}")
        assert est.trials == 300 * 30
    print(f"📊 Training picked the wrong relation in {result.relation_error_rate:.2%} of blocks")

    table = sweep(cfg, "prior", [0.2, 0.5])
    text = table_to_csv(table)
    assert text.startswith("axis,detector,")
    assert len(text.splitlines()) == 1 + 2 * 4

    with tempfile.TemporaryDirectory() as tmp:
        csv_path = os.path.join(tmp, "prior.csv")
        manifest = RunManifest(
            settings={"n": "20", "channel_mode": "fixed_rcd", "rcd": "0.5", "blocks": "300"},
            seed=cfg.seed, axis="prior", values="0.2,0.5",
            csv_path=csv_path, manifest_path=os.path.join(tmp, "prior.manifest"),
        )
        write_manifest(manifest)
        write_csv(table, csv_path)
        assert Path(csv_path).read_text() == text
        print(f"✅ Wrote {csv_path} and its manifest")


if __name__ == "__main__":
    print("🚀 Starting Backscatter Simulator Functionality Tests")
    test_single_frame_by_hand()
    test_theory_snapshot()
    test_small_experiment_and_files()
    print("\n🎉 All basic functionality tests completed!")
