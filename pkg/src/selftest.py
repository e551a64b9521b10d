"""Fast acceptance checks run by `backscatter-sim selftest`"""

import math
import logging
import itertools
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np
from scipy import special

from . import analysis
from .coding import (
    diff_manchester_decode,
    diff_manchester_encode,
    manchester_decode,
    manchester_encode,
)
from .config import MANCHESTER_ONE, MANCHESTER_ZERO
from .montecarlo import ChannelSpec, ExperimentConfig, estimate_ber
from .signal_model import RcdBranch, rcd, synthesize_channel_with_rcd

logger = logging.getLogger(__name__)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def hypergeometric_series_ber(v: analysis.VarPair, n: int, terms: int = 2000) -> float:
    """Gamma-ratio times 2F1 BER expression summed as a truncated series.

    2F1(N, 2N; N+1; -r) is first mapped by the Pfaff transformation to
    (1 + r)^(-2N) 2F1(1, 2N; N+1; r / (1 + r)), whose argument is at most 1/2.
    """
    r = v.sigma_n_sq / v.sigma_m_sq
    w = r / (1.0 + r)
    term, total = 1.0, 1.0
    for k in range(terms):
        term *= (2 * n + k) / (n + 1 + k) * w
        total += term
        if term < 1e-18 * total:
            break
    log_coeff = (
        math.lgamma(2 * n) - math.log(n) - 2 * math.lgamma(n)
        + n * math.log(r) - 2 * n * math.log1p(r)
    )
    return math.exp(log_coeff) * total


def _check_erfc_kernel() -> Tuple[bool, str]:
    reference = {0.0: 0.5, 1.0: 0.157299207050285130658779364917 / 2, 3.0: 2.20904969985854413727761295823e-05 / 2}
    worst = max(abs(analysis.half_erfc(x) - ref) / ref for x, ref in reference.items())
    return worst < 1e-12, f"max relative error {worst:.2e}"


def _check_incomplete_beta() -> Tuple[bool, str]:
    errors = [abs(analysis.reg_inc_beta(0.5, n, n) - 0.5) for n in (1, 5, 50)]
    errors += [abs(analysis.reg_inc_beta(x, 1, 1) - x) for x in (0.1, 0.37, 0.9)]
    errors.append(abs(analysis.reg_inc_beta(1 / 3, 2, 2) - 7 / 27))
    worst = max(errors)
    return worst < 1e-12, f"max absolute error {worst:.2e}"


def _check_exact_vs_hypergeometric() -> Tuple[bool, str]:
    worst = 0.0
    for n in range(1, 11):
        for ratio in (1.0, 1.5, 2.0, 4.0):
            v = analysis.VarPair(1.0, ratio)
            worst = max(worst, abs(analysis.ber_secomc_gaussian_exact(v, n) - hypergeometric_series_ber(v, n)))
    return worst < 1e-8, f"max absolute gap {worst:.2e} over N <= 10"


def _check_nocomc_erf_form() -> Tuple[bool, str]:
    rng = np.random.default_rng(7)
    x = rng.uniform(0.0, 4.0, 50)
    p = analysis.half_erfc(x)
    gap = np.max(np.abs(analysis.ber_nocomc_from_secomc(p) - analysis.nocomc_erf_form(x)))
    return gap < 1e-12, f"max gap {gap:.2e}"


def _check_floor_limit() -> Tuple[bool, str]:
    approx = analysis.ber_secomc_gaussian_approx(1.0, 2.215, 1e12, 20)
    floor = analysis.ber_secomc_gaussian_floor(1.0, 2.215, 20)
    expected = 0.5 * special.erfc(math.sqrt(20 / 2) * rcd(1.0, math.sqrt(2.215)))
    ok = abs(approx - floor) < 1e-6 * floor and abs(floor - expected) < 1e-12
    return ok, f"approx={approx:.6e} floor={floor:.6e}"


def _check_ordering() -> Tuple[bool, str]:
    rng = np.random.default_rng(11)
    h0 = rng.exponential(1.0, 200)
    h1 = rng.exponential(5.0, 200)
    gamma = 10 ** (rng.uniform(-1, 3, 200))
    base = analysis.ber_baseline_gaussian_approx(h0, h1, gamma, 20)
    se = analysis.ber_secomc_gaussian_approx(h0, h1, gamma, 20)
    no = analysis.ber_nocomc_gaussian_approx(h0, h1, gamma, 20)
    violations = int(np.count_nonzero(base > se * (1 + 1e-12)) + np.count_nonzero(se > no * (1 + 1e-12)))
    return violations == 0, f"{violations} ordering violations over 200 channels"


def _check_round_trips() -> Tuple[bool, str]:
    count = 0
    for length in range(0, 9):
        for bits in itertools.product((0, 1), repeat=length):
            bits = list(bits)
            if manchester_decode(manchester_encode(bits)).tolist() != bits:
                return False, f"Manchester round trip failed for {bits}"
            for ref in (MANCHESTER_ZERO, MANCHESTER_ONE):
                if diff_manchester_decode(diff_manchester_encode(bits, ref)).tolist() != bits:
                    return False, f"differential round trip failed for {bits}, ref {ref}"
            count += 1
    return True, f"{count} payloads"


def _check_rcd_synthesis() -> Tuple[bool, str]:
    worst = 0.0
    for value in np.linspace(0.0, 0.99, 34):
        for branch in RcdBranch:
            ch = synthesize_channel_with_rcd(float(value), branch)
            worst = max(worst, abs(rcd(ch.h0, ch.h1) - value))
    return worst < 1e-10, f"max round-trip error {worst:.2e}"


def _check_energy_draws() -> Tuple[bool, str]:
    rng = np.random.default_rng(3)
    draws = 200_000
    n, s0, s1 = 5, 1.0, 2.0
    z0 = s0 * rng.gamma(n, size=draws)
    z1 = s1 * rng.gamma(n, size=draws)
    p_hat = np.mean(z0 > z1)
    p = analysis.ber_secomc_gaussian_exact(analysis.VarPair(s0, s1), n)
    se = math.sqrt(p * (1 - p) / draws)
    return abs(p_hat - p) < 3 * se, f"simulated {p_hat:.5f} vs exact {p:.5f}"


def _simulate_fixed(source: str, gamma_db: float, blocks: int, detectors, seed: int = 1):
    cfg = ExperimentConfig.build(
        n=20, gamma=10 ** (gamma_db / 10), source_kind=source, k=30, t=2,
        channel=ChannelSpec(mode="fixed_rcd", rcd=0.5), detectors=detectors,
        blocks=blocks, seed=seed,
    )
    return estimate_ber(cfg)


def _check_noiseless_link() -> Tuple[bool, str]:
    result = _simulate_fixed("psk", 120.0, 100, ("secomc", "secomc_genie", "nocomc", "baseline"))
    errors = {name: est.errors for name, est in result.estimates.items()}
    return not any(errors.values()), f"errors {errors}"


def _check_simulation_vs_exact() -> Tuple[bool, str]:
    result = _simulate_fixed("gaussian", 5.0, 2000, ("secomc_genie", "nocomc"))
    genie = result.estimates["secomc_genie"]
    exact = result.analytic["secomc_genie"][0]
    se = math.sqrt(exact * (1 - exact) / genie.trials)
    ok = abs(genie.ber - exact) < 4 * se

    p = genie.ber
    nocomc = result.estimates["nocomc"]
    composed = 2 * p * (1 - p)
    combined = math.hypot(nocomc.half_width_95, 2 * (1 - 2 * p) * genie.half_width_95)
    ok = ok and abs(nocomc.ber - composed) < 3 * max(combined, 1e-12)
    return ok, f"genie {genie.ber:.4e} vs exact {exact:.4e}; nocomc {nocomc.ber:.4e} vs 2p(1-p) {composed:.4e}"


CHECKS: List[Tuple[str, Callable[[], Tuple[bool, str]]]] = [
    ("erfc kernel reference values", _check_erfc_kernel),
    ("incomplete beta reference values", _check_incomplete_beta),
    ("exact SeCoMC BER: incomplete beta vs hypergeometric series", _check_exact_vs_hypergeometric),
    ("NoCoMC composition vs erf-squared form", _check_nocomc_erf_form),
    ("Gaussian error floor is the high-SNR limit", _check_floor_limit),
    ("approximation ordering baseline <= SeCoMC <= NoCoMC", _check_ordering),
    ("line-code round trips", _check_round_trips),
    ("RCD synthesis round trip", _check_rcd_synthesis),
    ("exact BER vs chi-square energy draws", _check_energy_draws),
    ("noiseless constant-modulus link is error free", _check_noiseless_link),
    ("simulated genie SeCoMC and NoCoMC vs theory", _check_simulation_vs_exact),
]


def run_selftest(report: Callable[[str], None] = print) -> List[CheckResult]:
    results = []
    for name, check in CHECKS:
        try:
            passed, detail = check()
        except Exception as e:
            logger.error(f"Self-test check '{name}' raised: {str(e)}")
            passed, detail = False, f"raised {type(e).__name__}: {e}"
        results.append(CheckResult(name=name, passed=bool(passed), detail=detail))
        report(f"{'✅ PASS' if passed else '❌ FAIL'}  {name}: {detail}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        report(f"\n❌ {len(failed)} check(s) failed: {', '.join(failed)}")
    else:
        report(f"\n🎉 All {len(results)} checks passed")
    return results
