"""Closed-form and asymptotic BER of the Manchester energy detectors.

Every formula takes the squared channel magnitudes |h0|^2, |h1|^2 and the
linear SNR gamma = ps / nw; phases never matter. The formulas are written
with numpy so they broadcast over arrays of channel magnitudes, and return
plain floats for scalar input.
"""

import math
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import special

from .errors import DomainError, ParameterError
from .signal_model import ChannelState, SourceKind

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class VarPair:
    sigma0_sq: float
    sigma1_sq: float

    def __post_init__(self):
        if not (self.sigma0_sq > 0 and self.sigma1_sq > 0):
            raise ParameterError(
                f"hypothesis variances must be positive, got ({self.sigma0_sq}, {self.sigma1_sq})"
            )

    @property
    def sigma_n_sq(self) -> float:
        return min(self.sigma0_sq, self.sigma1_sq)

    @property
    def sigma_m_sq(self) -> float:
        return max(self.sigma0_sq, self.sigma1_sq)


@dataclass(frozen=True)
class GaussianMoments:
    """Mean and variance of a half-interval energy under a Gaussian source"""

    mu_g0: float
    mu_g1: float
    var_g0: float
    var_g1: float


@dataclass(frozen=True)
class DeterministicMoments:
    """Mean and variance of a half-interval energy under a constant-modulus source"""

    mu_p0: float
    mu_p1: float
    var_p0: float
    var_p1: float


def moments_gaussian(h0_sq: float, h1_sq: float, ps: float, nw: float, n: int) -> GaussianMoments:
    s0 = h0_sq * ps + nw
    s1 = h1_sq * ps + nw
    return GaussianMoments(mu_g0=n * s0, mu_g1=n * s1, var_g0=n * s0 ** 2, var_g1=n * s1 ** 2)


def moments_deterministic(h0_sq: float, h1_sq: float, ps: float, nw: float, n: int) -> DeterministicMoments:
    return DeterministicMoments(
        mu_p0=n * (h0_sq * ps + nw),
        mu_p1=n * (h1_sq * ps + nw),
        var_p0=n * (2 * h0_sq * ps * nw + nw ** 2),
        var_p1=n * (2 * h1_sq * ps * nw + nw ** 2),
    )


# ------------------------------------------------------------ kernels


def _finish(values):
    values = np.asarray(values, dtype=float)
    return float(values) if values.ndim == 0 else values


def half_erfc(x):
    """erfc(x) / 2. Results that underflow to 0 are clamped there with a warning."""
    x = np.asarray(x, dtype=float)
    result = 0.5 * special.erfc(x)
    lost = (result == 0.0) & np.isfinite(x)
    if np.any(lost):
        logger.warning(f"erfc underflow for {int(np.count_nonzero(lost))} argument(s); use log_half_erfc")
    return _finish(result)


def log_half_erfc(x):
    """log(erfc(x) / 2), finite far beyond the underflow of the linear value"""
    x = np.asarray(x, dtype=float)
    return _finish(special.log_ndtr(-SQRT2 * x))


def underflowed(x):
    x = np.asarray(x, dtype=float)
    flags = (0.5 * special.erfc(x) == 0.0) & np.isfinite(x)
    return bool(flags) if flags.ndim == 0 else flags


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta I_x(a, b)"""
    if not (0.0 <= x <= 1.0) or not (a > 0 and b > 0):
        raise ParameterError(f"I_x(a, b) needs x in [0, 1] and a, b > 0, got x={x}, a={a}, b={b}")
    return float(special.betainc(a, b, x))


def _check_n(n):
    if np.any(np.asarray(n) < 1):
        raise ParameterError(f"N must be at least 1, got {n}")


def _check_magnitudes(h0_sq, h1_sq):
    if np.any(np.asarray(h0_sq) < 0) or np.any(np.asarray(h1_sq) < 0):
        raise ParameterError("squared channel magnitudes must be non-negative")


def _check_gamma(gamma):
    if np.any(np.asarray(gamma) <= 0):
        raise ParameterError(f"gamma must be positive, got {gamma}")


def _ratio(numerator, denominator):
    numerator = np.asarray(numerator, dtype=float)
    denominator = np.asarray(denominator, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(denominator > 0, numerator / np.where(denominator > 0, denominator, 1.0), 0.0)


# ------------------------------------------------------------ SeCoMC


def secomc_exact_from_variances(sigma0_sq, sigma1_sq, n):
    """Exact Gaussian-source SeCoMC BER, broadcasting over variance arrays.

    The smaller-variance half wins with probability I_x(N, N), x = sn/(sn+sm):
    the energies are scaled Gamma(N) variables and their normalized ratio is
    Beta(N, N).
    """
    s0 = np.asarray(sigma0_sq, dtype=float)
    s1 = np.asarray(sigma1_sq, dtype=float)
    sn = np.minimum(s0, s1)
    sm = np.maximum(s0, s1)
    return _finish(special.betainc(n, n, sn / (sn + sm)))


def ber_secomc_gaussian_exact(v: VarPair, n: int) -> float:
    _check_n(n)
    return reg_inc_beta(v.sigma_n_sq / (v.sigma_n_sq + v.sigma_m_sq), n, n)


def ber_secomc_gaussian_closed_form(v: VarPair, n: int) -> float:
    """Gamma-ratio times Gauss hypergeometric form of the exact BER.

    Only usable for small N; kept as an independent check of the
    incomplete-beta route.
    """
    _check_n(n)
    r = v.sigma_n_sq / v.sigma_m_sq
    log_coeff = special.gammaln(2 * n) - math.log(n) - 2 * special.gammaln(n) + n * math.log(r)
    return float(math.exp(log_coeff) * special.hyp2f1(n, 2 * n, n + 1, -r))


def secomc_gaussian_approx_argument(h0_sq, h1_sq, gamma, n):
    _check_magnitudes(h0_sq, h1_sq)
    _check_gamma(gamma)
    _check_n(n)
    h0_sq = np.asarray(h0_sq, dtype=float)
    h1_sq = np.asarray(h1_sq, dtype=float)
    inv = 1.0 / np.asarray(gamma, dtype=float)
    spread = np.sqrt((h0_sq + inv) ** 2 + (h1_sq + inv) ** 2)
    return np.sqrt(n) * _ratio(np.abs(h1_sq - h0_sq), SQRT2 * spread)


def secomc_gaussian_floor_argument(h0_sq, h1_sq, n):
    _check_magnitudes(h0_sq, h1_sq)
    _check_n(n)
    h0_sq = np.asarray(h0_sq, dtype=float)
    h1_sq = np.asarray(h1_sq, dtype=float)
    return np.sqrt(n) * _ratio(np.abs(h1_sq - h0_sq), SQRT2 * np.hypot(h0_sq, h1_sq))


def secomc_deterministic_approx_argument(h0_sq, h1_sq, gamma, n):
    _check_magnitudes(h0_sq, h1_sq)
    _check_gamma(gamma)
    _check_n(n)
    h0_sq = np.asarray(h0_sq, dtype=float)
    h1_sq = np.asarray(h1_sq, dtype=float)
    inv = 1.0 / np.asarray(gamma, dtype=float)
    spread = 2.0 * np.sqrt((h0_sq + h1_sq) * inv + inv ** 2)
    return np.sqrt(n) * _ratio(np.abs(h1_sq - h0_sq), spread)


def secomc_deterministic_highsnr_argument(h0_sq, h1_sq, gamma, n):
    _check_magnitudes(h0_sq, h1_sq)
    _check_gamma(gamma)
    _check_n(n)
    h0_sq = np.asarray(h0_sq, dtype=float)
    h1_sq = np.asarray(h1_sq, dtype=float)
    spread = 2.0 * np.sqrt(h0_sq + h1_sq)
    return np.sqrt(n * np.asarray(gamma, dtype=float)) * _ratio(np.abs(h1_sq - h0_sq), spread)


def ber_secomc_gaussian_approx(h0_sq, h1_sq, gamma, n):
    return half_erfc(secomc_gaussian_approx_argument(h0_sq, h1_sq, gamma, n))


def ber_secomc_gaussian_floor(h0_sq, h1_sq, n):
    """Limit of the Gaussian approximation as gamma grows: erfc(sqrt(N/2) RCD) / 2"""
    return half_erfc(secomc_gaussian_floor_argument(h0_sq, h1_sq, n))


def ber_secomc_deterministic_approx(h0_sq, h1_sq, gamma, n):
    return half_erfc(secomc_deterministic_approx_argument(h0_sq, h1_sq, gamma, n))


def ber_secomc_deterministic_highsnr(h0_sq, h1_sq, gamma, n):
    return half_erfc(secomc_deterministic_highsnr_argument(h0_sq, h1_sq, gamma, n))


# ------------------------------------------------------------ threshold baseline


def ber_baseline_gaussian_approx(h0_sq, h1_sq, gamma, n):
    _check_magnitudes(h0_sq, h1_sq)
    _check_gamma(gamma)
    _check_n(n)
    h0_sq = np.asarray(h0_sq, dtype=float)
    h1_sq = np.asarray(h1_sq, dtype=float)
    total = h0_sq + h1_sq + 2.0 / np.asarray(gamma, dtype=float)
    return half_erfc(np.sqrt(n) * _ratio(np.abs(h1_sq - h0_sq), total))


def ber_baseline_gaussian_floor(h0_sq, h1_sq, n):
    _check_magnitudes(h0_sq, h1_sq)
    _check_n(n)
    h0_sq = np.asarray(h0_sq, dtype=float)
    h1_sq = np.asarray(h1_sq, dtype=float)
    return half_erfc(np.sqrt(n) * _ratio(np.abs(h1_sq - h0_sq), h0_sq + h1_sq))


# ------------------------------------------------------------ NoCoMC


def ber_nocomc_from_secomc(p):
    """A differential decision is wrong when exactly one of the two adjacent
    half-energy comparisons is wrong: 2p(1 - p)."""
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise ParameterError(f"p must be a probability, got {p}")
    return _finish(2.0 * p * (1.0 - p))


def nocomc_erf_form(x):
    """1/2 - erf(x)^2 / 2, equal to 2p(1 - p) for p = erfc(x) / 2"""
    x = np.asarray(x, dtype=float)
    return _finish(0.5 - 0.5 * special.erf(x) ** 2)


def ber_nocomc_gaussian_exact(v: VarPair, n: int) -> float:
    return ber_nocomc_from_secomc(ber_secomc_gaussian_exact(v, n))


def ber_nocomc_gaussian_approx(h0_sq, h1_sq, gamma, n):
    return ber_nocomc_from_secomc(ber_secomc_gaussian_approx(h0_sq, h1_sq, gamma, n))


def ber_nocomc_gaussian_floor(h0_sq, h1_sq, n):
    return ber_nocomc_from_secomc(ber_secomc_gaussian_floor(h0_sq, h1_sq, n))


def ber_nocomc_deterministic_approx(h0_sq, h1_sq, gamma, n):
    return ber_nocomc_from_secomc(ber_secomc_deterministic_approx(h0_sq, h1_sq, gamma, n))


def ber_nocomc_deterministic_highsnr(h0_sq, h1_sq, gamma, n):
    return ber_nocomc_from_secomc(ber_secomc_deterministic_highsnr(h0_sq, h1_sq, gamma, n))


# ------------------------------------------------------------ adapters


def analytic_for_channel(detector: str, source: SourceKind, h0_sq, h1_sq, gamma: float, n: int) -> Tuple:
    """(exact, approx, floor) BER for one detector; NaN where no formula applies.

    For a constant-modulus source the floor slot holds the high-SNR form,
    which keeps falling with gamma instead of settling.
    """
    source = SourceKind(source)
    h0_sq = np.asarray(h0_sq, dtype=float)
    h1_sq = np.asarray(h1_sq, dtype=float)
    nan = _finish(np.full(np.broadcast(h0_sq, h1_sq).shape, np.nan))
    gaussian = source == SourceKind.COMPLEX_GAUSSIAN

    if detector in ("secomc", "secomc_genie", "nocomc"):
        if gaussian:
            inv = 1.0 / gamma
            exact = secomc_exact_from_variances(h0_sq + inv, h1_sq + inv, n)
            approx = ber_secomc_gaussian_approx(h0_sq, h1_sq, gamma, n)
            floor = ber_secomc_gaussian_floor(h0_sq, h1_sq, n)
        else:
            exact = nan
            approx = ber_secomc_deterministic_approx(h0_sq, h1_sq, gamma, n)
            floor = ber_secomc_deterministic_highsnr(h0_sq, h1_sq, gamma, n)
        if detector == "nocomc":
            compose = ber_nocomc_from_secomc
            exact = nan if not gaussian else compose(exact)
            approx, floor = compose(approx), compose(floor)
        return exact, approx, floor

    if detector == "baseline":
        if gaussian:
            return (nan, ber_baseline_gaussian_approx(h0_sq, h1_sq, gamma, n),
                    ber_baseline_gaussian_floor(h0_sq, h1_sq, n))
        return nan, nan, nan

    raise ParameterError(f"unknown detector '{detector}'")


def analytic_for_state(detector: str, source: SourceKind, ch: ChannelState, gamma: float, n: int) -> Tuple:
    return analytic_for_channel(detector, source, ch.h0_sq, ch.h1_sq, gamma, n)


def rcd_from_magnitudes(h0_sq: float, h1_sq: float) -> float:
    if h0_sq < 0 or h1_sq < 0:
        raise ParameterError("squared channel magnitudes must be non-negative")
    if h0_sq == 0 and h1_sq == 0:
        raise DomainError("RCD is undefined when both effective channels are zero")
    return abs(h1_sq - h0_sq) / math.hypot(h0_sq, h1_sq)
