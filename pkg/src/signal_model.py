"""Channel, ambient source and noise models for the backscatter link"""

import math
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from .config import (
    DEFAULT_ETA,
    DEFAULT_PSK_ORDER,
    H_SR_VARIANCE,
    H_ST_VARIANCE,
    H_TR_VARIANCE,
)
from .errors import DomainError, ParameterError

logger = logging.getLogger(__name__)


class SourceKind(str, Enum):
    COMPLEX_GAUSSIAN = "gaussian"
    CONSTANT_MODULUS = "psk"


class RcdBranch(str, Enum):
    H1_STRONGER = "h1_stronger"
    H0_STRONGER = "h0_stronger"


@dataclass(frozen=True)
class ChannelState:
    """Channel gains of one coherence block.

    h0 is the effective channel while the tag is not reflecting (direct path
    only), h1 while it is reflecting (direct plus tag path).
    """

    h_st: complex
    h_sr: complex
    h_tr: complex
    eta: float = DEFAULT_ETA

    def __post_init__(self):
        if not (0.0 < self.eta <= 1.0):
            raise ParameterError(f"eta must lie in (0, 1], got {self.eta}")

    @property
    def h0(self) -> complex:
        return self.h_sr

    @property
    def h1(self) -> complex:
        return self.h_sr + self.eta * self.h_tr * self.h_st

    @property
    def h0_sq(self) -> float:
        return abs(self.h0) ** 2

    @property
    def h1_sq(self) -> float:
        return abs(self.h1) ** 2


@dataclass(frozen=True)
class AmbientSource:
    """Generator of the ambient RF samples s[n].

    Constant-modulus symbols are drawn from the M-PSK constellation scaled to
    power ps. Every detector here is energy based, so only |s[n]|^2 = ps
    matters and any other constant-modulus waveform would behave the same.
    """

    kind: SourceKind = SourceKind.COMPLEX_GAUSSIAN
    ps: float = 1.0
    modulation_order: int = DEFAULT_PSK_ORDER

    def __post_init__(self):
        object.__setattr__(self, "kind", SourceKind(self.kind))
        if not self.ps > 0:
            raise ParameterError(f"source power must be positive, got {self.ps}")
        if self.modulation_order < 2:
            raise ParameterError(
                f"modulation order must be at least 2, got {self.modulation_order}"
            )

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == SourceKind.COMPLEX_GAUSSIAN:
            return _circular_gaussian(rng, self.ps, size)
        symbols = rng.integers(0, self.modulation_order, size=size)
        return math.sqrt(self.ps) * np.exp(2j * np.pi * symbols / self.modulation_order)


@dataclass(frozen=True)
class NoiseModel:
    nw: float = 1.0

    def __post_init__(self):
        if not self.nw > 0:
            raise ParameterError(f"noise power must be positive, got {self.nw}")

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return _circular_gaussian(rng, self.nw, size)


@dataclass(frozen=True)
class LinkParams:
    """Per-link parameters. gamma is the linear SNR ps/nw."""

    n: int
    gamma: float
    prior_of_one: float = 0.5
    k: int = 30
    t: int = 2

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"N must be at least 1, got {self.n}")
        if self.k < 1:
            raise ParameterError(f"K must be at least 1, got {self.k}")
        if self.t < 0:
            raise ParameterError(f"T must be non-negative, got {self.t}")
        if not (0.0 <= self.prior_of_one <= 1.0):
            raise ParameterError(f"prior_of_one must lie in [0, 1], got {self.prior_of_one}")
        if not self.gamma > 0:
            raise ParameterError(f"gamma must be positive, got {self.gamma}")


def _circular_gaussian(rng: np.random.Generator, power: float, size) -> np.ndarray:
    scale = math.sqrt(power / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def draw_channel(
    rng: np.random.Generator,
    fixed: Optional[Tuple[complex, complex, complex, float]] = None,
    eta: float = DEFAULT_ETA,
) -> ChannelState:
    """Draw one block's channel, or build it from fixed (h_st, h_sr, h_tr, eta)"""
    if fixed is not None:
        h_st, h_sr, h_tr, eta = fixed
        return ChannelState(h_st=complex(h_st), h_sr=complex(h_sr), h_tr=complex(h_tr), eta=float(eta))

    h_st = complex(_circular_gaussian(rng, H_ST_VARIANCE, None))
    h_sr = complex(_circular_gaussian(rng, H_SR_VARIANCE, None))
    h_tr = complex(_circular_gaussian(rng, H_TR_VARIANCE, None))
    return ChannelState(h_st=h_st, h_sr=h_sr, h_tr=h_tr, eta=eta)


def rcd(h0: complex, h1: complex) -> float:
    """Relative channel difference ||h1|^2 - |h0|^2| / sqrt(|h0|^4 + |h1|^4)"""
    a = abs(h0) ** 2
    b = abs(h1) ** 2
    if a == 0 and b == 0:
        raise DomainError("RCD is undefined when both effective channels are zero")
    return abs(b - a) / math.hypot(a, b)


def synthesize_channel_with_rcd(
    rcd_value: float,
    branch: RcdBranch = RcdBranch.H1_STRONGER,
    eta: float = DEFAULT_ETA,
) -> ChannelState:
    """Build a zero-phase channel with |h0|^2 = 1 and the requested RCD.

    With x = |h1|^2 the definition gives (1 - r^2) x^2 - 2x + (1 - r^2) = 0,
    whose two roots are reciprocal. RCD never exceeds 1 for finite channels;
    RCD = 1 is only reachable on the h0-stronger branch, with h1 = 0.
    """
    branch = RcdBranch(branch)
    upper_ok = rcd_value <= 1.0 if branch == RcdBranch.H0_STRONGER else rcd_value < 1.0
    if not (rcd_value >= 0.0 and upper_ok):
        raise ParameterError(f"RCD {rcd_value} is not reachable on the {branch.value} branch")

    a = 1.0 - rcd_value * rcd_value
    # 1 - a^2 written as r^2 (2 - r^2) to keep precision near r = 0
    smaller_root = a / (1.0 + rcd_value * math.sqrt(2.0 - rcd_value * rcd_value))
    h1_sq = smaller_root if branch == RcdBranch.H0_STRONGER else 1.0 / smaller_root

    h0 = 1.0 + 0j
    h1 = complex(math.sqrt(h1_sq))
    return ChannelState(h_st=1.0 + 0j, h_sr=h0, h_tr=(h1 - h0) / eta, eta=eta)


def sigma_sq(h: complex, ps: float, nw: float) -> float:
    """Per-sample received power |h|^2 ps + nw under one hypothesis"""
    if not ps > 0 or not nw > 0:
        raise ParameterError(f"ps and nw must be positive, got ps={ps}, nw={nw}")
    return abs(h) ** 2 * ps + nw


def receive_chips(
    chips: Sequence[int],
    ch: ChannelState,
    src: AmbientSource,
    noise: NoiseModel,
    n: int,
    rng: np.random.Generator,
    noise_rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """Received samples for a chip sequence, one row of n samples per chip.

    Noise comes from noise_rng when given, otherwise from the same stream as
    the ambient samples.
    """
    if n < 1:
        raise ParameterError(f"N must be at least 1, got {n}")
    chips = np.asarray(chips, dtype=np.int8)
    gains = np.where(chips == 1, ch.h1, ch.h0).astype(complex)[:, None]
    shape = (chips.size, n)
    s = src.sample(rng, shape)
    w = noise.sample(rng if noise_rng is None else noise_rng, shape)
    return gains * s + w


def receive_chip(
    chip: int,
    ch: ChannelState,
    src: AmbientSource,
    noise: NoiseModel,
    n: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """y[n] = h_chip s[n] + w[n] for n = 0..N-1"""
    if chip not in (0, 1):
        raise ParameterError(f"chip must be 0 or 1, got {chip}")
    return receive_chips([chip], ch, src, noise, n, rng)[0]
