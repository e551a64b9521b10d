"""Energy detectors for Manchester coded backscatter.

SeCoMC compares the two half-interval energies of one Manchester symbol,
NoCoMC compares the sign of that difference across two adjacent
differential Manchester symbols, and the threshold baseline compares each
full-symbol energy with an estimated threshold. All of them consume
energies, never raw samples, so exact energies can be injected directly.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import FramingError, ParameterError, TrainingError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnergyPair:
    za: float
    zb: float

    def __post_init__(self):
        if self.za < 0 or self.zb < 0:
            raise ParameterError(f"energies must be non-negative, got ({self.za}, {self.zb})")


class Relation(str, Enum):
    SIGMA0_GREATER = "sigma0_greater"
    SIGMA1_GREATER = "sigma1_greater"


class DiffSign(str, Enum):
    NONPOSITIVE = "nonpositive"
    POSITIVE = "positive"


@dataclass(frozen=True)
class SeCoMCState:
    relation: Relation
    at: float
    bt: float

    def __post_init__(self):
        expected = Relation.SIGMA0_GREATER if self.at > self.bt else Relation.SIGMA1_GREATER
        if Relation(self.relation) != expected:
            raise ParameterError(f"relation {self.relation} contradicts At={self.at}, Bt={self.bt}")

    @classmethod
    def genie(cls, sigma0_sq: float, sigma1_sq: float) -> "SeCoMCState":
        """State carrying the true variance ordering, no training involved"""
        relation = Relation.SIGMA0_GREATER if sigma0_sq > sigma1_sq else Relation.SIGMA1_GREATER
        return cls(relation=relation, at=float(sigma0_sq), bt=float(sigma1_sq))

    @property
    def degenerate(self) -> bool:
        """Equal estimated variances: decisions fall back to the tie rules"""
        return self.at == self.bt


@dataclass(frozen=True)
class NoCoMCState:
    prev_diff_sign: DiffSign

    @classmethod
    def from_preamble(cls, e: EnergyPair) -> "NoCoMCState":
        return cls(_sign_of(e.za - e.zb))


@dataclass(frozen=True)
class BaselineState:
    threshold: float
    mu0_hat: float
    mu1_hat: float

    def __post_init__(self):
        if self.mu0_hat < 0 or self.mu1_hat < 0:
            raise ParameterError("estimated mean energies must be non-negative")
        low, high = sorted((self.mu0_hat, self.mu1_hat))
        if not (low <= self.threshold <= high):
            raise ParameterError(
                f"threshold {self.threshold} is not between the means {self.mu0_hat} and {self.mu1_hat}"
            )

    @property
    def one_is_upper(self) -> bool:
        return self.mu1_hat >= self.mu0_hat


def _sign_of(diff: float) -> DiffSign:
    return DiffSign.POSITIVE if diff > 0 else DiffSign.NONPOSITIVE


def half_energies(samples) -> EnergyPair:
    """Energies of the first and second half of a 2N-sample symbol"""
    samples = np.asarray(samples).reshape(-1)
    if samples.size % 2:
        raise FramingError(f"symbol of odd length {samples.size} has no half-interval boundary")
    half = samples.size // 2
    power = np.abs(samples) ** 2
    return EnergyPair(float(power[:half].sum()), float(power[half:].sum()))


def chip_energies(received: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Half-interval energies for a frame received as one row per chip"""
    received = np.asarray(received)
    if received.shape[0] % 2:
        raise FramingError(f"frame of {received.shape[0]} chips does not split into symbols")
    energy = np.sum(np.abs(received) ** 2, axis=1)
    return energy[0::2], energy[1::2]


def symbol_energies(received: np.ndarray) -> np.ndarray:
    """Full-symbol energies, one per row of received samples"""
    received = np.asarray(received)
    if received.ndim != 2:
        raise FramingError(f"expected one row of samples per symbol, got shape {received.shape}")
    return np.sum(np.abs(received) ** 2, axis=1)


# ---------------------------------------------------------------- SeCoMC


def secomc_train_arrays(za: np.ndarray, zb: np.ndarray, n: int) -> SeCoMCState:
    za = np.asarray(za, dtype=float)
    zb = np.asarray(zb, dtype=float)
    t = za.size
    if t == 0:
        raise TrainingError("SeCoMC needs at least one training symbol; use a genie state instead")
    at = float(za.sum()) / (t * n)
    bt = float(zb.sum()) / (t * n)
    relation = Relation.SIGMA0_GREATER if at > bt else Relation.SIGMA1_GREATER
    return SeCoMCState(relation=relation, at=at, bt=bt)


def secomc_train(training_pairs: Sequence[EnergyPair], n: int) -> SeCoMCState:
    """Estimate the variance ordering from T training symbols of bit 1.

    Bit 1 is the pair (0, 1), so the first half rides h0 and the second h1:
    At estimates sigma0^2 and Bt estimates sigma1^2.
    """
    pairs = list(training_pairs)
    return secomc_train_arrays([p.za for p in pairs], [p.zb for p in pairs], n)


def secomc_detect(state: SeCoMCState, e: EnergyPair) -> int:
    if state.relation == Relation.SIGMA0_GREATER:
        return 1 if e.za > e.zb else 0
    return 1 if e.za <= e.zb else 0


def secomc_detect_many(state: SeCoMCState, za: np.ndarray, zb: np.ndarray) -> np.ndarray:
    za = np.asarray(za)
    zb = np.asarray(zb)
    if state.relation == Relation.SIGMA0_GREATER:
        return (za > zb).astype(np.int8)
    return (za <= zb).astype(np.int8)


# ---------------------------------------------------------------- NoCoMC


def nocomc_detect(state: NoCoMCState, e: EnergyPair) -> Tuple[int, NoCoMCState]:
    """Decide 1 when the half-energy difference changed sign since the last symbol.

    A difference of exactly zero in the current symbol yields 0 (the product
    is not negative) and is remembered as nonpositive.
    """
    cur = e.za - e.zb
    if state.prev_diff_sign == DiffSign.POSITIVE:
        bit = 1 if cur < 0 else 0
    else:
        bit = 1 if cur > 0 else 0
    return bit, NoCoMCState(_sign_of(cur))


def nocomc_detect_frame(za: np.ndarray, zb: np.ndarray) -> np.ndarray:
    """Decode a whole frame whose first symbol is the preamble"""
    diff = np.asarray(za, dtype=float) - np.asarray(zb, dtype=float)
    if diff.size == 0:
        raise FramingError("NoCoMC frame is missing its preamble symbol")
    prev_positive = diff[:-1] > 0
    cur = diff[1:]
    bits = np.where(prev_positive, cur < 0, cur > 0)
    return bits.astype(np.int8)


# ---------------------------------------------------------------- baseline


def baseline_train(
    symbol_energies_h0: Iterable[float],
    symbol_energies_h1: Iterable[float],
    unlabeled_energies: Optional[Iterable[float]] = None,
) -> BaselineState:
    """Midpoint threshold from pilot energies of both hypotheses.

    With unlabeled energies the threshold becomes the average of every energy
    seen in the block, which equals the midpoint only when ones and zeros are
    equally likely. The pilot means still decide which side means 1.
    """
    e0 = np.asarray(list(symbol_energies_h0), dtype=float)
    e1 = np.asarray(list(symbol_energies_h1), dtype=float)
    if e0.size == 0 or e1.size == 0:
        raise TrainingError("threshold training needs at least one pilot energy per hypothesis")
    mu0_hat = float(e0.mean())
    mu1_hat = float(e1.mean())

    if unlabeled_energies is None:
        threshold = (mu0_hat + mu1_hat) / 2.0
    else:
        pooled = np.concatenate((e0, e1, np.asarray(list(unlabeled_energies), dtype=float)))
        low, high = sorted((mu0_hat, mu1_hat))
        threshold = float(np.clip(pooled.mean(), low, high))
    return BaselineState(threshold=threshold, mu0_hat=mu0_hat, mu1_hat=mu1_hat)


def baseline_detect(state: BaselineState, symbol_energy: float) -> int:
    if state.one_is_upper:
        return 1 if symbol_energy > state.threshold else 0
    return 1 if symbol_energy < state.threshold else 0


def baseline_detect_many(state: BaselineState, energies: np.ndarray) -> np.ndarray:
    energies = np.asarray(energies)
    if state.one_is_upper:
        return (energies > state.threshold).astype(np.int8)
    return (energies < state.threshold).astype(np.int8)
