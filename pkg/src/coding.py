"""Manchester and differential Manchester line coding.

Chips are backscatter states: 1 means the tag reflects during that half
interval, 0 means it does not. Every original bit becomes one pair of chips
(first half, second half) and every legal pair contains exactly one 1.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .config import DEFAULT_REFERENCE_PAIR, MANCHESTER_ONE, MANCHESTER_ZERO
from .errors import FramingError, InvalidCodeError, ParameterError

logger = logging.getLogger(__name__)


class CodingScheme(str, Enum):
    MANCHESTER = "manchester"
    DIFF_MANCHESTER = "diff_manchester"


@dataclass(frozen=True, eq=False)
class ChipSequence:
    chips: np.ndarray
    scheme: CodingScheme
    reference_pattern: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        chips = np.array(self.chips, dtype=np.int8).reshape(-1)
        chips.setflags(write=False)
        object.__setattr__(self, "chips", chips)

    def __len__(self) -> int:
        return int(self.chips.size)

    def pairs(self) -> np.ndarray:
        return _split_pairs(self.chips)

    def to_list(self):
        return self.chips.tolist()


ChipInput = Union[ChipSequence, Sequence[int]]


def _as_bits(bits) -> np.ndarray:
    arr = np.asarray(bits, dtype=np.int8).reshape(-1)
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ParameterError("bits must be 0 or 1")
    return arr


def _raw_chips(chips: ChipInput) -> np.ndarray:
    if isinstance(chips, ChipSequence):
        return chips.chips
    return np.asarray(chips, dtype=np.int8).reshape(-1)


def _split_pairs(chips: np.ndarray) -> np.ndarray:
    if chips.size % 2:
        raise FramingError(f"chip sequence of odd length {chips.size} cannot be split into symbols")
    pairs = chips.reshape(-1, 2)
    bad = pairs[:, 0] == pairs[:, 1]
    if bad.any():
        index = int(np.flatnonzero(bad)[0])
        raise InvalidCodeError(f"symbol {index} has illegal chip pair {tuple(pairs[index].tolist())}")
    return pairs


def manchester_encode(bits) -> ChipSequence:
    """Bit 0 -> (1, 0), bit 1 -> (0, 1)"""
    bits = _as_bits(bits)
    chips = np.empty(2 * bits.size, dtype=np.int8)
    chips[0::2] = 1 - bits
    chips[1::2] = bits
    return ChipSequence(chips, CodingScheme.MANCHESTER)


def manchester_decode(chips: ChipInput) -> np.ndarray:
    pairs = _split_pairs(_raw_chips(chips))
    return pairs[:, 1].astype(np.int8)


def diff_manchester_encode(bits, reference: Tuple[int, int] = DEFAULT_REFERENCE_PAIR) -> ChipSequence:
    """Repeat the previous pair for bit 0, flip it for bit 1.

    The reference pair is transmitted first as a preamble symbol, so a payload
    of K bits produces K + 1 pairs.
    """
    reference = tuple(int(c) for c in reference)
    if reference not in (MANCHESTER_ZERO, MANCHESTER_ONE):
        raise ParameterError(f"reference pair must be (1, 0) or (0, 1), got {reference}")
    bits = _as_bits(bits)

    flips = np.concatenate(([0], np.cumsum(bits) % 2)).astype(np.int8)
    first = reference[0] ^ flips
    chips = np.empty(2 * first.size, dtype=np.int8)
    chips[0::2] = first
    chips[1::2] = 1 - first
    return ChipSequence(chips, CodingScheme.DIFF_MANCHESTER, reference)


def diff_manchester_decode(chips: ChipInput) -> np.ndarray:
    """Bit k is 1 exactly when pair k differs from pair k-1"""
    pairs = _split_pairs(_raw_chips(chips))
    if not len(pairs):
        raise FramingError("differential Manchester frame is missing its preamble symbol")
    first = pairs[:, 0]
    return (first[1:] != first[:-1]).astype(np.int8)
