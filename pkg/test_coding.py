#!/usr/bin/env python3
"""
Tests for Manchester and differential Manchester line codes
"""

import sys
import itertools
from pathlib import Path

import numpy as np

sys.path.append(str(Path(__file__).parent))

from src.coding import (
    ChipSequence,
    CodingScheme,
    diff_manchester_decode,
    diff_manchester_encode,
    manchester_decode,
    manchester_encode,
)
from src.config import MANCHESTER_ONE, MANCHESTER_ZERO
from src.errors import FramingError, InvalidCodeError, ParameterError


def _raises(exc, fn, *args, **kwargs):
    try:
        fn(*args, **kwargs)
    except exc:
        return True
    return False


def test_manchester_chip_mapping():
    seq = manchester_encode([0, 1, 1])
    assert seq.scheme == CodingScheme.MANCHESTER
    assert seq.to_list() == [1, 0, 0, 1, 0, 1]
    assert len(seq) == 6
    assert seq.pairs().tolist() == [[1, 0], [0, 1], [0, 1]]


def test_manchester_decode_errors():
    assert _raises(FramingError, manchester_decode, [1, 0, 1])
    assert _raises(InvalidCodeError, manchester_decode, [1, 0, 1, 1])
    assert _raises(InvalidCodeError, manchester_decode, [0, 0])
    assert manchester_decode([]).tolist() == []


def test_invalid_bits_rejected():
    assert _raises(ParameterError, manchester_encode, [0, 2])
    assert _raises(ParameterError, diff_manchester_encode, [1], (1, 1))


def test_diff_manchester_encoding():
    seq = diff_manchester_encode([0, 1, 1], reference=MANCHESTER_ZERO)
    assert seq.scheme == CodingScheme.DIFF_MANCHESTER
    assert seq.reference_pattern == MANCHESTER_ZERO
    # preamble, repeat, flip, flip
    assert seq.pairs().tolist() == [[1, 0], [1, 0], [0, 1], [1, 0]]

    other = diff_manchester_encode([0, 1, 1], reference=MANCHESTER_ONE)
    assert other.pairs().tolist() == [[0, 1], [0, 1], [1, 0], [0, 1]]


def test_diff_manchester_empty_payload():
    seq = diff_manchester_encode([])
    assert len(seq) == 2
    assert diff_manchester_decode(seq).tolist() == []
    assert _raises(FramingError, diff_manchester_decode, [])


def test_diff_manchester_ignores_polarity():
    bits = [1, 0, 0, 1, 1, 1, 0]
    chips = np.asarray(diff_manchester_encode(bits).chips)
    assert diff_manchester_decode(1 - chips).tolist() == bits


def test_chip_sequence_is_read_only():
    seq = ChipSequence([1, 0, 0, 1], CodingScheme.MANCHESTER)
    try:
        seq.chips[0] = 0
        assert False, "chips should be immutable"
    except ValueError:
        pass


def test_exhaustive_round_trips():
    for length in range(0, 13):
        for payload in itertools.product((0, 1), repeat=length):
            bits = list(payload)
            assert manchester_decode(manchester_encode(bits)).tolist() == bits
            for reference in (MANCHESTER_ZERO, MANCHESTER_ONE):
                assert diff_manchester_decode(diff_manchester_encode(bits, reference)).tolist() == bits


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
