import numpy as np
import pytest

from modsum import PRESETS, AlgorithmSpec, checksum
from modsum.vectorized import batch_checksum, delta_checks


@pytest.mark.parametrize("seed", [0, 7])
@pytest.mark.parametrize("length", [1, 3, 14, 33])
def test_batch_matches_scalar_kernels(preset_spec, seed, length):
    spec = preset_spec.replace(seed=seed)
    gen = np.random.default_rng(length)
    words = gen.integers(0, 256, size=(20, length), dtype=np.uint8)
    got = batch_checksum(words, spec)
    assert got.dtype == np.uint64
    assert [int(x) for x in got] == [checksum(bytes(w), spec) for w in words]


def test_batch_generic_k_and_large_blocks():
    for spec in (
        AlgorithmSpec("Koopman", 32749, 15),
        AlgorithmSpec("Koopman", 65519, 16, 3, 0x1234),
        AlgorithmSpec("SingleSum", 4294967291, 32, 8),
        AlgorithmSpec("DualSum", 65521, 32, 2),
    ):
        words = np.random.default_rng(1).integers(0, 256, size=(10, 29), dtype=np.uint8)
        assert [int(x) for x in batch_checksum(words, spec)] == [checksum(bytes(w), spec) for w in words]


@pytest.mark.parametrize("m", [1, 2, 3])
def test_delta_engine_matches_recomputation(preset_spec, m):
    spec = preset_spec.replace(seed=5)
    length = 21
    n_bits = spec.code_word_bits(length)
    gen = np.random.default_rng(m)
    words = gen.integers(0, 256, size=(200, length), dtype=np.uint8)
    checks = batch_checksum(words, spec)
    positions = np.stack([gen.choice(n_bits, m, replace=False) for _ in range(200)])
    in_data = positions < 8 * length
    byte_idx = np.where(in_data, positions // 8, 0)
    bits = (words[np.arange(200)[:, None], byte_idx] >> (positions % 8).astype(np.uint8)) & 1
    flipped = words.copy()
    for r, row in enumerate(positions):
        for p in row:
            if p < 8 * length:
                flipped[r, p // 8] ^= np.uint8(1 << (p % 8))
    expect = batch_checksum(flipped, spec)
    got = delta_checks(spec, length, checks, bits, positions)
    assert np.array_equal(got, expect)
