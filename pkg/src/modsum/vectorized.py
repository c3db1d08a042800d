"""Batch evaluation of check values over many equal-length data words.

Every family here is affine over Z_M in the data bytes, so a check value is
a weighted byte sum reduced mod M.  ``byte_weights`` gives the per-byte
multipliers; ``batch_checksum`` applies them to a ``(words, length)`` uint8
matrix.  ``delta_checks`` recomputes check values after bit flips without
touching the data word, which is what makes megabyte-sized fault injection
affordable.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .algorithms import AlgorithmSpec, Family

_U64 = np.uint64
# bytes * weight < 2^40 for 32-bit moduli; 2^22 terms stay below 2^63
_CHUNK = 1 << 22


@dataclass(frozen=True)
class ByteWeights:
    """Residue contributed by each data byte (per unit of byte value)."""

    spec: AlgorithmSpec
    length: int
    sum_a: np.ndarray
    sum_b: np.ndarray | None
    seed_mask: np.ndarray
    offset_a: int
    offset_b: int


def _powers_desc(base: int, count: int, modulus: int, scale: int) -> np.ndarray:
    """[scale*base^(count-1), ..., scale*base, scale] mod modulus."""
    out = np.empty(count, dtype=_U64)
    acc = scale % modulus
    for i in range(count - 1, -1, -1):
        out[i] = acc
        acc = acc * base % modulus
    return out


@lru_cache(maxsize=64)
def byte_weights(spec: AlgorithmSpec, length: int) -> ByteWeights:
    m, bb, n = spec.modulus, spec.block_bytes, length
    seed_mask = np.zeros(n, dtype=np.uint8)
    offset_a = offset_b = 0
    sum_b = None

    if spec.family in (Family.KOOPMAN, Family.KOOPMAN_PARITY):
        sum_a = _powers_desc(256, n, m, pow(2, spec.check_bits, m))
        first = min(bb, n)
        shifted = spec.seed << (8 * (n - first))
        low = shifted & ((1 << (8 * n)) - 1)
        seed_mask[:] = np.frombuffer(low.to_bytes(n, "big"), dtype=np.uint8)
        high = shifted >> (8 * n)
        offset_a = (high << (8 * n)) * pow(2, spec.check_bits, m) % m
    else:
        in_block = _powers_desc(256, bb, m, 1)
        sum_a = np.resize(in_block, n).astype(_U64)
        offset_a = spec.seed % m
        if spec.family is Family.DUAL_SUM:
            n_blocks = -(-n // bb)
            block_idx = np.arange(n) // bb
            mult = (n_blocks - block_idx).astype(_U64) % _U64(m)
            sum_b = sum_a * mult % _U64(m)
            offset_b = spec.seed * (n_blocks + 1) % m
    return ByteWeights(spec, n, sum_a, sum_b, seed_mask, offset_a, offset_b)


def _weighted(data: np.ndarray, weights: np.ndarray, modulus: int) -> np.ndarray:
    m = _U64(modulus)
    acc = np.zeros(data.shape[0], dtype=_U64)
    for start in range(0, data.shape[1], _CHUNK):
        part = data[:, start : start + _CHUNK].astype(np.int64)
        w = weights[start : start + _CHUNK].astype(np.int64)
        acc = (acc + (part @ w).astype(_U64) % m) % m
    return acc


def _parity_u64(x: np.ndarray) -> np.ndarray:
    x = x.copy()
    for shift in (32, 16, 8, 4, 2, 1):
        x ^= x >> _U64(shift)
    return x & _U64(1)


def _xor_fold_rows(data: np.ndarray) -> np.ndarray:
    if data.shape[1] == 0:
        return np.zeros(data.shape[0], dtype=_U64)
    return np.bitwise_xor.reduce(data, axis=1).astype(_U64)


def _seed_parity(spec: AlgorithmSpec) -> int:
    return bin(spec.seed).count("1") & 1


def _pack(spec: AlgorithmSpec, sum_a: np.ndarray, sum_b: np.ndarray | None, par: np.ndarray | None):
    if spec.family is Family.DUAL_SUM:
        return (sum_a << _U64(spec.check_bits // 2)) | sum_b
    if spec.family is Family.KOOPMAN_PARITY:
        return (sum_a << _U64(1)) | par
    return sum_a


def batch_checksum(data: np.ndarray, spec: AlgorithmSpec) -> np.ndarray:
    """Check values for each row of a ``(words, length)`` uint8 matrix."""
    data = np.ascontiguousarray(data, dtype=np.uint8)
    if data.ndim != 2 or data.shape[1] == 0:
        raise ValueError("expected a non-empty (words, length) uint8 matrix")
    w = byte_weights(spec, data.shape[1])
    m = _U64(spec.modulus)
    if spec.family in (Family.KOOPMAN, Family.KOOPMAN_PARITY):
        seeded = data ^ w.seed_mask if spec.seed else data
    else:
        seeded = data
    sum_a = (_weighted(seeded, w.sum_a, spec.modulus) + _U64(w.offset_a)) % m
    sum_b = None
    if w.sum_b is not None:
        sum_b = (_weighted(seeded, w.sum_b, spec.modulus) + _U64(w.offset_b)) % m
    par = None
    if spec.family is Family.KOOPMAN_PARITY:
        par = _xor_fold_rows(data)
        par = _parity_u64(par) ^ _parity_u64(sum_a) ^ _U64(_seed_parity(spec))
    return _pack(spec, sum_a, sum_b, par)


def delta_checks(
    spec: AlgorithmSpec,
    length: int,
    checks: np.ndarray,
    data_bits: np.ndarray,
    positions: np.ndarray,
) -> np.ndarray:
    """Recompute check values after flipping data bits.

    ``checks`` are the original check values, ``positions`` a ``(rows, m)``
    array of code word bit indices, and ``data_bits`` the original values of
    the data bits at those indices (ignored where the index is a check bit).
    Only data positions change the recomputed value.
    """
    w = byte_weights(spec, length)
    m = spec.modulus
    mu = _U64(m)
    positions = np.asarray(positions, dtype=np.int64)
    in_data = positions < 8 * length
    byte_idx = np.where(in_data, positions // 8, 0)
    bit = (positions % 8).astype(_U64)

    bits = np.asarray(data_bits, dtype=np.int64)
    if spec.family in (Family.KOOPMAN, Family.KOOPMAN_PARITY) and spec.seed:
        # Koopman arithmetic sees the seed-XORed first block
        bits = bits ^ ((w.seed_mask[byte_idx].astype(np.int64) >> (positions % 8)) & 1)
    adds = in_data & (bits == 0)
    subs = in_data & (bits == 1)

    def shifted(table):
        return (table[byte_idx] << bit) % mu

    def apply(total, table):
        step = shifted(table)
        plus = np.where(adds, step, _U64(0)).sum(axis=1, dtype=_U64) % mu
        minus = np.where(subs, step, _U64(0)).sum(axis=1, dtype=_U64) % mu
        return (total + plus + (mu - minus)) % mu

    checks = np.asarray(checks, dtype=_U64)
    if spec.family is Family.DUAL_SUM:
        half = _U64(spec.check_bits // 2)
        sum_a = checks >> half
        sum_b = checks & ((_U64(1) << half) - _U64(1))
        return _pack(spec, apply(sum_a, w.sum_a), apply(sum_b, w.sum_b), None)
    if spec.family is Family.KOOPMAN_PARITY:
        old = checks >> _U64(1)
        new = apply(old, w.sum_a)
        flips = in_data.sum(axis=1).astype(_U64) & _U64(1)
        par = (checks & _U64(1)) ^ flips ^ _parity_u64(old) ^ _parity_u64(new)
        return _pack(spec, new, None, par)
    return apply(checks, w.sum_a)
