"""Scalar checksum kernels, streaming state, and code word framing.

All kernels operate on ``bytes``-like data with big-endian blocks. The
Koopman kernels never hold an intermediate wider than the check value plus
one block, so they mirror what a fixed-width C implementation computes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from operator import xor
from typing import Callable, Iterable

from .algorithms import AlgorithmSpec, Family
from .errors import BadCheckLength, EmptyDataWord, StateConsumed, WrongFamily

__all__ = [
    "CodeWord",
    "StreamState",
    "checksum",
    "dual_sum_checksum",
    "encode_codeword",
    "koopman_checksum",
    "koopman_parity_checksum",
    "parity_bit",
    "single_sum_checksum",
    "stream_finalize",
    "stream_init",
    "stream_update",
    "verify_codeword",
]


def parity_bit(data: Iterable[int]) -> int:
    """Return the XOR of every bit in ``data`` (0 for no data)."""
    folded = reduce(xor, data, 0)
    folded ^= folded >> 4
    folded ^= folded >> 2
    folded ^= folded >> 1
    return folded & 1


def _int_parity(value: int) -> int:
    return parity_bit(value.to_bytes((value.bit_length() + 7) // 8, "big"))


def _require(data, spec: AlgorithmSpec, *families: Family) -> None:
    if spec.family not in families:
        raise WrongFamily(f"{spec.label} is a {spec.family.value} spec")
    if len(data) == 0:
        raise EmptyDataWord("checksum of an empty data word is undefined")


def _koopman_fold(
    data: bytes,
    modulus: int,
    seed: int,
    block_bytes: int,
    zero_bits: int,
    observe: Callable[[int], None] | None = None,
) -> int:
    """Pipelined shift/add/mod over ``data`` followed by ``zero_bits`` zeros.

    Computes ``(V << zero_bits) % modulus`` where ``V`` is the data word as a
    big-endian integer with ``seed`` XORed into its first block. ``observe``
    receives every dividend before reduction.
    """
    first = min(block_bytes, len(data))
    dividend = int.from_bytes(data[:first], "big") ^ seed
    if observe:
        observe(dividend)
    total = dividend % modulus
    for pos in range(first, len(data), block_bytes):
        block = data[pos : pos + block_bytes]
        dividend = (total << (8 * len(block))) + int.from_bytes(block, "big")
        if observe:
            observe(dividend)
        total = dividend % modulus
    step = 8 * block_bytes
    while zero_bits:
        shift = min(step, zero_bits)
        dividend = total << shift
        if observe:
            observe(dividend)
        total = dividend % modulus
        zero_bits -= shift
    return total


def koopman_checksum(data: bytes, spec: AlgorithmSpec) -> int:
    """Koopman checksum: one running sum shifted by a block before each add.

    >>> from modsum import PRESETS
    >>> hex(koopman_checksum(bytes([0x12, 0x34, 0x56]), PRESETS["koopman8"]))
    '0xc8'
    """
    _require(data, spec, Family.KOOPMAN)
    return _koopman_fold(bytes(data), spec.modulus, spec.seed, spec.block_bytes, spec.check_bits)


def _parity_pack(total: int, data: bytes, spec: AlgorithmSpec) -> int:
    seed_bytes = spec.seed.to_bytes(spec.block_bytes, "big")
    sum_bytes = total.to_bytes((spec.sum_bits + 7) // 8, "big")
    return (total << 1) | parity_bit(seed_bytes + bytes(data) + sum_bytes)


def koopman_parity_checksum(data: bytes, spec: AlgorithmSpec) -> int:
    """(k-1)-bit Koopman sum with a parity bit appended as bit 0.

    The parity covers the seed, every data byte, and the sum itself, so any
    odd number of bit flips anywhere in the code word is detected.
    """
    _require(data, spec, Family.KOOPMAN_PARITY)
    data = bytes(data)
    total = _koopman_fold(data, spec.modulus, spec.seed, spec.block_bytes, spec.check_bits)
    return _parity_pack(total, data, spec)


def _blocks(data: bytes, block_bytes: int):
    for pos in range(0, len(data), block_bytes):
        block = data[pos : pos + block_bytes]
        # zero-pad a short final block on the low-order side
        yield int.from_bytes(block, "big") << (8 * (block_bytes - len(block)))


def single_sum_checksum(data: bytes, spec: AlgorithmSpec) -> int:
    _require(data, spec, Family.SINGLE_SUM)
    total = spec.seed
    for block in _blocks(bytes(data), spec.block_bytes):
        total = (total + block) % spec.modulus
    return total


def dual_sum_checksum(data: bytes, spec: AlgorithmSpec) -> int:
    """Fletcher-style dual sum; SumA occupies the high half of the result."""
    _require(data, spec, Family.DUAL_SUM)
    sum_a = sum_b = spec.seed
    for block in _blocks(bytes(data), spec.block_bytes):
        sum_a = (sum_a + block) % spec.modulus
        sum_b = (sum_b + sum_a) % spec.modulus
    return (sum_a << (spec.check_bits // 2)) | sum_b


_KERNELS = {
    Family.SINGLE_SUM: single_sum_checksum,
    Family.DUAL_SUM: dual_sum_checksum,
    Family.KOOPMAN: koopman_checksum,
    Family.KOOPMAN_PARITY: koopman_parity_checksum,
}


def checksum(data: bytes, spec: AlgorithmSpec) -> int:
    """Compute the check value of ``data`` for any family."""
    return _KERNELS[spec.family](data, spec)


class StreamState:
    """Incremental checksum over data delivered in arbitrary chunks.

    Chunks need not align with blocks; partial blocks are buffered until
    the next chunk or :meth:`finalize`. ``finalize`` equals the one-shot
    kernel on the concatenated data.
    """

    def __init__(self, spec: AlgorithmSpec, first_block: bytes = b"") -> None:
        self.spec = spec
        self.sum = spec.seed
        self.sum_b = spec.seed
        self.psum = reduce(xor, spec.seed.to_bytes(spec.block_bytes, "big"), 0)
        self.bytes_seen = 0
        self._pending = b""
        self._started = False
        self._done = False
        if first_block:
            self.update(first_block)

    def update(self, chunk: bytes) -> "StreamState":
        if self._done:
            raise StateConsumed("stream already finalized")
        chunk = bytes(chunk)
        self.bytes_seen += len(chunk)
        if self.spec.family is Family.KOOPMAN_PARITY:
            self.psum = reduce(xor, chunk, self.psum)
        buf = self._pending + chunk
        bb = self.spec.block_bytes
        full = len(buf) - len(buf) % bb
        for pos in range(0, full, bb):
            self._absorb(int.from_bytes(buf[pos : pos + bb], "big"), bb)
        self._pending = buf[full:]
        return self

    def _absorb(self, block: int, width: int) -> None:
        spec = self.spec
        m = spec.modulus
        if spec.family in (Family.KOOPMAN, Family.KOOPMAN_PARITY):
            if not self._started:
                self.sum = (block ^ spec.seed) % m
            else:
                self.sum = ((self.sum << (8 * width)) + block) % m
        elif spec.family is Family.SINGLE_SUM:
            self.sum = (self.sum + block) % m
        else:
            self.sum = (self.sum + block) % m
            self.sum_b = (self.sum_b + self.sum) % m
        self._started = True

    def finalize(self) -> int:
        if self._done:
            raise StateConsumed("stream already finalized")
        if self.bytes_seen == 0:
            raise EmptyDataWord("checksum of an empty data word is undefined")
        self._done = True
        spec = self.spec
        if self._pending:
            tail = self._pending
            if spec.family in (Family.KOOPMAN, Family.KOOPMAN_PARITY):
                self._absorb(int.from_bytes(tail, "big"), len(tail))
            else:
                pad = spec.block_bytes - len(tail)
                self._absorb(int.from_bytes(tail, "big") << (8 * pad), spec.block_bytes)
            self._pending = b""

        if spec.family is Family.SINGLE_SUM:
            return self.sum
        if spec.family is Family.DUAL_SUM:
            return (self.sum << (spec.check_bits // 2)) | self.sum_b

        remaining, step = spec.check_bits, 8 * spec.block_bytes
        while remaining:
            shift = min(step, remaining)
            self.sum = (self.sum << shift) % spec.modulus
            remaining -= shift
        if spec.family is Family.KOOPMAN:
            return self.sum
        sum_bytes = self.sum.to_bytes((spec.sum_bits + 7) // 8, "big")
        return (self.sum << 1) | parity_bit(bytes([self.psum]) + sum_bytes)


def stream_init(spec: AlgorithmSpec, first_block: bytes = b"") -> StreamState:
    return StreamState(spec, first_block)


def stream_update(state: StreamState, block: bytes) -> StreamState:
    return state.update(block)


def stream_finalize(state: StreamState) -> int:
    return state.finalize()


@dataclass(frozen=True)
class CodeWord:
    """A data word followed by its big-endian check value."""

    data: bytes
    check: bytes

    @property
    def check_value(self) -> int:
        return int.from_bytes(self.check, "big")

    def to_bytes(self) -> bytes:
        return self.data + self.check

    @classmethod
    def from_bytes(cls, raw: bytes, spec: AlgorithmSpec) -> "CodeWord":
        """Split a raw code word; the last ``ceil(k/8)`` bytes are the check."""
        n = spec.check_bytes
        if len(raw) <= n:
            raise BadCheckLength(
                f"{len(raw)} bytes cannot hold a data word plus a {n}-byte check value"
            )
        return cls(bytes(raw[:-n]), bytes(raw[-n:]))


def encode_codeword(data: bytes, spec: AlgorithmSpec) -> CodeWord:
    data = bytes(data)
    value = checksum(data, spec)
    return CodeWord(data, value.to_bytes(spec.check_bytes, "big"))


def verify_codeword(cw: CodeWord, spec: AlgorithmSpec) -> bool:
    if len(cw.check) != spec.check_bytes:
        raise BadCheckLength(f"expected {spec.check_bytes} check bytes, got {len(cw.check)}")
    return checksum(cw.data, spec) == cw.check_value
