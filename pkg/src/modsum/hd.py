"""Data-independent Hamming distance analysis for Koopman checksums.

A Koopman check value is ``V * 2^k mod M``, so flipping data bit ``e`` (its
exponent in ``V * 2^k``) moves the recomputed check by ``+-2^e mod M``.  Two
mechanisms defeat HD=3:

* data-data: two data flips cancel, ``2^e1 = +-2^e2 (mod M)``;
* data-check: one data flip moves the check by exactly the change caused by
  one check-bit flip, ``(v +- 2^e) mod M == v ^ 2^c``.

Both reduce to ``t*``, the least ``t > 0`` with ``2^t = +-1 (mod M)``.
The parity variant adds a parity bit over the whole code word, so every
odd-weight fault is caught and the same two mechanisms (on the
``k - 1``-bit sum field) bound HD=4.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

from .algorithms import AlgorithmSpec, Family
from .checksum import CodeWord, encode_codeword
from .errors import EvenModulus, InvalidSpec
from .faults import FaultPattern, apply_faults

__all__ = [
    "CancellationWitness",
    "RolloverReport",
    "ScreenResult",
    "bit_weight",
    "cancellation_witness",
    "dual_sum_rollover",
    "multiplicative_order",
    "parity_hd4_scan",
    "pm1_order",
    "rollover_report",
    "screen_moduli",
    "two_bit_cancellation_scan",
]

# Short words only reach part of the residue range; give up on a (c, e)
# pair after this many candidate residues.
_MAX_RESIDUE_TRIES = 1 << 16

ROLLOVER_COLUMNS = ["modulus", "k", "family", "hd", "max_len_bytes", "first_fail_bytes"]


def bit_weight(byte_index: int, bit_in_byte: int, data_len: int, k: int, modulus: int) -> int:
    """Residue added (or subtracted) by flipping one data bit."""
    return pow(2, 8 * (data_len - 1 - byte_index) + bit_in_byte + k, modulus)


@lru_cache(maxsize=None)
def _small_primes(limit: int = 1 << 16) -> tuple[int, ...]:
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, limit + 1, i)))
    return tuple(i for i, v in enumerate(sieve) if v)


def _factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    for p in _small_primes():
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    if n > 1:
        if n > (1 << 32):
            # trial division only certifies primality up to 2^32
            raise ValueError("moduli above 2^32 are not supported")
        out[n] = out.get(n, 0) + 1
    return out


def _carmichael(factors: dict[int, int]) -> int:
    lam = 1
    for p, e in factors.items():
        if p == 2:
            part = 1 if e == 1 else 2 if e == 2 else 1 << (e - 2)
        else:
            part = (p - 1) * p ** (e - 1)
        lam = lam * part // math.gcd(lam, part)
    return lam


def multiplicative_order(base: int, modulus: int) -> int:
    """Least ``t > 0`` with ``base^t = 1 (mod modulus)``; needs gcd = 1."""
    if math.gcd(base, modulus) != 1:
        raise ValueError(f"{base} is not invertible mod {modulus}")
    if modulus == 1:
        return 1
    order = _carmichael(_factor(modulus))
    for q in _factor(order):
        while order % q == 0 and pow(base, order // q, modulus) == 1:
            order //= q
    return order


@lru_cache(maxsize=4096)
def pm1_order(modulus: int) -> int:
    """Least ``t > 0`` with ``2^t = +-1 (mod modulus)``.

    The exponents with ``2^t = +-1`` form the multiples of this value; when
    -1 is a power of two it sits at half the multiplicative order.
    """
    if modulus % 2 == 0:
        raise EvenModulus(f"modulus {modulus} is even")
    if modulus < 3:
        raise InvalidSpec("modulus must be >= 3")
    order = multiplicative_order(2, modulus)
    if order % 2 == 0 and pow(2, order // 2, modulus) == modulus - 1:
        return order // 2
    return order


def _residues(step: int, check_bit: int, modulus: int):
    """Yield ``(v, s)`` with ``(v + s*step) % M == v ^ 2^c``, ascending in ``v``."""
    flip = 1 << check_bit
    for v in range(modulus):
        target = v ^ flip
        if target >= modulus:
            continue
        for sign in (1, -1):
            if (v + sign * step) % modulus == target:
                yield v, sign


def _short_word_residue(
    modulus: int, shift: int, n: int, e: int, c: int, step: int
) -> tuple[int, int] | None:
    """``(data bit value, residue)`` for the first n-byte word whose flip at
    ``e`` matches flipping check bit ``c``, or None."""
    flip, pos = 1 << c, e - shift
    for word in range(1 << (8 * n)):
        v = (word << shift) % modulus
        target = v ^ flip
        if target >= modulus:
            continue
        bit = (word >> pos) & 1
        if (v + (step if bit == 0 else -step)) % modulus == target:
            return bit, v
    return None


def _realize(
    modulus: int, shift: int, n: int, fixed: dict[int, int], residue: int, build: bool = True
) -> int | bool | None:
    """A data value ``V < 256^n`` with ``V * 2^shift = residue (mod M)``.

    ``fixed`` maps bit indices of ``V`` to required values.  A free byte
    window wide enough to hold any residue is solved for directly; short
    words fall back to walking the residue class.  With ``build`` False
    only reachability is reported (True or None), which avoids materializing
    multi-megabyte integers for long words.
    """
    busy = {bit // 8 for bit in fixed}  # byte index counted from the low end
    width = 1
    while (1 << (8 * width)) < modulus:
        width += 1
    for low in range(0, n - width + 1):
        if busy & set(range(low, low + width)):
            continue
        if not build:
            return True
        current = sum(pow(2, bit + shift, modulus) for bit, val in fixed.items() if val)
        weight = pow(2, 8 * low + shift, modulus)
        fill = (residue - current) * pow(weight, -1, modulus) % modulus
        value = fill << (8 * low)
        for bit, val in fixed.items():
            value |= val << bit
        return value
    target = residue * pow(pow(2, shift, modulus), -1, modulus) % modulus
    for x in range(target, 1 << (8 * n), modulus):
        if all((x >> bit) & 1 == val for bit, val in fixed.items()):
            return x if build else True
    return None


@dataclass(frozen=True)
class CancellationWitness:
    """An undetectable low-weight fault for one data word length.

    ``data_exponents`` lists the exponents (in ``V * 2^shift``) of the data
    bits flipped, with ``data_values`` their required pre-fault values.
    ``check_bit`` is the flipped bit of the modular-sum field (or None),
    and ``residue`` the sum value the data word must produce.
    """

    modulus: int
    shift: int
    length_bytes: int
    kind: str
    data_exponents: tuple[int, ...]
    data_values: tuple[int, ...]
    check_bit: int | None = None
    residue: int | None = None

    def data_positions(self) -> list[int]:
        """Code word bit indices of the flipped data bits."""
        out = []
        n = self.length_bytes
        for e in self.data_exponents:
            bitpos = e - self.shift  # bit index within V, 0 = LSB of last byte
            byte = n - 1 - bitpos // 8
            out.append(8 * byte + bitpos % 8)
        return out

    def pattern(self, spec: AlgorithmSpec) -> FaultPattern:
        positions = self.data_positions()
        if self.check_bit is not None:
            offset = 1 if spec.family is Family.KOOPMAN_PARITY else 0
            positions.append(8 * self.length_bytes + self.check_bit + offset)
        return FaultPattern(tuple(positions))

    def data_value(self) -> int:
        """Big-endian value ``V`` (seed already applied) realizing the witness."""
        k = self.shift
        fixed = {e - k: bit for e, bit in zip(self.data_exponents, self.data_values)}
        if self.residue is None:
            return sum(bit << pos for pos, bit in fixed.items())
        value = _realize(self.modulus, k, self.length_bytes, fixed, self.residue)
        if value is None:
            raise ValueError("witness residue is not reachable at this length")
        return value

    def codeword(self, spec: AlgorithmSpec) -> tuple[CodeWord, FaultPattern]:
        """Construct ``(clean code word, fault pattern)`` for ``spec``."""
        n = self.length_bytes
        raw = bytearray(self.data_value().to_bytes(n, "big"))
        first = min(spec.block_bytes, n)
        seed_bytes = (spec.seed << (8 * (n - first))).to_bytes(n + spec.block_bytes, "big")[-n:]
        for i in range(n):
            raw[i] ^= seed_bytes[i]
        return encode_codeword(bytes(raw), spec), self.pattern(spec)

    def verify(self, spec: AlgorithmSpec) -> bool:
        """True if the witness fault passes verification (i.e. is undetected)."""
        from .checksum import verify_codeword

        cw, pattern = self.codeword(spec)
        return verify_codeword(apply_faults(cw, pattern, spec.check_bits), spec)


def _check_inputs(modulus: int, field_bits: int) -> None:
    if modulus % 2 == 0:
        raise EvenModulus(f"modulus {modulus} is even")
    if modulus < 3 or modulus > (1 << field_bits):
        raise InvalidSpec(f"modulus {modulus} does not fit a {field_bits}-bit field")


def _witness_at(modulus: int, shift: int, field_bits: int, n: int) -> CancellationWitness | None:
    t = pm1_order(modulus)
    lo, hi = shift, 8 * n + shift - 1
    best = None
    # data-check: exponent e and check bit c with e - c a multiple of t
    for c in range(field_bits):
        if (1 << c) >= modulus:
            break
        q = max(1, -(-(lo - c) // t))
        e = c + q * t
        if e > hi:
            continue
        step = pow(2, e, modulus)
        assert step in ((1 << c) % modulus, (-(1 << c)) % modulus)
        if n <= 2:
            # short words: try every data word instead of every residue
            found = _short_word_residue(modulus, shift, n, e, c, step)
            if found is not None:
                bit, v = found
                cand = CancellationWitness(modulus, shift, n, "data-check", (e,), (bit,), c, v)
                if best is None or e < best.data_exponents[0]:
                    best = cand
            continue
        for tries, (v, sign) in enumerate(_residues(step, c, modulus)):
            bit = 0 if sign > 0 else 1
            if _realize(modulus, shift, n, {e - shift: bit}, v, build=False):
                cand = CancellationWitness(modulus, shift, n, "data-check", (e,), (bit,), c, v)
                if best is None or e < best.data_exponents[0]:
                    best = cand
                break
            if tries >= _MAX_RESIDUE_TRIES:
                break
    if best is not None:
        return best
    # data-data: exponents t apart
    if lo + t <= hi:
        e1, e2 = lo, lo + t
        if pow(2, t, modulus) == 1:
            values = (0, 1)
        else:
            values = (0, 0)
        return CancellationWitness(modulus, shift, n, "data-data", (e1, e2), values)
    return None


def _first_vulnerable(modulus: int, shift: int, field_bits: int) -> int:
    t = pm1_order(modulus)
    first = -(-(t + 1) // 8)  # data-data needs 8n - 1 >= t
    for c in range(field_bits):
        if (1 << c) >= modulus:
            break
        e = c + t * max(1, -(-(shift - c) // t))
        first = min(first, max(1, -(-(e - shift + 1) // 8)))
    return first


def _first_witness(
    modulus: int, shift: int, field_bits: int, max_data_bytes: int | None
) -> CancellationWitness | None:
    """Witness at the first vulnerable length, or None past the horizon.

    The exponent bound is exact except in words too short to produce the
    required residue, so step forward until a witness can be built.
    """
    n = _first_vulnerable(modulus, shift, field_bits)
    data_data = -(-(pm1_order(modulus) + 1) // 8)
    while max_data_bytes is None or n <= max_data_bytes:
        witness = _witness_at(modulus, shift, field_bits, n)
        if witness is not None or n >= data_data:
            return witness
        n += 1
    return None


def cancellation_witness(modulus: int, k: int, length_bytes: int) -> CancellationWitness | None:
    """An undetectable 2-bit fault for a Koopman-k checksum at this length."""
    _check_inputs(modulus, k)
    return _witness_at(modulus, k, k, length_bytes)


def two_bit_cancellation_scan(
    modulus: int, k: int, max_data_bytes: int | None = None
) -> CancellationWitness | None:
    """First data word length with an undetectable 2-bit fault.

    Returns the witness at that length, or None when the first vulnerable
    length exceeds ``max_data_bytes``.
    """
    _check_inputs(modulus, k)
    return _first_witness(modulus, k, k, max_data_bytes)


def parity_hd4_scan(
    modulus: int, k: int, max_data_bytes: int | None = None
) -> CancellationWitness | None:
    """First length at which a (k-1)-bit Koopman sum plus parity drops below HD=4.

    Odd-weight faults always flip the overall parity and are caught, so the
    limiting faults are the 2-bit cancellations of the sum field; the data
    is still shifted by ``k`` zero bits.
    """
    _check_inputs(modulus, k - 1)
    return _first_witness(modulus, k, k - 1, max_data_bytes)


def parity_witness(modulus: int, k: int, length_bytes: int) -> CancellationWitness | None:
    _check_inputs(modulus, k - 1)
    return _witness_at(modulus, k, k - 1, length_bytes)


def dual_sum_rollover(modulus: int, block_bytes: int) -> int:
    """First data word length (bytes) at which a dual-sum checksum loses HD=3.

    A data flip in block ``i`` moves SumB by ``(blocks - i) * delta``, which
    vanishes once ``M`` blocks are present; the last block may be partial.
    """
    if modulus < 2:
        raise InvalidSpec("modulus must be >= 2")
    return (modulus - 1) * block_bytes + 1


@dataclass
class RolloverReport:
    modulus: int
    k: int
    family: Family
    hd: int
    max_hd_length_bytes: int
    first_fail_length_bytes: int | None
    witness: CancellationWitness | None = None
    horizon: int | None = None

    def row(self) -> list:
        first = "" if self.first_fail_length_bytes is None else self.first_fail_length_bytes
        return [self.modulus, self.k, self.family.value, self.hd, self.max_hd_length_bytes, first]

    def to_csv(self) -> str:
        return _write_csv([self.row()])


def _write_csv(rows: Iterable[list]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(ROLLOVER_COLUMNS)
    writer.writerows(rows)
    return out.getvalue()


def rollover_report(spec: AlgorithmSpec, max_data_bytes: int | None = None) -> RolloverReport:
    """HD-holding length for ``spec``, optionally capped at a search horizon.

    When nothing fails within ``max_data_bytes`` the report's max length is
    the horizon itself and ``first_fail_length_bytes`` is None.
    """
    fam, m, k = spec.family, spec.modulus, spec.check_bits
    if fam is Family.KOOPMAN:
        hd, witness = 3, two_bit_cancellation_scan(m, k, max_data_bytes)
    elif fam is Family.KOOPMAN_PARITY:
        hd, witness = 4, parity_hd4_scan(m, k, max_data_bytes)
    elif fam is Family.DUAL_SUM:
        first = dual_sum_rollover(m, spec.block_bytes)
        if max_data_bytes is not None and first > max_data_bytes:
            return RolloverReport(m, k, fam, 3, max_data_bytes, None, None, max_data_bytes)
        return RolloverReport(m, k, fam, 3, first - 1, first, None, max_data_bytes)
    else:
        raise InvalidSpec("single-sum checksums have no HD=3 region to roll over")
    if witness is None:
        return RolloverReport(m, k, fam, hd, max_data_bytes, None, None, max_data_bytes)
    n = witness.length_bytes
    return RolloverReport(m, k, fam, hd, n - 1, n, witness, max_data_bytes)


@dataclass
class ScreenResult:
    k: int
    hd: int
    search_range: tuple[int, int]
    ranking: list[tuple[int, int]] = field(default_factory=list)

    @property
    def best(self) -> int:
        return self.ranking[0][0]

    def to_csv(self) -> str:
        family = Family.KOOPMAN if self.hd == 3 else Family.KOOPMAN_PARITY
        rows = [[m, self.k, family.value, self.hd, length, length + 1] for m, length in self.ranking]
        return _write_csv(rows)


def max_hd_length(modulus: int, k: int, hd: int = 3) -> int:
    """Longest data word (bytes) keeping the target HD; 0 for even moduli."""
    if modulus % 2 == 0 or modulus < 3:
        return 0
    if hd not in (3, 4):
        raise ValueError("hd must be 3 (Koopman) or 4 (Koopman + parity)")
    field_bits = k if hd == 3 else k - 1
    if modulus > (1 << field_bits):
        return 0
    return _first_witness(modulus, k, field_bits, None).length_bytes - 1


def screen_moduli(
    k: int, modulus_range: tuple[int, int] | None = None, hd: int = 3, include_even: bool = False
) -> ScreenResult:
    """Rank moduli by the longest data word that keeps the target HD.

    ``modulus_range`` is inclusive.  The default range covers moduli that
    need the full sum field: ``(2^(f-1), 2^f)`` with ``f = k`` for HD=3 and
    ``f = k - 1`` for HD=4; for fields wider than 16 bits only the top 512
    candidates are screened.  Ties go to the larger modulus.
    """
    f = k if hd == 3 else k - 1
    if modulus_range is None:
        hi = (1 << f) - 1
        lo = (1 << (f - 1)) + 1 if f <= 16 else hi - 1023
        modulus_range = (lo, hi)
    lo, hi = modulus_range
    if hi > (1 << f):
        raise InvalidSpec(f"moduli above 2^{f} do not fit the check field")
    ranking = []
    for m in range(max(lo, 2), hi + 1):
        if m % 2 == 0 and not include_even:
            continue
        ranking.append((m, max_hd_length(m, k, hd)))
    ranking.sort(key=lambda item: (-item[1], -item[0]))
    return ScreenResult(k, hd, (lo, hi), ranking)
