"""Probability of undetected fault under independent bit errors.

For a code word of ``N = 8 * length + k`` bits and bit error ratio ``ber``,
the probability that exactly ``m`` bits flip is the binomial weight
``C(N, m) ber^m (1 - ber)^(N - m)``.  P_ud is the sum of those weights times
the undetected fraction ``u(m)``.  Weights are evaluated in log space; the
tail beyond ``m_max`` uses ``u = 2^-k`` and the binomial survival function.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from scipy import stats

from .faults import FractionTable

__all__ = [
    "PudCurve",
    "binomial_weight",
    "curve_sweep",
    "ideal_curve",
    "pud_at",
    "pud_from_fractions",
    "pud_sigma",
]

PUD_COLUMNS = ["algorithm", "ber", "length_bytes", "pud"]
DEFAULT_M_MAX = 8
DEFAULT_BER = 1e-6


def binomial_weight(n_bits: int, m: int, ber: float) -> float:
    """``C(N, m) ber^m (1-ber)^(N-m)`` computed through logarithms."""
    if m < 0 or m > n_bits:
        return 0.0
    if ber <= 0.0:
        return 1.0 if m == 0 else 0.0
    if ber >= 1.0:
        return 1.0 if m == n_bits else 0.0
    log_c = math.lgamma(n_bits + 1) - math.lgamma(m + 1) - math.lgamma(n_bits - m + 1)
    return math.exp(log_c + m * math.log(ber) + (n_bits - m) * math.log1p(-ber))


def pud_from_fractions(
    n_bits: int,
    ber: float,
    fraction: Callable[[int], float | None] | Mapping[int, float],
    k: int,
    m_max: int = DEFAULT_M_MAX,
    tail: bool = True,
) -> float:
    """P_ud for explicit per-m undetected fractions.

    ``fraction(m)`` returning None (or a missing mapping key) falls back to
    ``2^-k``.  With ``tail`` the weight of all m > m_max is added at ``2^-k``.
    """
    lookup = fraction.get if isinstance(fraction, Mapping) else fraction
    floor = 2.0**-k
    total = 0.0
    top = min(m_max, n_bits)
    for m in range(1, top + 1):
        u = lookup(m)
        u = floor if u is None else u
        if u:
            total += binomial_weight(n_bits, m, ber) * u
    if tail and top < n_bits and ber > 0.0:
        total += floor * float(stats.binom.sf(top, n_bits, ber))
    return min(max(total, 0.0), 1.0)


def pud_at(
    table: FractionTable,
    length_bytes: int,
    k: int,
    ber: float,
    m_max: int = DEFAULT_M_MAX,
    tail: bool = True,
) -> float:
    n_bits = 8 * length_bytes + k
    return pud_from_fractions(
        n_bits, ber, lambda m: table.fraction(length_bytes, m), k, m_max, tail
    )


def pud_sigma(
    table: FractionTable, length_bytes: int, k: int, ber: float, m_max: int = DEFAULT_M_MAX
) -> float:
    """Binomial standard error of :func:`pud_at` from the sampled cells."""
    n_bits = 8 * length_bytes + k
    var = 0.0
    for m in range(1, min(m_max, n_bits) + 1):
        cell = table.cells.get((length_bytes, m))
        if cell is not None:
            var += (binomial_weight(n_bits, m, ber) * cell.sigma) ** 2
    return math.sqrt(var)


@dataclass
class PudCurve:
    algorithm: str
    ber: float
    points: list[tuple[int, float]] = field(default_factory=list)

    def __post_init__(self) -> None:
        lengths = [n for n, _ in self.points]
        if any(b <= a for a, b in zip(lengths, lengths[1:])):
            raise ValueError("curve lengths must be strictly increasing")

    def __len__(self) -> int:
        return len(self.points)

    def rows(self):
        for n, p in self.points:
            yield [self.algorithm, repr(self.ber), n, repr(p)]

    def to_csv(self, header: bool = True) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        if header:
            writer.writerow(PUD_COLUMNS)
        writer.writerows(self.rows())
        return out.getvalue()


def ideal_curve(hd: int, k: int, lengths: Iterable[int], ber: float) -> PudCurve:
    """Idealized checksum: all faults below ``hd`` caught, ``2^-k`` of the rest missed."""
    if hd < 1:
        raise ValueError("hd must be >= 1")
    points = []
    for n in lengths:
        n_bits = 8 * n + k
        zero = {m: 0.0 for m in range(1, hd)}
        points.append((n, pud_from_fractions(n_bits, ber, zero, k, m_max=hd - 1)))
    return PudCurve(f"ideal_hd{hd}_k{k}", ber, points)


def curve_sweep(
    label: str,
    table: FractionTable,
    lengths: Iterable[int],
    ber: float,
    k: int,
    m_max: int = DEFAULT_M_MAX,
) -> PudCurve:
    points = [(n, pud_at(table, n, k, ber, m_max)) for n in lengths]
    return PudCurve(label, ber, points)
