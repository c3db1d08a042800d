"""Bit-flip fault injection and undetected-fault fraction measurement.

Bit numbering across a code word of ``n`` data bytes: index ``b < 8n`` is
bit ``b % 8`` (LSB = 0) of data byte ``b // 8``; index ``8n + c`` is bit
``c`` of the check value integer.  Pad bits above ``k`` in the check bytes
are never faulted.

Sampled estimates draw a fresh data word and a uniform m-subset of bit
positions per trial.  Random streams are derived from
``SeedSequence([rng_seed, length, m])``, so every (length, m) cell is
reproducible on its own and cells can run in any order or in parallel.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, islice

import numpy as np

from .algorithms import AlgorithmSpec
from .checksum import CodeWord
from .errors import BadFaultPosition, TooManyPatterns
from .vectorized import batch_checksum, delta_checks

__all__ = [
    "Cell",
    "DataModel",
    "FaultPattern",
    "FractionTable",
    "TrialConfig",
    "apply_faults",
    "estimate_undetected_fraction",
    "exhaustive_undetected_count",
    "sweep",
]

FRACTION_COLUMNS = ["algorithm", "length_bytes", "m", "mode", "total", "undetected", "fraction"]


class DataModel(str, enum.Enum):
    RANDOM_BYTES = "RandomBytes"
    ALL_ZERO = "AllZero"


@dataclass(frozen=True)
class FaultPattern:
    positions: tuple[int, ...]

    def __post_init__(self) -> None:
        pos = tuple(sorted(set(int(p) for p in self.positions)))
        if len(pos) != len(tuple(self.positions)):
            raise BadFaultPosition("fault positions must be distinct")
        if pos and pos[0] < 0:
            raise BadFaultPosition(f"negative fault position {pos[0]}")
        object.__setattr__(self, "positions", pos)

    def __len__(self) -> int:
        return len(self.positions)


def apply_faults(cw: CodeWord, pattern: FaultPattern, check_bits: int | None = None) -> CodeWord:
    """Return ``cw`` with every bit named in ``pattern`` inverted.

    ``check_bits`` bounds the faultable check bits; it defaults to the full
    width of the check bytes.
    """
    n = len(cw.data)
    if check_bits is None:
        check_bits = 8 * len(cw.check)
    data = bytearray(cw.data)
    check = cw.check_value
    for p in pattern.positions:
        if p < 8 * n:
            data[p // 8] ^= 1 << (p % 8)
        elif p < 8 * n + check_bits:
            check ^= 1 << (p - 8 * n)
        else:
            raise BadFaultPosition(f"bit {p} outside a {8 * n + check_bits}-bit code word")
    return CodeWord(bytes(data), check.to_bytes(len(cw.check), "big"))


@dataclass(frozen=True)
class TrialConfig:
    """Sampling parameters.

    ``patterns_per_word`` > 1 reuses each drawn data word for that many
    consecutive trials; ``engine`` picks between re-running the batch kernel
    on corrupted words ("direct") and incremental recomputation ("delta").
    Both engines give identical counts for identical draws.
    """

    trials: int = 1_000_000
    rng_seed: int = 0
    data_model: DataModel = DataModel.RANDOM_BYTES
    patterns_per_word: int = 1
    engine: str = "direct"

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.patterns_per_word < 1:
            raise ValueError("patterns_per_word must be >= 1")
        if self.engine not in ("direct", "delta"):
            raise ValueError(f"unknown engine {self.engine!r}")
        object.__setattr__(self, "data_model", DataModel(self.data_model))


@dataclass
class Cell:
    undetected: int
    total: int
    mode: str = "sampled"

    @property
    def fraction(self) -> float:
        return self.undetected / self.total

    @property
    def sigma(self) -> float:
        """Binomial standard error of the fraction (0 for exhaustive cells)."""
        if self.mode == "exhaustive":
            return 0.0
        p = self.fraction
        return math.sqrt(p * (1.0 - p) / self.total)


@dataclass
class FractionTable:
    algorithm: str
    cells: dict[tuple[int, int], Cell] = field(default_factory=dict)

    def __getitem__(self, key: tuple[int, int]) -> Cell:
        return self.cells[key]

    def __contains__(self, key) -> bool:
        return key in self.cells

    def __len__(self) -> int:
        return len(self.cells)

    def fraction(self, length: int, m: int) -> float | None:
        cell = self.cells.get((length, m))
        return None if cell is None else cell.fraction

    def lengths(self) -> list[int]:
        return sorted({n for n, _ in self.cells})

    def rows(self):
        for (n, m), cell in sorted(self.cells.items()):
            yield [self.algorithm, n, m, cell.mode, cell.total, cell.undetected, repr(cell.fraction)]

    def to_csv(self, fh=None) -> str | None:
        out = fh if fh is not None else io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(FRACTION_COLUMNS)
        writer.writerows(self.rows())
        return None if fh is not None else out.getvalue()

    @classmethod
    def from_csv(cls, fh) -> list["FractionTable"]:
        tables: dict[str, FractionTable] = {}
        for row in csv.DictReader(fh):
            table = tables.setdefault(row["algorithm"], cls(row["algorithm"]))
            key = (int(row["length_bytes"]), int(row["m"]))
            table.cells[key] = Cell(int(row["undetected"]), int(row["total"]), row["mode"])
        return list(tables.values())


def _cell_rng(rng_seed: int, length: int, m: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([rng_seed, length, m]))


def _draw_subsets(rng: np.random.Generator, rows: int, n_bits: int, m: int) -> np.ndarray:
    """Uniform m-subsets of range(n_bits), one per row."""
    if m > n_bits:
        raise ValueError(f"cannot choose {m} of {n_bits} bits")
    if n_bits <= 512 or 4 * m > n_bits:
        keys = rng.random((rows, n_bits))
        return np.argpartition(keys, m - 1, axis=1)[:, :m].astype(np.int64)
    pos = rng.integers(0, n_bits, size=(rows, m), dtype=np.int64)
    while True:
        srt = np.sort(pos, axis=1)
        bad = np.nonzero((np.diff(srt, axis=1) == 0).any(axis=1))[0]
        if bad.size == 0:
            return pos
        pos[bad] = rng.integers(0, n_bits, size=(bad.size, m), dtype=np.int64)


def _flip_data(data: np.ndarray, positions: np.ndarray, length: int) -> np.ndarray:
    corrupted = data.copy()
    rows = np.broadcast_to(np.arange(data.shape[0])[:, None], positions.shape)
    in_data = positions < 8 * length
    r, p = rows[in_data], positions[in_data]
    np.bitwise_xor.at(corrupted, (r, p // 8), (1 << (p % 8)).astype(np.uint8))
    return corrupted


def _check_masks(positions: np.ndarray, length: int) -> np.ndarray:
    offs = positions - 8 * length
    bits = np.where(offs >= 0, np.left_shift(np.uint64(1), np.maximum(offs, 0).astype(np.uint64)), 0)
    return np.bitwise_or.reduce(bits.astype(np.uint64), axis=1)


def _undetected(
    spec: AlgorithmSpec,
    data: np.ndarray,
    checks: np.ndarray,
    positions: np.ndarray,
    engine: str,
) -> np.ndarray:
    """Boolean mask: rows where the corrupted code word still verifies."""
    length = data.shape[1]
    stored = checks ^ _check_masks(positions, length)
    if engine == "direct":
        recomputed = batch_checksum(_flip_data(data, positions, length), spec)
    else:
        byte_idx = np.minimum(positions // 8, length - 1)
        rows = np.arange(data.shape[0])[:, None]
        bits = (data[rows, byte_idx] >> (positions % 8).astype(np.uint8)) & 1
        recomputed = delta_checks(spec, length, checks, bits, positions)
    return recomputed == stored


def _draw_words(rng, rows: int, length: int, model: DataModel) -> np.ndarray:
    if model is DataModel.ALL_ZERO:
        return np.zeros((rows, length), dtype=np.uint8)
    return rng.integers(0, 256, size=(rows, length), dtype=np.uint8)


def estimate_undetected_fraction(
    spec: AlgorithmSpec, length_bytes: int, m: int, cfg: TrialConfig, batch_bytes: int = 1 << 25
) -> Cell:
    """Monte-Carlo fraction of m-bit faults that pass verification."""
    if m < 1 or length_bytes < 1:
        raise ValueError("need m >= 1 and length_bytes >= 1")
    n_bits = spec.code_word_bits(length_bytes)
    rng = _cell_rng(cfg.rng_seed, length_bytes, m)
    ppw = cfg.patterns_per_word
    words_per_batch = max(1, batch_bytes // length_bytes)
    undetected = 0
    done = 0
    while done < cfg.trials:
        rows = min(cfg.trials - done, words_per_batch * ppw)
        n_words = -(-rows // ppw)
        words = _draw_words(rng, n_words, length_bytes, cfg.data_model)
        word_checks = batch_checksum(words, spec)
        positions = _draw_subsets(rng, rows, n_bits, m)
        owner = np.arange(rows) // ppw
        if ppw == 1:
            data, checks = words, word_checks
        elif cfg.engine == "delta":
            # gather only the bytes the delta engine reads
            data = None
            checks = word_checks[owner]
        else:
            data, checks = words[owner], word_checks[owner]
        if data is None:
            byte_idx = np.minimum(positions // 8, length_bytes - 1)
            bits = (words[owner[:, None], byte_idx] >> (positions % 8).astype(np.uint8)) & 1
            stored = checks ^ _check_masks(positions, length_bytes)
            hit = delta_checks(spec, length_bytes, checks, bits, positions) == stored
        else:
            hit = _undetected(spec, data, checks, positions, cfg.engine)
        undetected += int(hit.sum())
        done += rows
    return Cell(undetected, cfg.trials, "sampled")


def _pattern_chunks(n_bits: int, m: int, chunk: int):
    it = combinations(range(n_bits), m)
    while True:
        block = list(islice(it, chunk))
        if not block:
            return
        yield np.array(block, dtype=np.int64).reshape(len(block), m)


def exhaustive_undetected_count(
    spec: AlgorithmSpec,
    length_bytes: int,
    m: int,
    data_model: DataModel = DataModel.RANDOM_BYTES,
    *,
    data_words: int = 8,
    rng_seed: int = 0,
    budget: int = 10**9,
    engine: str = "direct",
) -> tuple[int, int]:
    """Count m-bit patterns undetected for at least one sampled data word.

    Enumerates every m-subset of the code word's bits.  The all-zero word is
    always tried; ``RandomBytes`` adds ``data_words`` random words.  Returns
    ``(undetected, total)`` with ``total = C(8n + k, m)``.
    """
    n_bits = spec.code_word_bits(length_bytes)
    total = math.comb(n_bits, m)
    if total > budget:
        raise TooManyPatterns(f"C({n_bits}, {m}) = {total} exceeds budget {budget}")
    words = [np.zeros(length_bytes, dtype=np.uint8)]
    if DataModel(data_model) is DataModel.RANDOM_BYTES:
        rng = _cell_rng(rng_seed, length_bytes, m)
        words += list(rng.integers(0, 256, size=(data_words, length_bytes), dtype=np.uint8))
    words = np.stack(words)
    checks = batch_checksum(words, spec)

    chunk = max(256, (1 << 24) // max(1, length_bytes * len(words)))
    undetected = 0
    for pats in _pattern_chunks(n_bits, m, chunk):
        hit = np.zeros(len(pats), dtype=bool)
        for word, check in zip(words, checks):
            data = np.broadcast_to(word, (len(pats), length_bytes))
            hit |= _undetected(spec, data, np.full(len(pats), check, dtype=np.uint64), pats, engine)
        undetected += int(hit.sum())
    return undetected, total


def _sweep_cell(args):
    spec, n, m, cfg, budget, exhaustive = args
    n_bits = spec.code_word_bits(n)
    fits = math.comb(n_bits, m) <= budget
    if exhaustive is True or (exhaustive is None and fits):
        und, tot = exhaustive_undetected_count(
            spec, n, m, cfg.data_model, rng_seed=cfg.rng_seed, budget=budget
        )
        return (n, m), Cell(und, tot, "exhaustive")
    return (n, m), estimate_undetected_fraction(spec, n, m, cfg)


def sweep(
    spec: AlgorithmSpec,
    lengths,
    ms,
    cfg: TrialConfig,
    *,
    budget: int = 10**6,
    exhaustive: bool | None = None,
    workers: int = 1,
) -> FractionTable:
    """Fill a FractionTable over ``lengths`` x ``ms``.

    ``exhaustive=None`` enumerates cells with at most ``budget`` patterns and
    samples the rest; True forces enumeration (raising TooManyPatterns past
    the budget); False always samples.
    """
    jobs = [(spec, int(n), int(m), cfg, budget, exhaustive) for n in lengths for m in ms]
    table = FractionTable(spec.label)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_cell, jobs))
    else:
        results = [_sweep_cell(job) for job in jobs]
    for key, cell in results:
        table.cells[key] = cell
    return table
