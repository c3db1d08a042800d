"""Algorithm descriptions and the named presets."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import EvenModulus, InvalidSpec


class Family(str, enum.Enum):
    SINGLE_SUM = "SingleSum"
    DUAL_SUM = "DualSum"
    KOOPMAN = "Koopman"
    KOOPMAN_PARITY = "KoopmanParity"

    @classmethod
    def parse(cls, value: "str | Family") -> "Family":
        if isinstance(value, cls):
            return value
        norm = str(value).replace("-", "").replace("_", "").lower()
        for member in cls:
            if member.value.lower() == norm:
                return member
        raise InvalidSpec(f"unknown checksum family {value!r}")


@dataclass(frozen=True)
class AlgorithmSpec:
    """Full description of one checksum algorithm.

    ``check_bits`` is the width of the stored check value. For
    ``KoopmanParity`` the modular sum occupies the top ``check_bits - 1``
    bits and bit 0 holds the parity bit. ``block_bytes`` is the number of
    bytes folded in per kernel step; blocks are big-endian.
    """

    family: Family
    modulus: int
    check_bits: int
    block_bytes: int = 1
    seed: int = 0
    name: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family.parse(self.family))
        fam, m, k, bb = self.family, self.modulus, self.check_bits, self.block_bytes
        if not 4 <= k <= 32:
            raise InvalidSpec(f"check_bits must be in [4, 32], got {k}")
        if bb < 1:
            raise InvalidSpec(f"block_bytes must be >= 1, got {bb}")
        if m < 2:
            raise InvalidSpec(f"modulus must be >= 2, got {m}")
        if not 0 <= self.seed < (1 << k):
            raise InvalidSpec(f"seed must be in [0, 2^{k}), got {self.seed}")

        if fam is Family.DUAL_SUM:
            if k % 2:
                raise InvalidSpec("DualSum requires an even check_bits")
            limit = 1 << (k // 2)
        elif fam is Family.KOOPMAN_PARITY:
            limit = 1 << (k - 1)
        else:
            limit = 1 << k
        if m > limit:
            raise InvalidSpec(f"modulus {m} does not fit the {fam.value} check field (max {limit})")

        if fam in (Family.KOOPMAN, Family.KOOPMAN_PARITY):
            if m % 2 == 0:
                raise EvenModulus(f"{fam.value} needs an odd modulus, got {m}")
            if self.seed >= 1 << (8 * bb):
                raise InvalidSpec("Koopman seed must fit in one block")

    @property
    def check_bytes(self) -> int:
        return (self.check_bits + 7) // 8

    @property
    def sum_bits(self) -> int:
        """Bits of the check value holding modular sums (excludes parity)."""
        if self.family is Family.KOOPMAN_PARITY:
            return self.check_bits - 1
        return self.check_bits

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        fam = {
            Family.SINGLE_SUM: "add",
            Family.DUAL_SUM: "dual",
            Family.KOOPMAN: "koopman",
            Family.KOOPMAN_PARITY: "koopmanp",
        }[self.family]
        text = f"{fam}{self.check_bits}_m{self.modulus}_b{self.block_bytes}"
        if self.seed:
            text += f"_s{self.seed}"
        return text

    def code_word_bits(self, length_bytes: int) -> int:
        """Total bits in a code word: data bits plus the k meaningful check bits."""
        return 8 * length_bytes + self.check_bits

    def replace(self, **changes) -> "AlgorithmSpec":
        fields = dict(
            family=self.family,
            modulus=self.modulus,
            check_bits=self.check_bits,
            block_bytes=self.block_bytes,
            seed=self.seed,
            name=None,
        )
        fields.update(changes)
        return AlgorithmSpec(**fields)


def _preset(name, family, modulus, k, block=1):
    return name, AlgorithmSpec(Family(family), modulus, k, block, name=name)


PRESETS: dict[str, AlgorithmSpec] = dict(
    [
        _preset("koopman8", "Koopman", 253, 8),
        _preset("koopman8-239", "Koopman", 239, 8),
        _preset("koopman16", "Koopman", 65519, 16),
        _preset("koopman32", "Koopman", 4294967291, 32),
        _preset("koopman8p", "KoopmanParity", 125, 8),
        _preset("koopman16p", "KoopmanParity", 32749, 16),
        _preset("koopman32p", "KoopmanParity", 2147483629, 32),
        _preset("fletcher16", "DualSum", 255, 16),
        _preset("adler-style16", "DualSum", 251, 16),
        _preset("d253_b4", "DualSum", 253, 16, 4),
        _preset("d239_b14", "DualSum", 239, 16, 14),
        _preset("add65525_b4", "SingleSum", 65525, 16, 4),
    ]
)


def preset(name: str) -> AlgorithmSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise InvalidSpec(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
