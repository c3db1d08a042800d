"""Exception hierarchy shared by every modsum module."""


class ChecksumError(Exception):
    """Base class for all modsum errors."""


class InvalidSpec(ChecksumError, ValueError):
    """An AlgorithmSpec violates its construction invariants."""


class EvenModulus(InvalidSpec):
    """An even modulus was supplied where an odd one is required."""


class EmptyDataWord(ChecksumError, ValueError):
    """A checksum was requested over zero bytes of data."""


class WrongFamily(ChecksumError, ValueError):
    """A kernel was called with a spec of a different family."""


class BadCheckLength(ChecksumError, ValueError):
    """A code word's check field has the wrong number of bytes."""


class StateConsumed(ChecksumError, RuntimeError):
    """A streaming state was used after it was finalized."""


class BadFaultPosition(ChecksumError, IndexError):
    """A fault pattern names a bit outside the code word."""


class TooManyPatterns(ChecksumError, RuntimeError):
    """An exhaustive enumeration would exceed its pattern budget."""
