"""Exception hierarchy shared by every layer of the package."""

from __future__ import annotations


class ModvoaError(Exception):
    """Base class for all package errors."""


class CharacteristicMismatch(ModvoaError):
    pass


class DenominatorDivisibleByP(ModvoaError):
    def __init__(self, value, p, witness=None):
        self.value = value
        self.p = p
        self.witness = witness
        msg = f"denominator of {value} is divisible by {p}"
        if witness is not None:
            msg += f" (at {witness})"
        super().__init__(msg)


class BadCharacteristic(ModvoaError):
    pass


class BadSize(ModvoaError):
    pass


class DegenerateForm(ModvoaError):
    pass


class UnsupportedFamily(ModvoaError):
    pass


class CapacityExceeded(ModvoaError):
    def __init__(self, weight, cap):
        self.weight = weight
        self.cap = cap
        super().__init__(f"weight {weight} exceeds cap {cap}")


class TruncationOverflow(ModvoaError):
    pass


class NilpotencyOrderTooLarge(ModvoaError):
    pass
