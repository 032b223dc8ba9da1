"""Exact coefficient arithmetic over Q and prime fields F_p.

Hot loops elsewhere in the package work on raw coefficient values (``int``
residues for F_p, ``int``/``Fraction`` for Q) through a :class:`Field`;
:class:`Scalar` is the boxed, characteristic-tagged value used at API
boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from numbers import Rational

from .errors import CharacteristicMismatch, DenominatorDivisibleByP


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def reduce_rational(q, p: int) -> int:
    """Image of the rational ``q`` under Z_(p) -> F_p, as a residue in [0, p)."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    q = Fraction(q)
    if q.denominator % p == 0:
        raise DenominatorDivisibleByP(q, p)
    return q.numerator % p * pow(q.denominator % p, -1, p) % p


def binomial_int(n: int, j: int) -> int:
    """Generalised binomial n(n-1)...(n-j+1)/j! for any integer n, j >= 0."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    if n >= 0:
        return comb(n, j)
    # C(n, j) = (-1)^j C(j - n - 1, j)
    return (-1) ** j * comb(j - n - 1, j)


def lucas_binomial(n: int, j: int, p: int) -> int:
    """C(n, j) mod p for n, j >= 0 via base-p digits."""
    if n < 0 or j < 0:
        raise ValueError("Lucas' theorem needs nonnegative arguments")
    out = 1
    while n or j:
        nd, jd = n % p, j % p
        if jd > nd:
            return 0
        out = out * comb(nd, jd) % p
        n //= p
        j //= p
    return out


@lru_cache(maxsize=1 << 16)
def binomial_mod(n: int, j: int, p: int) -> int:
    """Generalised binomial reduced mod p (exact integers first, then reduce)."""
    return binomial_int(n, j) % p


class Field:
    """Q (``p == 0``) or F_p; normalises and combines raw coefficient values."""

    __slots__ = ("p",)

    def __init__(self, p: int = 0):
        if p and not is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p

    def __repr__(self):
        return f"Field({self.p})"

    def __eq__(self, other):
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self):
        return hash(("Field", self.p))

    def __reduce__(self):
        return (Field, (self.p,))

    @property
    def name(self) -> str:
        return f"F_{self.p}" if self.p else "Q"

    def __call__(self, x):
        """Coerce an int / Fraction / Scalar into a canonical raw value."""
        if isinstance(x, Scalar):
            if x.characteristic != self.p:
                raise CharacteristicMismatch(f"{x.characteristic} vs {self.p}")
            return x.value
        if self.p:
            if isinstance(x, int):
                return x % self.p
            return reduce_rational(x, self.p)
        if isinstance(x, int):
            return x
        if isinstance(x, Rational):
            x = Fraction(x)
            return x.numerator if x.denominator == 1 else x
        raise TypeError(f"cannot coerce {x!r} into {self.name}")

    def norm(self, x):
        """Cheap normalisation of a raw value produced by ring operations."""
        if self.p:
            return x % self.p
        if isinstance(x, Fraction) and x.denominator == 1:
            return x.numerator
        return x

    def inv(self, x):
        if self.p:
            return pow(x, -1, self.p)
        return Fraction(1) / x if isinstance(x, int) else 1 / x

    def div(self, a, b):
        return self.norm(a * self.inv(b))

    def binom(self, n: int, j: int):
        if self.p:
            return binomial_mod(n, j, self.p)
        return binomial_int(n, j)

    def scalar(self, x) -> "Scalar":
        return Scalar(self(x), self.p)

    def reduce_from(self, x):
        """Map a characteristic-0 raw value into this field."""
        return self(x)


QQ = Field(0)


@dataclass(frozen=True)
class Scalar:
    """An exact number tagged with its characteristic (0 or a prime)."""

    value: object
    characteristic: int = 0

    def __post_init__(self):
        if self.characteristic:
            object.__setattr__(
                self, "value", Field(self.characteristic)(self.value))
        else:
            object.__setattr__(self, "value", QQ(self.value))

    def _other(self, other):
        if isinstance(other, Scalar):
            if other.characteristic != self.characteristic:
                raise CharacteristicMismatch(
                    f"{self.characteristic} vs {other.characteristic}")
            return other.value
        return Field(self.characteristic)(other)

    def _make(self, v):
        return Scalar(v, self.characteristic)

    def __add__(self, other):
        return self._make(self.value + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._make(self.value - self._other(other))

    def __rsub__(self, other):
        return self._make(self._other(other) - self.value)

    def __mul__(self, other):
        return self._make(self.value * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self._make(-self.value)

    def __truediv__(self, other):
        f = Field(self.characteristic)
        return self._make(f.div(self.value, self._other(other)))

    def __rtruediv__(self, other):
        f = Field(self.characteristic)
        return self._make(f.div(self._other(other), self.value))

    def __pow__(self, e: int):
        if e < 0:
            return (1 / self) ** -e
        if self.characteristic:
            return self._make(pow(self.value, e, self.characteristic))
        return self._make(self.value ** e)

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return (self.characteristic == other.characteristic
                    and self.value == other.value)
        try:
            return self.value == self._other(other)
        except (TypeError, DenominatorDivisibleByP):
            return False

    def __hash__(self):
        return hash((self.value, self.characteristic))

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"Scalar({self.value}, char={self.characteristic})"
