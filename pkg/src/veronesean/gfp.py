"""Exact arithmetic in prime fields GF(p) and on the projective parameter line.

Parameters of degree-d curves live on GF(p) extended by a single point at
infinity; cross-ratios of parameter quadruples are the basic projective
invariant everything else is built on.
"""

from __future__ import annotations

from dataclasses import dataclass


def is_prime(n: int) -> bool:
    """Trial-division primality test, adequate for moduli below 2**31."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    i = 3
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


@dataclass(frozen=True)
class PrimeField:
    """The prime field GF(p).

    Elements are canonical machine integers in [0, p).  The modulus is
    bounded by 2**31 so every product of two canonical representatives
    fits in a 64-bit intermediate.
    """

    p: int

    def __post_init__(self) -> None:
        if not isinstance(self.p, int) or not 2 <= self.p < 2**31:
            raise ValueError(f"modulus must be an integer in [2, 2**31), got {self.p!r}")
        if not is_prime(self.p):
            raise ValueError(f"modulus {self.p} is not prime")

    def element(self, value: int) -> int:
        return value % self.p

    def elements(self) -> range:
        return range(self.p)

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def inv(self, a: int) -> int:
        if a % self.p == 0:
            raise ZeroDivisionError(f"0 has no inverse in GF({self.p})")
        return pow(a, -1, self.p)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        return pow(a % self.p, e, self.p)


@dataclass(frozen=True)
class ProjParam:
    """A point of the projective parameter line GF(p) + {infinity}.

    ``value`` is a canonical field element for finite parameters and None
    for the point at infinity, so parameters can never alias field
    elements.  Equality is structural.
    """

    value: int | None

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def __repr__(self) -> str:
        return "inf" if self.value is None else str(self.value)


INFINITY = ProjParam(None)


def finite(field: PrimeField, value: int) -> ProjParam:
    """The finite parameter with canonical representative of ``value``."""
    return ProjParam(field.element(value))


def all_params(field: PrimeField) -> tuple[ProjParam, ...]:
    """All p+1 parameters, finite values in ascending order then infinity."""
    return tuple(ProjParam(v) for v in field.elements()) + (INFINITY,)


def param_sort_key(t: ProjParam) -> tuple[int, int]:
    return (1, 0) if t.is_infinite else (0, t.value)


Mobius = tuple[int, int, int, int]
"""A fractional-linear map t -> (a*t + b) / (c*t + d), stored as (a, b, c, d)."""


def mobius_apply(field: PrimeField, m: Mobius, t: ProjParam) -> ProjParam:
    a, b, c, d = (field.element(v) for v in m)
    if t.is_infinite:
        num, den = a, c
    else:
        num = field.add(field.mul(a, t.value), b)
        den = field.add(field.mul(c, t.value), d)
    if den == 0:
        if num == 0:
            raise ValueError("singular fractional-linear map")
        return INFINITY
    return ProjParam(field.div(num, den))


def mobius_inverse(field: PrimeField, m: Mobius) -> Mobius:
    a, b, c, d = (field.element(v) for v in m)
    det = field.sub(field.mul(a, d), field.mul(b, c))
    if det == 0:
        raise ValueError("fractional-linear map is singular")
    return (d, field.neg(b), field.neg(c), a)


def crossratio_mobius(field: PrimeField, t1: ProjParam, t2: ProjParam, t3: ProjParam) -> Mobius:
    """The map t -> cr(t1, t2; t3, t), sending t1, t2, t3 to inf, 0, 1.

    Convention: cr(t1, t2; t3, t4) = ((t1-t3)(t2-t4)) / ((t1-t4)(t2-t3)),
    with the usual cancellation of matched infinite factors.
    """
    if len({param_sort_key(t) for t in (t1, t2, t3)}) != 3:
        raise ValueError("base parameters of a cross-ratio must be pairwise distinct")
    if t1.is_infinite:
        # cr = (t2 - t4) / (t2 - t3)
        return (field.neg(1), t2.value, 0, field.sub(t2.value, t3.value))
    if t2.is_infinite:
        # cr = (t1 - t3) / (t1 - t4)
        return (0, field.sub(t1.value, t3.value), field.neg(1), t1.value)
    if t3.is_infinite:
        # cr = (t2 - t4) / (t1 - t4)
        return (field.neg(1), t2.value, field.neg(1), t1.value)
    a = field.sub(t1.value, t3.value)
    b = field.sub(t2.value, t3.value)
    return (field.neg(a), field.mul(a, t2.value), field.neg(b), field.mul(b, t1.value))


def crossratio_params(
    field: PrimeField, t1: ProjParam, t2: ProjParam, t3: ProjParam, t4: ProjParam
) -> ProjParam:
    """Cross-ratio cr(t1, t2; t3, t4) of four pairwise distinct parameters.

    With distinct arguments the result is never 0, 1 or infinity.
    """
    if len({param_sort_key(t) for t in (t1, t2, t3, t4)}) != 4:
        raise ValueError("cross-ratio requires four pairwise distinct parameters")
    return mobius_apply(field, crossratio_mobius(field, t1, t2, t3), t4)


def solve_crossratio(
    field: PrimeField, t1: ProjParam, t2: ProjParam, t3: ProjParam, value: ProjParam
) -> ProjParam:
    """The unique t with cr(t1, t2; t3, t) = value."""
    m = crossratio_mobius(field, t1, t2, t3)
    return mobius_apply(field, mobius_inverse(field, m), value)
