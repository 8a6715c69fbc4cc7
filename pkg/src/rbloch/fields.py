"""Square classes and backend dispatch for the two supported fields.

Two backends exist:

* ``RATIONAL`` -- elements are :class:`fractions.Fraction`; a square class is a
  sign bit plus the set of primes occurring to an odd power.
* ``TOWER`` -- elements are :class:`rbloch.tower.TowerElement` (constructible
  reals in a quadratic tower); a square class is just a sign bit, since every
  positive element has a square root.

Functions in this module dispatch on the element type, so higher layers never
need to carry a backend object around.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

from sympy import factorint

from .tower import TowerContext, TowerElement, sqrt_positive

FieldElement = Union[Fraction, TowerElement]


class FieldError(ArithmeticError):
    """Raised for invalid field operations (zero division, bad context, ...)."""


@dataclass(frozen=True, order=True)
class SquareClass:
    """An element of F^x / (F^x)^2.

    ``primes`` is always empty for the tower backend.
    """

    negative: bool = False
    primes: frozenset = frozenset()

    def __mul__(self, other: "SquareClass") -> "SquareClass":
        return SquareClass(self.negative != other.negative, self.primes ^ other.primes)

    @property
    def is_trivial(self) -> bool:
        return not self.negative and not self.primes

    @property
    def representative(self) -> int:
        """Signed squarefree integer representing the class."""
        r = -1 if self.negative else 1
        for p in self.primes:
            r *= p
        return r

    def sort_key(self) -> tuple:
        return (self.negative, tuple(sorted(self.primes)))

    def descriptor(self):
        """JSON descriptor: ``"pos"``/``"neg"`` for tower classes is produced by
        :func:`class_descriptor`; this form is the rational one."""
        return {"sign": "-" if self.negative else "+", "primes": sorted(self.primes)}

    def __repr__(self) -> str:
        return f"<{self.representative}>"


ONE_CLASS = SquareClass()
MINUS_CLASS = SquareClass(True)


@lru_cache(maxsize=1 << 16)
def _odd_primes(n: int) -> frozenset:
    if n <= 1:
        return frozenset()
    return frozenset(p for p, e in factorint(n).items() if e % 2)


def rational_square_class(q: Fraction) -> SquareClass:
    if q == 0:
        raise FieldError("square class of zero")
    q = Fraction(q)
    primes = _odd_primes(abs(q.numerator)) ^ _odd_primes(q.denominator)
    return SquareClass(q < 0, primes)


def square_class(x) -> SquareClass:
    """Square class of a nonzero field element (dispatching on backend)."""
    if isinstance(x, TowerElement):
        s = x.sign()
        if s == 0:
            raise FieldError("square class of zero")
        return MINUS_CLASS if s < 0 else ONE_CLASS
    return rational_square_class(Fraction(x))


def sign(x) -> int:
    if isinstance(x, TowerElement):
        return x.sign()
    x = Fraction(x)
    return (x > 0) - (x < 0)


def is_tower(x) -> bool:
    return isinstance(x, TowerElement)


def sort_key(x) -> tuple:
    """Deterministic total order used for serialization (not the field order)."""
    if isinstance(x, TowerElement):
        return (1, x.key_repr())
    x = Fraction(x)
    return (0, x.numerator, x.denominator)


def class_descriptor(c: SquareClass, tower: bool):
    if tower:
        return "neg" if c.negative else "pos"
    return c.descriptor()


def class_from_descriptor(d) -> SquareClass:
    if d == "pos":
        return ONE_CLASS
    if d == "neg":
        return MINUS_CLASS
    if isinstance(d, dict):
        return SquareClass(d.get("sign") == "-", frozenset(int(p) for p in d.get("primes", ())))
    raise ValueError(f"bad square-class descriptor: {d!r}")


class Backend:
    """Base class for the two field backends."""

    name = "abstract"
    is_tower = False

    def element(self, value) -> FieldElement:  # pragma: no cover - interface
        raise NotImplementedError

    def square_class(self, x) -> SquareClass:
        return square_class(self.element(x))

    def __repr__(self) -> str:
        return f"<backend {self.name}>"


class RationalBackend(Backend):
    name = "rational"

    def element(self, value) -> Fraction:
        if isinstance(value, TowerElement):
            if value.level() != 0:
                raise FieldError("irrational tower element in rational backend")
            return value.rational_value()
        return Fraction(value)

    def sqrt(self, x):
        x = Fraction(x)
        if x < 0:
            raise FieldError("square root of a negative rational")
        from math import isqrt

        n, d = x.numerator, x.denominator
        rn, rd = isqrt(n), isqrt(d)
        if rn * rn != n or rd * rd != d:
            raise FieldError(f"{x} is not a square in Q")
        return Fraction(rn, rd)

    def random_element(self, rng: random.Random, size: int = 30, nonzero: bool = True) -> Fraction:
        while True:
            q = Fraction(rng.randint(-size, size), rng.randint(1, size))
            if q != 0 or not nonzero:
                return q


class TowerBackend(Backend):
    name = "tower"
    is_tower = True

    def __init__(self, depth_cap: int = 8):
        self.depth_cap = depth_cap

    def element(self, value) -> TowerElement:
        if isinstance(value, TowerElement):
            return value
        return TowerElement.rational(Fraction(value))

    def sqrt(self, x, ctx: TowerContext | None = None):
        root, _ = sqrt_positive(self.element(x), ctx, depth_cap=self.depth_cap)
        return root

    def random_context(self, rng: random.Random, depth: int) -> TowerContext:
        """A random tower of the given depth with small radicands (nested ones included)."""
        ctx = TowerContext.base()
        primes = [2, 3, 5, 7, 11, 13, 17, 19]
        rng.shuffle(primes)
        for i in range(depth):
            if i >= 1 and rng.random() < 0.3:
                # nested radicand such as 1 + sqrt(r1)
                last = TowerElement.radical(ctx, rng.randrange(i))
                cand = last * rng.randint(1, 3) + rng.randint(1, 4)
            else:
                cand = TowerElement.rational(primes[i]).promote(ctx)
            _, new = sqrt_positive(cand, ctx, depth_cap=self.depth_cap)
            ctx = new
        return ctx

    def random_element(self, rng: random.Random, depth: int = 2, size: int = 9,
                       nonzero: bool = True, ctx: TowerContext | None = None) -> TowerElement:
        if ctx is None:
            ctx = self.random_context(rng, depth)
        n = 1 << len(ctx)
        while True:
            nums = [rng.randint(-size, size) for _ in range(n)]
            x = TowerElement(ctx, nums, rng.randint(1, size))
            if not nonzero or not x.is_zero():
                return x


RATIONAL = RationalBackend()
TOWER = TowerBackend()


def get_backend(name: str, depth_cap: int = 8) -> Backend:
    if name in ("rational", "q", "Q"):
        return RATIONAL
    if name == "tower":
        return TOWER if depth_cap == TOWER.depth_cap else TowerBackend(depth_cap)
    raise ValueError(f"unknown backend {name!r}")


def backend_of(x) -> Backend:
    return TOWER if isinstance(x, TowerElement) else RATIONAL
