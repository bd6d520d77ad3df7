"""Exact rational weights, degrees and slopes."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from numbers import Rational
from typing import Callable, Iterable, Mapping, Sequence

from .errors import NonRationalWeight, ZeroDimension


def to_fraction(x) -> Fraction:
    """Exact rational from an int, Fraction or ``"p/q"`` / decimal string.

    Floats are refused: their binary expansion is rarely the intended rational.
    """
    if isinstance(x, bool):
        raise NonRationalWeight(f"not a rational weight entry: {x!r}")
    if isinstance(x, (int, Fraction)) or isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise NonRationalWeight(f"malformed rational {x!r}") from exc
    raise NonRationalWeight(f"not a rational weight entry: {x!r} ({type(x).__name__})")


class Weight:
    """A rational weight theta, one exact entry per vertex (in quiver order)."""

    __slots__ = ("values",)

    def __init__(self, values: Iterable):
        self.values = tuple(to_fraction(v) for v in values)

    @classmethod
    def from_mapping(cls, quiver, mapping: Mapping) -> "Weight":
        keys = {str(k): v for k, v in mapping.items()}
        if set(keys) != {str(v) for v in quiver.vertices}:
            raise NonRationalWeight("weight keys must be exactly the vertex ids")
        return cls(keys[str(v)] for v in quiver.vertices)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i) -> Fraction:
        return self.values[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, Weight) and self.values == other.values

    def __hash__(self) -> int:
        return hash(self.values)

    def __repr__(self) -> str:
        return "Weight(" + ", ".join(str(v) for v in self.values) + ")"

    def scaled(self, c) -> "Weight":
        c = to_fraction(c)
        return Weight(c * v for v in self.values)

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self.values)

    def degree(self, d: Sequence[int]) -> Fraction:
        if len(d) != len(self.values):
            raise ValueError("dimension vector and weight have different lengths")
        return sum((t * int(x) for t, x in zip(self.values, d)), Fraction(0))

    def slope(self, d: Sequence[int]) -> Fraction:
        rk = sum(int(x) for x in d)
        if rk == 0:
            raise ZeroDimension("slope of the zero dimension vector")
        return self.degree(d) / rk

    def as_strings(self) -> list[str]:
        return [str(v) for v in self.values]

    def as_floats(self) -> list[float]:
        return [float(v) for v in self.values]

    def denominator_lcm(self) -> int:
        return lcm(*(v.denominator for v in self.values)) if self.values else 1

    def primitive_integral(self) -> "Weight":
        """Smallest positive integer multiple, divided by the gcd of its entries."""
        n = self.denominator_lcm()
        ints = [int(v * n) for v in self.values]
        g = 0
        for x in ints:
            g = gcd(g, abs(x))
        if g > 1:
            ints = [x // g for x in ints]
        return Weight(ints)


def as_weight(theta) -> Weight:
    return theta if isinstance(theta, Weight) else Weight(theta)


@dataclass(frozen=True)
class SlopeData:
    degree: Fraction
    rank: int
    slope: Fraction


def slope(d: Sequence[int], theta) -> SlopeData:
    """Degree, rank and slope of a dimension vector, in exact arithmetic."""
    theta = as_weight(theta)
    rk = sum(int(x) for x in d)
    if rk == 0:
        raise ZeroDimension("slope of the zero dimension vector")
    deg = theta.degree(d)
    return SlopeData(deg, rk, deg / rk)


def king_lambda(theta, mu, c=1) -> Callable[[Sequence[int]], Fraction]:
    """King's additive functional ``d -> c (mu rk(d) - deg_theta(d))``.

    A representation with slope ``mu`` is theta-semistable iff it is
    lambda-semistable in King's sense.
    """
    theta = as_weight(theta)
    mu, c = to_fraction(mu), to_fraction(c)
    if c <= 0:
        raise ValueError("King's constant c must be positive")

    def lam(d: Sequence[int]) -> Fraction:
        return c * (mu * sum(int(x) for x in d) - theta.degree(d))

    return lam
