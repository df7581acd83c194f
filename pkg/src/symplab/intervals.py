"""Minimal outward-rounded interval arithmetic for geometric certificates.

Every operation widens its result by one ulp per endpoint, so enclosure is
preserved under IEEE-754 rounding (width budget far below 1e-12 per
operation at the scales used here).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_INF = math.inf


def _down(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo <= self.hi):
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    @staticmethod
    def point(x: float) -> "Interval":
        return Interval(float(x), float(x))

    @staticmethod
    def hull(a: float, b: float) -> "Interval":
        return Interval(min(a, b), max(a, b))

    def __add__(self, other) -> "Interval":
        o = other if isinstance(other, Interval) else Interval.point(other)
        return Interval(_down(self.lo + o.lo), _up(self.hi + o.hi))

    def __radd__(self, other) -> "Interval":
        return self.__add__(other)

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other) -> "Interval":
        o = other if isinstance(other, Interval) else Interval.point(other)
        return self.__add__(-o)

    def __mul__(self, other) -> "Interval":
        o = other if isinstance(other, Interval) else Interval.point(other)
        prods = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi]
        return Interval(_down(min(prods)), _up(max(prods)))

    def __rmul__(self, other) -> "Interval":
        return self.__mul__(other)

    def __truediv__(self, other) -> "Interval":
        o = other if isinstance(other, Interval) else Interval.point(other)
        if o.lo <= 0.0 <= o.hi:
            raise ZeroDivisionError("interval division by an interval containing 0")
        quots = [self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi]
        return Interval(_down(min(quots)), _up(max(quots)))

    def width(self) -> float:
        return self.hi - self.lo

    def strictly_inside(self, lo: float, hi: float) -> bool:
        return lo < self.lo and self.hi < hi

    def strictly_below(self, other: "Interval") -> bool:
        return self.hi < other.lo


def arccos_interval(s: Interval) -> Interval:
    """Rigorous arccos of an interval within [-1, 1] (monotone decreasing)."""
    if s.lo < -1.0 or s.hi > 1.0:
        raise ValueError("arccos argument outside [-1, 1]")
    return Interval(_down(math.acos(s.hi)), _up(math.acos(s.lo)))


PI = Interval(_down(math.pi), _up(math.pi))
