"""Exact univariate polynomials over Q, used for Hilbert polynomials and
the face weight polynomials of the stability machinery."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


def _trim(coeffs: Sequence[Fraction]) -> tuple[Fraction, ...]:
    cs = [Fraction(c) for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


@dataclass(frozen=True)
class RatPoly:
    """Polynomial in t with rational coefficients, low degree first."""

    coeffs: tuple[Fraction, ...]

    @staticmethod
    def of(coeffs: Sequence) -> "RatPoly":
        return RatPoly(_trim([Fraction(c) for c in coeffs]))

    @staticmethod
    def zero() -> "RatPoly":
        return RatPoly(())

    @staticmethod
    def const(c) -> "RatPoly":
        return RatPoly.of([c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def coeff(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def __add__(self, other: "RatPoly") -> "RatPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return RatPoly(_trim([self.coeff(i) + other.coeff(i) for i in range(n)]))

    def __sub__(self, other: "RatPoly") -> "RatPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return RatPoly(_trim([self.coeff(i) - other.coeff(i) for i in range(n)]))

    def __neg__(self) -> "RatPoly":
        return RatPoly(tuple(-c for c in self.coeffs))

    def __mul__(self, other: "RatPoly") -> "RatPoly":
        if not self.coeffs or not other.coeffs:
            return RatPoly(())
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return RatPoly(_trim(out))

    def scale(self, c) -> "RatPoly":
        f = Fraction(c)
        return RatPoly(_trim([f * x for x in self.coeffs]))

    def __call__(self, t) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * Fraction(t) + c
        return acc

    def is_zero(self) -> bool:
        return not self.coeffs

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                parts.append(str(c))
            elif i == 1:
                parts.append(f"{c}*t")
            else:
                parts.append(f"{c}*t^{i}")
        return " + ".join(parts)


def compare_for_large_t(p: RatPoly, q: RatPoly) -> int:
    """Sign of p - q for t >> 0: lexicographic on coefficients from the top."""
    d = p - q
    if d.is_zero():
        return 0
    return 1 if d.coeffs[-1] > 0 else -1
