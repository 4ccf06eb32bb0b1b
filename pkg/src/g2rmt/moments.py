"""Closed-form moments of characteristic polynomials.

Covers the G2 constant-term formula, the factorial and Gamma-ratio forms of
the moments of |Z-hat| at the symmetry point for the 7- and 14-dimensional
representations, and the USp(2g) moment formula.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Sequence

import numpy as np
from scipy.special import loggamma


class DomainError(ValueError):
    pass


def macdonald_g2(k_short: int, k_long: int) -> Fraction:
    """Constant term of (1/12) prod_{a in R} (1 - t^a)^{k_a} for G2, in closed form."""
    if k_short < 0 or k_long < 0:
        raise ValueError("exponents must be non-negative")
    s, l = k_short, k_long
    num = factorial(3 * s + 3 * l) * factorial(2 * s) * factorial(2 * l) * factorial(3 * l)
    den = (
        12
        * factorial(2 * s + 3 * l)
        * factorial(s + 2 * l)
        * factorial(s + l)
        * factorial(s)
        * factorial(l) ** 2
    )
    return Fraction(num, den)


def moment_rep7_exact(s: int) -> Fraction:
    """<|Z-hat|^s> for the 7-dimensional representation, s a non-negative integer."""
    if s < 0 or int(s) != s:
        raise DomainError("exact form needs a non-negative integer s")
    s = int(s)
    num = factorial(3 * s + 6) * factorial(2 * s + 2)
    den = factorial(2 * s + 5) * factorial(s + 3) * factorial(s + 2) * factorial(s + 1)
    return Fraction(num, den)


def moment_rep14_exact(s: int) -> Fraction:
    """<|Z-hat|^s> for the 14-dimensional (adjoint) representation."""
    if s < 0 or int(s) != s:
        raise DomainError("exact form needs a non-negative integer s")
    s = int(s)
    num = factorial(6 * s + 6) * factorial(2 * s + 2)
    den = 12 * factorial(5 * s + 5) * factorial(s + 1) ** 3
    return Fraction(num, den)


@dataclass(frozen=True)
class GammaRatioFormula:
    """prefactor * prod Gamma(c*s + o) / prod Gamma(c*s + o), valid for Re s > domain_bound.

    ``numerator`` and ``denominator`` are sequences of (slope, offset) pairs.
    """

    prefactor: Fraction
    numerator: tuple[tuple[int, Fraction], ...]
    denominator: tuple[tuple[int, Fraction], ...]
    domain_bound: Fraction
    name: str = ""

    def __post_init__(self):
        for c, _ in self.numerator + self.denominator:
            if c <= 0:
                raise ValueError("slopes must be positive")
        if sum(c for c, _ in self.numerator) != sum(c for c, _ in self.denominator):
            raise ValueError("numerator and denominator slopes must have equal sums")

    def log_value(self, s):
        """Complex log of the formula, computed as a sum of log-Gammas."""
        s = np.asarray(s, dtype=complex)
        if np.any(s.real <= float(self.domain_bound)):
            raise DomainError(
                f"{self.name or 'formula'} is valid only for Re s > {self.domain_bound}"
            )
        out = np.full(s.shape, math.log(self.prefactor), dtype=complex)
        for c, o in self.numerator:
            out += loggamma(c * s + float(o))
        for c, o in self.denominator:
            out -= loggamma(c * s + float(o))
        return out

    def __call__(self, s):
        val = np.exp(self.log_value(s))
        return complex(val) if val.ndim == 0 else val

    @property
    def log_growth_rate(self) -> float:
        """L = sum(+-c log c): M(s) ~ exp(sL) along vertical lines; exp(L) bounds the variable."""
        return sum(c * math.log(c) for c, _ in self.numerator) - sum(c * math.log(c) for c, _ in self.denominator)


F = Fraction

REP7 = GammaRatioFormula(
    prefactor=F(1),
    numerator=((3, F(7)), (2, F(3))),
    denominator=((2, F(6)), (1, F(4)), (1, F(3)), (1, F(2))),
    domain_bound=F(-3, 2),
    name="rep7",
)

REP14 = GammaRatioFormula(
    prefactor=F(1, 12),
    numerator=((6, F(7)), (2, F(3))),
    denominator=((5, F(6)), (1, F(2)), (1, F(2)), (1, F(2))),
    domain_bound=F(-7, 6),
    name="rep14",
)

FORMULAS = {"7": REP7, "14": REP14}
EXACT = {"7": moment_rep7_exact, "14": moment_rep14_exact}


def formula_for(rep) -> GammaRatioFormula:
    try:
        return FORMULAS[_rep_key(rep)]
    except KeyError:
        raise ValueError(f"unknown representation {rep!r}; use 7/[1,0] or 14/[0,1]") from None


def _rep_key(rep) -> str:
    key = str(rep).replace(" ", "")
    return {"[1,0]": "7", "(1,0)": "7", "rep7": "7", "[0,1]": "14", "(0,1)": "14", "rep14": "14"}.get(key, key)


def moment_rep7_gamma(s: complex) -> complex:
    return REP7(s)


def moment_rep14_gamma(s: complex) -> complex:
    return REP14(s)


@dataclass(frozen=True)
class MomentValue:
    s: complex
    numeric: complex
    exact: Fraction | None = None

    def consistent(self) -> bool:
        if self.exact is None:
            return True
        return abs(self.numeric - float(self.exact)) <= 1e-10 * (1 + abs(float(self.exact)))


def moment(rep, s) -> MomentValue:
    """Moment of |Z-hat| with the exact value attached when s is a non-negative integer."""
    key = _rep_key(rep)
    numeric = formula_for(key)(s)
    exact = None
    if complex(s).imag == 0 and complex(s).real >= 0 and complex(s).real == int(complex(s).real):
        exact = EXACT[key](int(complex(s).real))
    return MomentValue(complex(s), numeric, exact)


def moment_usp(g: int, s: complex) -> complex:
    """Integral over USp(2g) of det(I - A)^s with respect to Haar measure."""
    if g < 1:
        raise ValueError("g must be a positive integer")
    s = complex(s)
    if s.real <= -1.5:
        raise DomainError("USp(2g) moment formula requires Re s > -3/2")
    total = 2 * g * s * math.log(2)
    for j in range(1, g + 1):
        total += loggamma(1 + g + j) + loggamma(0.5 + s + j) - loggamma(0.5 + j) - loggamma(1 + s + g + j)
    return complex(cmath.exp(total))


def log_convex_violations(formula: GammaRatioFormula, grid: Sequence[float]) -> int:
    """Count midpoint-convexity violations of log M on consecutive triples of a uniform grid."""
    vals = formula.log_value(np.asarray(grid)).real
    mid = vals[1:-1]
    chord = 0.5 * (vals[:-2] + vals[2:])
    return int(np.sum(mid > chord + 1e-12 * (1 + np.abs(chord))))
