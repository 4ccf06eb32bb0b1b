"""Sparse multivariate Laurent polynomials with exact rational coefficients.

A polynomial is a map from integer exponent vectors to rationals (Python ints
or ``Fraction``).  This is the brute-force side of every constant-term
identity in the package, so everything here is exact.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from math import comb
from numbers import Rational
from typing import Iterable, Mapping

import numpy as np

from .rootsys import Root, RootSystem, weyl_group

DEFAULT_TERM_CAP = 50_000_000


class InstanceTooLarge(RuntimeError):
    """Raised when an intermediate product exceeds the configured term cap."""


class LaurentPoly:
    __slots__ = ("rank", "terms")

    def __init__(self, rank: int, terms: Mapping[tuple, Rational] | None = None):
        self.rank = rank
        clean = {}
        if terms:
            for e, c in terms.items():
                if len(e) != rank:
                    raise ValueError(f"exponent {e} does not have length {rank}")
                if c != 0:
                    clean[tuple(e)] = _normalize(c)
        self.terms = clean

    @classmethod
    def one(cls, rank: int) -> "LaurentPoly":
        return cls(rank, {(0,) * rank: 1})

    @classmethod
    def monomial(cls, exponent: Iterable[int], coeff: Rational = 1) -> "LaurentPoly":
        e = tuple(exponent)
        return cls(len(e), {e: coeff})

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, LaurentPoly):
            return self.rank == other.rank and self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash((self.rank, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        if not self.terms:
            return "LaurentPoly(0)"
        parts = [f"{c}*t^{e}" for e, c in sorted(self.terms.items())]
        return "LaurentPoly(" + " + ".join(parts) + ")"

    def _check(self, other: "LaurentPoly"):
        if self.rank != other.rank:
            raise ValueError(f"rank mismatch: {self.rank} vs {other.rank}")

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return LaurentPoly(self.rank, out)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(self.rank, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, LaurentPoly):
            return mul(self, other)
        if isinstance(other, Rational):
            return LaurentPoly(self.rank, {e: c * other for e, c in self.terms.items()})
        return NotImplemented

    __rmul__ = __mul__

    def coeff(self, exponent: Iterable[int]) -> Rational:
        return self.terms.get(tuple(exponent), 0)

    def shift(self, v: Iterable[int]) -> "LaurentPoly":
        """Multiply by the monomial t^v."""
        v = tuple(v)
        return LaurentPoly(self.rank, {tuple(a + b for a, b in zip(e, v)): c for e, c in self.terms.items()})

    def negate_exponents(self) -> "LaurentPoly":
        return LaurentPoly(self.rank, {tuple(-a for a in e): c for e, c in self.terms.items()})

    def evaluate(self, angles: np.ndarray, chunk: int = 1 << 16) -> np.ndarray:
        """Evaluate at torus points ``t^e = exp(i <e, angles>)``; angles has shape (..., rank)."""
        angles = np.asarray(angles, dtype=float)
        shape = angles.shape[:-1]
        flat = angles.reshape(-1, self.rank)
        if not self.terms:
            return np.zeros(shape, dtype=complex)
        exps = np.array(list(self.terms.keys()), dtype=float)
        coeffs = np.array([float(c) for c in self.terms.values()])
        out = np.empty(flat.shape[0], dtype=complex)
        for lo in range(0, flat.shape[0], chunk):
            ph = flat[lo : lo + chunk] @ exps.T
            out[lo : lo + chunk] = np.exp(1j * ph) @ coeffs
        return out.reshape(shape)


def _normalize(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


def mul(a: LaurentPoly, b: LaurentPoly, term_cap: int = DEFAULT_TERM_CAP) -> LaurentPoly:
    a._check(b)
    if len(a) < len(b):
        a, b = b, a
    out: dict = defaultdict(int)
    for eb, cb in b.terms.items():
        for ea, ca in a.terms.items():
            out[tuple(x + y for x, y in zip(ea, eb))] += ca * cb
        if len(out) > term_cap:
            raise InstanceTooLarge(f"product exceeds term cap {term_cap}")
    return LaurentPoly(a.rank, out)


def constant_term(p: LaurentPoly) -> Rational:
    return p.terms.get((0,) * p.rank, 0)


def root_factor(root: Root | Iterable[int], k: int, rank: int | None = None) -> LaurentPoly:
    """Binomial expansion of (1 - t^alpha)^k."""
    if k < 0:
        raise ValueError("exponent must be non-negative")
    coords = tuple(root.coords if isinstance(root, Root) else root)
    if rank is not None and rank != len(coords):
        raise ValueError("rank does not match root coordinates")
    terms = {tuple(j * c for c in coords): (-1) ** j * comb(k, j) for j in range(k + 1)}
    return LaurentPoly(len(coords), terms)


def product(factors: list[LaurentPoly], term_cap: int = DEFAULT_TERM_CAP) -> LaurentPoly:
    """Product of factors, folding in order of ascending term count."""
    if not factors:
        raise ValueError("empty product")
    ordered = sorted(factors, key=len)
    acc = ordered[0]
    for f in ordered[1:]:
        acc = mul(acc, f, term_cap)
    return acc


def root_product(rs: RootSystem, k: Mapping[str, int], term_cap: int = DEFAULT_TERM_CAP) -> LaurentPoly:
    """prod over all roots of (1 - t^alpha)^{k[class of alpha]}."""
    factors = []
    for r in rs.roots:
        kk = k[r.length_class]
        if kk < 0:
            raise ValueError("exponents must be non-negative")
        if kk:
            factors.append(root_factor(r, kk))
    if not factors:
        return LaurentPoly.one(rs.rank)
    return product(factors, term_cap)


def ct_product(rs: RootSystem, k: Mapping[str, int], term_cap: int = DEFAULT_TERM_CAP) -> Fraction:
    """Constant term of the root product divided by the Weyl group order."""
    for cls in {r.length_class for r in rs.roots}:
        if cls not in k:
            raise ValueError(f"no exponent given for {cls} roots")
    ct = constant_term(root_product(rs, k, term_cap))
    return Fraction(ct, len(weyl_group(rs)))


def div_binomial(p: LaurentPoly, v: Iterable[int]) -> LaurentPoly:
    """Exact quotient p / (1 - t^v); raises ValueError if the division is not exact.

    Along each line e + j*v the quotient coefficients are prefix sums of the
    dividend's coefficients, and exactness means every line sums to zero.
    """
    v = tuple(v)
    if not any(v):
        raise ValueError("cannot divide by 1 - t^0")
    lines: dict = defaultdict(dict)
    pivot = next(i for i, x in enumerate(v) if x != 0)
    for e, c in p.terms.items():
        j, rem = divmod(e[pivot], v[pivot])
        base = tuple(a - j * b for a, b in zip(e, v))
        lines[base][j] = c
    out = {}
    for base, coeffs in lines.items():
        if sum(coeffs.values()) != 0:
            raise ValueError(f"not divisible by 1 - t^{v}")
        acc = 0
        for j in range(min(coeffs), max(coeffs)):
            acc += coeffs.get(j, 0)
            if acc:
                out[tuple(a + j * b for a, b in zip(base, v))] = acc
    return LaurentPoly(p.rank, out)


def alternant(rs: RootSystem, weight: Iterable, weyl=None) -> LaurentPoly:
    """sum over W of det(w) t^{w(weight)}; weight must map to integral vectors."""
    weyl = weyl if weyl is not None else weyl_group(rs)
    out: dict = defaultdict(int)
    for w in weyl:
        img = w.apply(tuple(weight))
        if any(Fraction(x).denominator != 1 for x in img):
            raise ValueError(f"w({tuple(weight)}) = {img} is not integral")
        out[tuple(int(x) for x in img)] += w.det
    return LaurentPoly(rs.rank, out)


def weyl_character(rs: RootSystem, highest_weight: Iterable) -> LaurentPoly:
    """Character of the irreducible representation as a Laurent polynomial.

    Divides the alternant of lambda + delta by the Weyl denominator
    t^delta prod_{a>0} (1 - t^{-a}) exactly.  Requires delta to be integral
    in simple-root coordinates (true for G2).
    """
    from .rootsys import half_sum_delta

    delta = half_sum_delta(rs).coords
    if any(d.denominator != 1 for d in delta):
        raise ValueError("half-sum of positive roots is not integral for this root system")
    weyl = weyl_group(rs)
    shifted = tuple(Fraction(a) + d for a, d in zip(highest_weight, delta))
    q = alternant(rs, shifted, weyl).shift(tuple(-int(d) for d in delta))
    for r in rs.positive_roots:
        q = div_binomial(q, tuple(-c for c in r.coords))
    return q
