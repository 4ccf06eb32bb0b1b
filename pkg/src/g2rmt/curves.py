"""Zeta functions of small curves over finite fields.

Point counts of P^1 and of hyperelliptic curves y^2 = f(x) over GF(p^m), the
numerator P(T) of the zeta function recovered from N_1..N_g, the Riemann
hypothesis check on its roots, and family averages of det(I - Theta_X)^s
compared with the USp(2g) moment formula.

The family is the hyperelliptic proxy {y^2 = f(x): f monic squarefree of
degree 2g+1}, averaged over equations rather than isomorphism classes.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .expsums import LPolynomial
from .ffield import cached_field, is_prime, legendre, poly_gcd
from .moments import moment_usp
from .parallel import Pool, serial

RH_TOL = 1e-8


class RHViolation(ArithmeticError):
    pass


@dataclass(frozen=True)
class CurveSpec:
    kind: str  # "projective_line" | "hyperelliptic"
    p: int
    f: tuple[int, ...] = ()  # coefficients over GF(p), low degree first

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.kind == "projective_line":
            return
        if self.kind != "hyperelliptic":
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if self.p == 2:
            raise ValueError("hyperelliptic models y^2 = f(x) need odd characteristic")
        f = [c % self.p for c in self.f]
        while f and f[-1] == 0:
            f.pop()
        object.__setattr__(self, "f", tuple(f))
        if len(f) - 1 < 3:
            raise ValueError("need deg f >= 3")
        df = [(i * c) % self.p for i, c in enumerate(f)][1:]
        if len(poly_gcd(list(f), df, self.p)) != 1:
            raise ValueError("f is not squarefree")

    @property
    def genus(self) -> int:
        if self.kind == "projective_line":
            return 0
        return (len(self.f) - 2) // 2

    def describe(self) -> str:
        if self.kind == "projective_line":
            return "P1"
        terms = []
        for i, c in reversed(list(enumerate(self.f))):
            if c:
                mon = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
                coef = "" if (c == 1 and i) else str(c)
                terms.append(coef + mon)
        return "y^2 = " + " + ".join(terms)


_TERM = re.compile(r"([+-]?)(\d*)(x(?:\^?(\d+))?)?")


def parse_curve(text: str, p: int) -> CurveSpec:
    """Parse "P1" or a hyperelliptic equation such as "y2=x3+x" or "y^2 = x^5 + 2x + 1"."""
    s = text.replace(" ", "").lower()
    if s in ("p1", "projective_line"):
        return CurveSpec("projective_line", p)
    m = re.fullmatch(r"y\^?2=(.+)", s)
    if not m:
        raise ValueError(f"cannot parse curve {text!r}")
    coeffs: dict[int, int] = {}
    body = m.group(1)
    pos = 0
    while pos < len(body):
        t = _TERM.match(body, pos)
        if not t or t.end() == pos:
            raise ValueError(f"cannot parse term at {body[pos:]!r}")
        sign = -1 if t.group(1) == "-" else 1
        c = int(t.group(2)) if t.group(2) else 1
        deg = 0 if not t.group(3) else int(t.group(4) or 1)
        if not t.group(2) and not t.group(3):
            raise ValueError(f"empty term in {text!r}")
        coeffs[deg] = coeffs.get(deg, 0) + sign * c
        pos = t.end()
    f = [coeffs.get(i, 0) % p for i in range(max(coeffs) + 1)]
    return CurveSpec("hyperelliptic", p, tuple(f))


def _values(curve: CurveSpec, m: int):
    """(field, f(x) for all x in GF(p^m))."""
    if m == 1:
        x = np.arange(curve.p, dtype=np.int64)
        acc = np.zeros_like(x)
        for c in reversed(curve.f):
            acc = (acc * x + c) % curve.p
        return None, acc
    fld = cached_field(curve.p, m)
    return fld, fld.poly_eval(curve.f, fld.elements())


def _norms_quadratic(curve: CurveSpec) -> np.ndarray:
    """Norms N(f(x)) to GF(p) for all x = u + v sqrt(d) in GF(p^2), without tables."""
    p = curve.p
    d = next(c for c in range(2, p) if pow(c, (p - 1) // 2, p) == p - 1)
    u = np.repeat(np.arange(p, dtype=np.int64), p)
    v = np.tile(np.arange(p, dtype=np.int64), p)
    a = np.zeros_like(u)
    b = np.zeros_like(u)
    for c in reversed(curve.f):
        a, b = (a * u + d * (b * v % p) + c) % p, (a * v + b * u) % p
    return (a * a - d * (b * b % p)) % p


def count_points(curve: CurveSpec, m: int = 1) -> int:
    """N_m = #X(GF(p^m)) on the smooth model, via quadratic-character sums."""
    q = curve.p**m
    if curve.kind == "projective_line":
        return q + 1
    if m == 2:
        chi = legendre(_norms_quadratic(curve), curve.p)
    else:
        fld, v = _values(curve, m)
        chi = legendre(v if fld is None else fld.norm(v), curve.p)
    affine = q + int(chi.sum())
    lead = curve.f[-1]
    if (len(curve.f) - 1) % 2:
        inf = 1
    else:
        inf = 1 + int(legendre(pow(lead, m, curve.p), curve.p))
    return affine + inf


def count_points_bruteforce(curve: CurveSpec, m: int = 1) -> int:
    """N_m by counting square roots: for every x, the number of y with y^2 = f(x)."""
    q = curve.p**m
    if curve.kind == "projective_line":
        return q + 1
    fld, v = _values(curve, m)
    if fld is None:
        y = np.arange(curve.p, dtype=np.int64)
        sq = np.bincount((y * y) % curve.p, minlength=curve.p)
    else:
        y = fld.elements()
        sq = np.bincount(fld.mul(y, y), minlength=q)
    affine = int(sq[v].sum())
    if (len(curve.f) - 1) % 2:
        inf = 1
    else:
        inf = int(sq[curve.f[-1]])
    return affine + inf


@dataclass
class ZetaData:
    g: int
    q: int
    counts: tuple[int, ...]
    P: LPolynomial
    rh_defect: float

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self.P.exact

    def zeta(self, t):
        return self.P(t) / ((1 - t) * (1 - self.q * t))

    def functional_equation_defect(self, points: Sequence[complex]) -> float:
        """max relative |Z(1/(qT)) - q^(1-g) T^(2-2g) Z(T)| over the given points."""
        worst = 0.0
        for t in points:
            lhs = self.zeta(1 / (self.q * t))
            rhs = self.q ** (1 - self.g) * t ** (2 - 2 * self.g) * self.zeta(t)
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
        return worst

    def det_one_minus_theta(self) -> float:
        """P(q^-1/2) = det(I - Theta_X)."""
        return float(self.P(self.q**-0.5).real)

    def to_json(self) -> dict:
        return {"g": self.g, "q": self.q, "counts": list(self.counts), "P": list(self.coeffs), "rh_defect": self.rh_defect}


def zeta_from_counts(g: int, q: int, counts: Sequence[int], rh_tol: float = RH_TOL) -> ZetaData:
    """Numerator P(T) of Z(X;T) from N_1..N_g, completed by the functional equation.

    log P(T) = sum_m a_m T^m / m with a_m = N_m - (q^m + 1), so the
    coefficients b_1..b_g follow from k b_k = sum_{m<=k} a_m b_{k-m}; then
    b_{2g-i} = q^(g-i) b_i.  Extra counts beyond N_g are checked against P.
    """
    if len(counts) < g:
        raise ValueError(f"need N_1..N_{g}")
    a = [counts[m - 1] - (q**m + 1) for m in range(1, len(counts) + 1)]
    b = [Fraction(1)]
    for k in range(1, g + 1):
        b.append(sum(a[m - 1] * b[k - m] for m in range(1, k + 1)) / k)
    if any(x.denominator != 1 for x in b):
        raise RHViolation(f"non-integral zeta coefficients {b}: inconsistent counts")
    full = [int(x) for x in b] + [0] * g
    for i in range(g):
        full[2 * g - i] = q ** (g - i) * full[i]
    P = LPolynomial.from_ints(full, q, 1)
    # counts beyond N_g must be reproduced by the completed polynomial
    if len(counts) > g:
        alphas = P.eigenvalues() * math.sqrt(q)
        for m in range(g + 1, len(counts) + 1):
            pred = q**m + 1 - float(np.sum(alphas**m).real)
            if abs(pred - counts[m - 1]) > 1e-6 * q**m:
                raise RHViolation(f"N_{m} = {counts[m - 1]} disagrees with the functional equation ({pred:.3f})")
    defect = P.unitarity_defect()
    if defect > rh_tol:
        raise RHViolation(f"inverse root off |alpha| = sqrt(q) by {defect:.2e} (relative)")
    return ZetaData(g, q, tuple(counts), P, defect)


def curve_zeta(curve: CurveSpec, extra: int = 0) -> ZetaData:
    g = curve.genus
    counts = [count_points(curve, m) for m in range(1, g + 1 + extra)]
    return zeta_from_counts(g, curve.p, counts)


# ---------------------------------------------------------------------------
# families


@dataclass
class Genus1Scan:
    q: int
    a: np.ndarray  # Weierstrass a for each curve
    b: np.ndarray
    a1: np.ndarray  # N_1 - (q + 1)
    hasse_violations: int

    @property
    def family_size(self) -> int:
        return len(self.a1)

    def det_values(self) -> np.ndarray:
        return 2.0 + self.a1 / math.sqrt(self.q)


def scan_genus1(q: int, pool: Pool | None = None) -> Genus1Scan:
    """All y^2 = x^3 + a x + b over GF(q), q > 3 prime, with 4a^3 + 27b^2 != 0.

    For fixed a, a_1(b) = sum_w h(w) chi(w + b) where h is the value
    histogram of x^3 + a x: one FFT correlation per a.
    """
    if not is_prime(q) or q <= 3:
        raise ValueError("genus-1 scan needs a prime q > 3")
    pool = pool or serial()
    chi = legendre(np.arange(q), q).astype(float)
    fchi = np.fft.fft(chi)
    x = np.arange(q, dtype=np.int64)
    bb = np.arange(q, dtype=np.int64)

    def work(a):
        v = (x * x % q * x + a * x) % q
        h = np.bincount(v, minlength=q).astype(float)
        hrev = np.roll(h[::-1], 1)  # h(-w)
        c = np.fft.ifft(np.fft.fft(hrev) * fchi).real
        a1 = np.rint(c).astype(np.int64)
        if np.max(np.abs(c - a1)) > 1e-6:
            raise ArithmeticError("character correlation is not integral")
        ok = (4 * a**3 + 27 * bb * bb) % q != 0
        return np.full(int(ok.sum()), a), bb[ok], a1[ok]

    parts = pool.map(work, range(q))
    A = np.concatenate([p[0] for p in parts])
    B = np.concatenate([p[1] for p in parts])
    a1 = np.concatenate([p[2] for p in parts])
    viol = int(np.sum(a1 * a1 > 4 * q))
    return Genus1Scan(q, A, B, a1, viol)


def random_squarefree(q: int, degree: int, rng: np.random.Generator) -> tuple[int, ...]:
    while True:
        f = [int(c) for c in rng.integers(0, q, size=degree)] + [1]
        df = [(i * c) % q for i, c in enumerate(f)][1:]
        if len(poly_gcd(f, df, q)) == 1:
            return tuple(f)


@dataclass
class CurveRecord:
    f: tuple[int, ...]
    zeta: ZetaData | None
    error: str | None = None


@dataclass
class HyperellipticScan:
    g: int
    q: int
    seed: int
    records: list[CurveRecord] = field(repr=False)

    @property
    def rh_violations(self) -> int:
        return sum(1 for r in self.records if r.error and r.error.startswith("RH"))

    @property
    def fe_violations(self) -> int:
        return sum(1 for r in self.records if r.error and r.error.startswith("FE"))

    def det_values(self) -> np.ndarray:
        return np.array([r.zeta.det_one_minus_theta() for r in self.records if r.zeta is not None])


def scan_hyperelliptic(g: int, q: int, samples: int, seed: int = 0, pool: Pool | None = None,
                       fe_points: int = 5) -> HyperellipticScan:
    """Seeded sample of y^2 = f(x), f monic squarefree of degree 2g+1, with RH and FE checks."""
    if not is_prime(q) or q == 2:
        raise ValueError("need an odd prime q")
    pool = pool or serial()
    rng = np.random.default_rng(seed)
    polys = [random_squarefree(q, 2 * g + 1, rng) for _ in range(samples)]
    tpoints = [complex(*z) for z in np.random.default_rng(seed + 1).uniform(-0.5, 0.5, size=(fe_points, 2)) / math.sqrt(q)]

    def work(f):
        curve = CurveSpec("hyperelliptic", q, f)
        try:
            z = curve_zeta(curve)
        except RHViolation as exc:
            return CurveRecord(f, None, f"RH: {exc}")
        if z.functional_equation_defect(tpoints) > 1e-9:
            return CurveRecord(f, z, "FE: functional equation fails")
        return CurveRecord(f, z)

    return HyperellipticScan(g, q, seed, pool.map(work, polys))


@dataclass
class FamilyMomentReport:
    g: int
    q: int
    s: float
    family_size: int
    empirical: float
    rmt_value: float
    sampling: str

    @property
    def deviation(self) -> float:
        return self.empirical - self.rmt_value

    @property
    def relative_deviation(self) -> float:
        return abs(self.deviation) / abs(self.rmt_value)

    def to_json(self) -> dict:
        return {"g": self.g, "q": self.q, "family_size": self.family_size, "s": self.s,
                "empirical": self.empirical, "rmt_value": self.rmt_value, "deviation": self.deviation,
                "scale_1_over_sqrt_q": 1 / math.sqrt(self.q), "sampling": self.sampling,
                "family": f"hyperelliptic proxy y^2 = f(x), f monic squarefree, deg {2 * self.g + 1}",
                "weighting": "equations (isomorphism classes not deduplicated)"}


def family_moment(g: int, q: int, s: float, samples: int = 200, seed: int = 0, pool: Pool | None = None) -> FamilyMomentReport:
    """Average of det(I - Theta_X)^s = P(X, q^-1/2)^s over the proxy family, against USp(2g).

    For g = 1 the whole Weierstrass family is enumerated (every monic
    squarefree cubic is a translate of one of these for q > 3); for g >= 2
    a seeded random sample is used.
    """
    if g not in (1, 2, 3):
        raise ValueError("g must be 1, 2 or 3")
    rmt = moment_usp(g, s).real
    if g == 1:
        scan = scan_genus1(q, pool)
        vals = scan.det_values()
        how = "complete"
    else:
        scan = scan_hyperelliptic(g, q, samples, seed, pool)
        vals = scan.det_values()
        how = f"random sample, seed {seed}"
    emp = 1.0 if s == 0 else math.fsum((vals**s).tolist()) / len(vals)
    return FamilyMomentReport(g, q, float(s), len(vals), emp, float(rmt), how)
