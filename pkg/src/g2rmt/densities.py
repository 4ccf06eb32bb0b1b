"""Value distributions of |Z-hat| and log|Z-hat| from their Gamma-ratio moments.

For a moment formula M(s) = E[|Z-hat|^s] the density of u = log|Z-hat| is the
inverse Fourier-Laplace transform along any vertical line Re s = c inside the
domain of M,

    P(u) = (1/2pi) int M(c + iy) exp(-(c + iy) u) dy,

with c = 0 giving P1 and P2(x) = P(log x) / x.  Along vertical lines M decays
only polynomially, M(s) ~ K exp(sL) s^(-beta) (1 + O(1/s)), where exp(L) is
the largest value of |Z-hat|.  For the 14-dimensional representation
beta = 1 and the density jumps at u = L, so plain truncation converges far too
slowly.  We therefore split M = R + A, where

    A(s) = exp(sL) sum_n a_n (kappa + s)^-(beta + n)

matches the Stirling expansion of M to ``tail_terms`` orders.  A has the
closed-form inverse sum_n a_n exp(-kappa (L-u)) (L-u)^(beta+n-1) / Gamma(beta+n)
on u < L, and the remainder R is integrated numerically on composite
Gauss-Legendre panels up to the point where |R| < 1e-12.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np
from scipy.special import binom, gammaln

from .moments import GammaRatioFormula
from .parallel import Pool, serial

TRUNCATION_THRESHOLD = 1e-12
MAX_TRUNCATION = 1e4
GL_POINTS = 16
CLIP_TOLERANCE = 1e-9


class SlowDecayError(RuntimeError):
    pass


def _bernoulli_numbers(n: int) -> list[Fraction]:
    b = [Fraction(1)]
    for m in range(1, n + 1):
        b.append(-sum(comb(m + 1, k) * b[k] for k in range(m)) / Fraction(m + 1))
    return b


def _bernoulli_poly(n: int, x: Fraction, b: list[Fraction]) -> Fraction:
    return sum(comb(n, k) * b[k] * x ** (n - k) for k in range(n + 1))


@dataclass(frozen=True)
class TailExpansion:
    """Leading large-|s| behaviour of a Gamma-ratio moment function."""

    log_max: float  # L
    beta: float
    kappa: float
    coeffs: tuple[float, ...]

    def transform(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=complex)
        base = self.kappa + s
        tot = np.zeros_like(s)
        for n, a in enumerate(self.coeffs):
            tot += a * base ** (-(self.beta + n))
        return np.exp(s * self.log_max) * tot

    def density(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        d = self.log_max - u
        out = np.zeros_like(u)
        inside = d >= 0
        dd = d[inside]
        tot = np.zeros_like(dd)
        for n, a in enumerate(self.coeffs):
            m = self.beta + n
            with np.errstate(divide="ignore"):
                logterm = (m - 1) * np.log(dd) - gammaln(m) if m != 1 else np.zeros_like(dd)
            tot += a * np.exp(logterm - self.kappa * dd)
        out[inside] = tot
        return out


def tail_expansion(formula: GammaRatioFormula, terms: int = 8, kappa: float = 1.0) -> TailExpansion:
    """Stirling expansion of ``formula`` rewritten in powers of 1/(kappa + s).

    Uses log Gamma(c s + o) ~ (cs + o - 1/2) log(cs) - cs + log(2pi)/2
    + sum_k (-1)^(k+1) B_(k+1)(o) / (k (k+1) (cs)^k).
    """
    signed = [(1, c, Fraction(o)) for c, o in formula.numerator] + [(-1, c, Fraction(o)) for c, o in formula.denominator]
    bern = _bernoulli_numbers(terms + 2)
    beta = -sum(e * (float(o) - 0.5) for e, _, o in signed)
    log_k = math.log(formula.prefactor) + sum(
        e * ((float(o) - 0.5) * math.log(c) + 0.5 * math.log(2 * math.pi)) for e, c, o in signed
    )
    ej = [0.0] + [
        sum(e * (-1) ** (j + 1) * float(_bernoulli_poly(j + 1, o, bern)) / (j * (j + 1) * c ** j) for e, c, o in signed)
        for j in range(1, terms + 1)
    ]
    # exp of the power series in 1/s
    h = [1.0]
    for n in range(1, terms + 1):
        h.append(sum(j * ej[j] * h[n - j] for j in range(1, n + 1)) / n)
    k = math.exp(log_k)
    # s^-(beta+j) = u^(beta+j) (1 - kappa u)^-(beta+j) with u = 1/(kappa+s)
    coeffs = tuple(
        k * sum(h[j] * binom(beta + n - 1, n - j) * kappa ** (n - j) for j in range(n + 1)) for n in range(terms)
    )
    return TailExpansion(formula.log_growth_rate, beta, kappa, coeffs)


def _residual(formula, tail, s):
    m = np.exp(formula.log_value(s))
    return m - tail.transform(s) if tail is not None else m


def truncation_point(formula: GammaRatioFormula, tail: TailExpansion | None, c: float,
                     threshold: float = TRUNCATION_THRESHOLD, y_max: float = MAX_TRUNCATION) -> float:
    """Smallest power-of-two Y with |R(c+iy)| below threshold on a probe set in [Y, 4Y]."""
    y = 1.0
    while y <= y_max:
        probes = y * np.linspace(1.0, 4.0, 25)
        if np.all(np.abs(_residual(formula, tail, c + 1j * probes)) < threshold):
            return y
        y *= 2
    raise SlowDecayError(
        f"{formula.name or 'formula'}: integrand still above {threshold:g} at |y| = {y_max:g}"
    )


def _gl_nodes(y_max: float, width: float):
    npan = max(1, int(math.ceil(y_max / width)))
    x, w = np.polynomial.legendre.leggauss(GL_POINTS)
    edges = np.linspace(0.0, y_max, npan + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@dataclass
class InversionInfo:
    truncation: float
    panels: int
    nodes: int
    max_imag_residue: float
    tail_terms: int
    kappa: float

    def to_json(self) -> dict:
        return {
            "truncation_Y": self.truncation,
            "panels": self.panels,
            "nodes": self.nodes,
            "max_imag_residue": self.max_imag_residue,
            "tail_terms": self.tail_terms,
            "kappa": self.kappa,
        }


def _choose_tail(formula, terms, c):
    if terms == 0:
        return None, truncation_point(formula, None, c)
    best = None
    for kappa in (1.0, 2.0, 3.0, 4.0):
        tail = tail_expansion(formula, terms, kappa)
        try:
            y = truncation_point(formula, tail, c)
        except SlowDecayError:
            continue
        if best is None or y < best[1]:
            best = (tail, y)
    if best is None:
        raise SlowDecayError(f"{formula.name}: no tail expansion reached the truncation threshold")
    return best


def log_density(formula: GammaRatioFormula, u, c: float = 0.0, tail_terms: int = 8,
                pool: Pool | None = None, chunk: int = 512) -> tuple[np.ndarray, InversionInfo]:
    """Density of log|Z-hat| at the points u, by inversion along Re s = c."""
    if c <= float(formula.domain_bound):
        raise ValueError(f"contour Re s = {c} is outside the domain Re s > {formula.domain_bound}")
    pool = pool or serial()
    u = np.atleast_1d(np.asarray(u, dtype=float))
    tail, y_max = _choose_tail(formula, tail_terms, c)
    if tail is not None and c <= -tail.kappa:
        raise ValueError("contour lies left of the tail expansion pole")
    scale = max(1.0, float(np.max(np.abs(u))), float(np.max(np.abs(formula.log_growth_rate - u))))
    width = min(1.0, 2.0 / scale)
    y, w = _gl_nodes(y_max, width)
    # both half-lines are evaluated so the imaginary residue is a real check
    y_full = np.concatenate([-y[::-1], y])
    w_full = np.concatenate([w[::-1], w])
    s = c + 1j * y_full
    r = _residual(formula, tail, s) * w_full

    def work(lo):
        uu = u[lo : lo + chunk]
        ker = np.exp(-1j * np.outer(uu, y_full))
        vals = (ker @ r) / (2 * math.pi)
        return vals * np.exp(-c * uu)

    vals = np.concatenate(pool.map(work, range(0, len(u), chunk)))
    imag = float(np.max(np.abs(vals.imag), initial=0.0))
    if imag > 1e-8:
        raise ArithmeticError(f"inverse transform has imaginary residue {imag:.2e}")
    out = vals.real
    if tail is not None:
        out = out + tail.density(u)
    info = InversionInfo(y_max, len(y) // GL_POINTS, 2 * len(y), imag, tail_terms, tail.kappa if tail else 0.0)
    return out, info


def p1_density(formula: GammaRatioFormula, x, **kw) -> np.ndarray:
    """Density of log|Z-hat| (contour on the imaginary axis)."""
    vals, _ = log_density(formula, x, 0.0, **kw)
    return vals if np.ndim(x) else float(vals[0])


def p2_density(formula: GammaRatioFormula, x, c: float = 0.5, **kw) -> np.ndarray:
    """Density of |Z-hat| at x > 0, inverted along Re s = c > 0."""
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x_arr <= 0):
        raise ValueError("P2 is defined for x > 0")
    if c <= 0:
        raise ValueError("P2 needs a contour with c > 0")
    vals, _ = log_density(formula, np.log(x_arr), c, **kw)
    vals = vals / x_arr
    return vals if np.ndim(x) else float(vals[0])


@dataclass
class DensityCurve:
    xs: np.ndarray
    ps: np.ndarray
    formula: GammaRatioFormula
    kind: str  # "P1" or "P2"
    meta: dict = field(default_factory=dict)

    def integral(self, weight=None) -> float:
        f = self.ps if weight is None else self.ps * weight(self.xs)
        return float(np.trapezoid(f, self.xs))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "density"])
            for x, p in zip(self.xs, self.ps):
                w.writerow([repr(float(x)), repr(float(p))])

    def to_json(self) -> dict:
        return {"kind": self.kind, "formula": self.formula.name, "points": len(self.xs),
                "x_min": float(self.xs[0]), "x_max": float(self.xs[-1]),
                "integral": self.integral(), **self.meta}


def _clip(ps: np.ndarray) -> np.ndarray:
    worst = float(ps.min(initial=0.0))
    if worst < -CLIP_TOLERANCE:
        raise ArithmeticError(f"density has negative value {worst:.2e} beyond the clipping tolerance")
    return np.maximum(ps, 0.0)


def log_grid(formula: GammaRatioFormula, span: float = 40.0, step: float = 0.01,
             fine_span: float = 6.0, fine_step: float = 0.001) -> np.ndarray:
    """Grid in u = log|Z-hat| ending exactly at the support maximum L, refined near L."""
    top = formula.log_growth_rate
    fine = top - fine_step * np.arange(int(round(fine_span / fine_step)), -1, -1)
    coarse = fine[0] - step * np.arange(int(round((span - fine_span) / step)), 0, -1)
    return np.concatenate([coarse, fine])


def p1_curve(formula: GammaRatioFormula, us: np.ndarray | None = None, **kw) -> DensityCurve:
    us = log_grid(formula) if us is None else np.asarray(us, dtype=float)
    ps, info = log_density(formula, us, 0.0, **kw)
    return DensityCurve(us, _clip(ps), formula, "P1", info.to_json())


def p2_curve(formula: GammaRatioFormula, xs: np.ndarray | None = None, c: float = 0.5, **kw) -> DensityCurve:
    """P2 on a grid that is logarithmically spaced toward 0 and ends at the support maximum."""
    # below exp(L - 20) the remaining mass is < 1e-8 while roundoff grows like x^-(1+c)
    xs = np.exp(log_grid(formula, span=20.0)) if xs is None else np.asarray(xs, dtype=float)
    ps, info = log_density(formula, np.log(xs), c, **kw)
    meta = info.to_json()
    meta["c"] = c
    return DensityCurve(xs, _clip(ps) / xs, formula, "P2", meta)


def bin_averages(curve: DensityCurve, edges: np.ndarray, refine: int = 64) -> np.ndarray:
    """Average of the density over each histogram bin (Gauss-Legendre inside each bin)."""
    x, w = np.polynomial.legendre.leggauss(refine)
    lo, hi = edges[:-1], edges[1:]
    pts = 0.5 * (hi + lo)[:, None] + 0.5 * (hi - lo)[:, None] * x[None, :]
    if curve.kind == "P1":
        vals, _ = log_density(curve.formula, pts.ravel(), 0.0)
    else:
        vals, _ = log_density(curve.formula, np.log(pts.ravel()), curve.meta.get("c", 0.5))
        vals = vals / pts.ravel()
    vals = vals.reshape(pts.shape)
    return 0.5 * (vals * w[None, :]).sum(axis=1)
