"""Numerical integration over the maximal torus of G2 with the Weyl measure.

A torus point is a vector of angles theta in [0, 2pi)^rank and a root or
weight with simple-root coordinates mu evaluates as t^mu = exp(i <mu, theta>).
For G2 the weight lattice equals the root lattice, so this parametrizes the
torus bijectively and Haar measure is d theta / (2 pi)^2.

Quadrature is the tensor-product periodic trapezoid rule.  Sums are reduced
with ``math.fsum`` over fixed-size chunks so results do not depend on how the
work is scheduled.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .laurent import weyl_character
from .moments import DomainError, formula_for, _rep_key
from .parallel import Pool, serial
from .rootsys import LONG, SHORT, RootSystem, build_g2, g2_highest_weight, half_sum_delta, weyl_group

G2 = build_g2()
_WEYL = weyl_group(G2)
_POS_SHORT = np.array([r.coords for r in G2.positive_roots if r.length_class == SHORT], dtype=float)
_POS_LONG = np.array([r.coords for r in G2.positive_roots if r.length_class == LONG], dtype=float)
_POS_ALL = np.array([r.coords for r in G2.positive_roots], dtype=float)

# Generic node offsets (in grid steps) that keep every root hyperplane off the nodes.
GENERIC_OFFSET = (0.5, 1.0 / 3.0)
SINGULAR_DENOMINATOR = 1e-4
ROW_CHUNK = 64


@dataclass(frozen=True)
class TorusPoint:
    angles: tuple[float, ...]

    def __post_init__(self):
        wrapped = tuple(float(a) % (2 * math.pi) for a in self.angles)
        object.__setattr__(self, "angles", wrapped)

    def array(self) -> np.ndarray:
        return np.array(self.angles)


@dataclass(frozen=True)
class SpectralPolynomial:
    eigenangles: tuple[float, ...]
    zero_multiplicity: int

    @property
    def dimension(self) -> int:
        return len(self.eigenangles) + self.zero_multiplicity

    def all_angles(self) -> tuple[float, ...]:
        return (0.0,) * self.zero_multiplicity + self.eigenangles


def torus_grid(n: int, offset=(0.0, 0.0), rows: slice | None = None) -> np.ndarray:
    """Angles of the n x n trapezoid grid, shape (rows, n, 2)."""
    h = 2 * math.pi / n
    i = np.arange(n)[rows if rows is not None else slice(None)]
    a = h * (i + offset[0])
    b = h * (np.arange(n) + offset[1])
    A, B = np.meshgrid(a, b, indexing="ij")
    return np.stack([A, B], axis=-1)


def _as_angles(t) -> np.ndarray:
    if isinstance(t, TorusPoint):
        return t.array()
    return np.asarray(t, dtype=float)


def _one_minus(roots: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """|1 - t^a|^2 for each positive root a; shape (..., len(roots))."""
    ph = angles @ roots.T
    return 2.0 - 2.0 * np.cos(ph)


def weyl_density(t, rs: RootSystem | None = None) -> np.ndarray:
    """|Delta(t)|^2 / |W| = prod_{a in R} (1 - t^a) / |W|."""
    angles = _as_angles(t)
    if rs is None or rs is G2:
        roots = np.array([r.coords for r in G2.roots], dtype=float)
        order = 12
    else:
        roots = np.array([r.coords for r in rs.roots], dtype=float)
        order = len(weyl_group(rs))
    ph = angles @ roots.T
    prod = np.prod(1.0 - np.exp(1j * ph), axis=-1)
    if np.max(np.abs(prod.imag), initial=0.0) > 1e-12 * max(1.0, float(np.max(np.abs(prod.real), initial=0.0))):
        raise ArithmeticError("Weyl density has a non-negligible imaginary part")
    return np.maximum(prod.real, 0.0) / order


def char_fundamental(rep, t) -> np.ndarray:
    """Characters of [1,0] (1 + sum over short roots) and [0,1] (2 + sum over all roots)."""
    angles = _as_angles(t)
    key = _rep_key(rep)
    if key == "7":
        return 1.0 + 2.0 * np.sum(np.cos(angles @ _POS_SHORT.T), axis=-1)
    if key == "14":
        return 2.0 + 2.0 * np.sum(np.cos(angles @ _POS_ALL.T), axis=-1)
    raise ValueError(f"unknown representation {rep!r}")


@lru_cache(maxsize=64)
def _alternant_data(n1: int, n2: int):
    lam = g2_highest_weight(n1, n2)
    delta = half_sum_delta(G2).coords
    shifted = tuple(a + int(d) for a, d in zip(lam, delta))
    num = np.array([[float(x) for x in w.apply(shifted)] for w in _WEYL])
    den = np.array([[float(x) for x in w.apply(delta)] for w in _WEYL])
    signs = np.array([w.det for w in _WEYL], dtype=float)
    return num, den, signs


@lru_cache(maxsize=64)
def character_polynomial(n1: int, n2: int):
    """Exact character of [n1, n2] as a Laurent polynomial (weights with multiplicities)."""
    return weyl_character(G2, g2_highest_weight(n1, n2))


def char_weyl(n1: int, n2: int, t) -> np.ndarray:
    """Character of [n1, n2] from the Weyl character formula.

    Near the walls the ratio loses about -log10|denominator| digits, so
    where the alternating denominator is below SINGULAR_DENOMINATOR the
    exactly divided character polynomial is evaluated instead.
    """
    if n1 < 0 or n2 < 0:
        raise ValueError("labels must be non-negative")
    angles = _as_angles(t)
    num_w, den_w, signs = _alternant_data(n1, n2)
    num = np.exp(1j * (angles @ num_w.T)) @ signs
    den = np.exp(1j * (angles @ den_w.T)) @ signs
    bad = np.abs(den) < SINGULAR_DENOMINATOR
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(bad, 0.0, num / np.where(bad, 1.0, den))
    if np.any(bad):
        poly = character_polynomial(n1, n2)
        out = np.asarray(out)
        out[bad] = poly.evaluate(angles[bad])
    return out.real if np.ndim(out) else complex(out).real


def _weights(rep) -> tuple[np.ndarray, int]:
    key = _rep_key(rep)
    if key == "7":
        return np.array([r.coords for r in G2.roots_of_class(SHORT)], dtype=float), 1
    if key == "14":
        return np.array([r.coords for r in G2.roots], dtype=float), 2
    raise ValueError(f"unknown representation {rep!r}")


def eigenangles(rep, t) -> SpectralPolynomial:
    weights, zeros = _weights(rep)
    ang = weights @ _as_angles(t)
    ang = np.mod(ang + math.pi, 2 * math.pi) - math.pi
    return SpectralPolynomial(tuple(float(a) for a in ang), zeros)


def zhat(rep, t, phi: float = 0.0) -> np.ndarray:
    """prod over nonzero weights of (1 - t^mu e^{-i phi}): Z with its forced zeros removed."""
    weights, _ = _weights(rep)
    ph = _as_angles(t) @ weights.T - phi
    return np.prod(1.0 - np.exp(1j * ph), axis=-1)


def zfull(rep, t, phi: float) -> np.ndarray:
    """det(1 - U e^{-i phi}) including the (1 - e^{-i phi})^m factor."""
    _, zeros = _weights(rep)
    return (1.0 - np.exp(-1j * phi)) ** zeros * zhat(rep, t, phi)


def _integrand_symmetric_point(rep, angles: np.ndarray, s: float) -> np.ndarray:
    """Weyl density times |Z-hat(0)|^s, written as prod |1 - t^a|^{2 k_a} / 12."""
    key = _rep_key(rep)
    k_short = s + 1.0
    k_long = 1.0 if key == "7" else s + 1.0
    fs = _one_minus(_POS_SHORT, angles)
    fl = _one_minus(_POS_LONG, angles)
    with np.errstate(divide="ignore"):
        out = np.prod(fs ** k_short, axis=-1) * np.prod(fl ** k_long, axis=-1)
    return out / 12.0


def _fsum_rows(func, n: int, pool: Pool, offset=(0.0, 0.0)) -> float:
    chunks = [slice(lo, min(lo + ROW_CHUNK, n)) for lo in range(0, n, ROW_CHUNK)]

    def work(rows):
        vals = func(torus_grid(n, offset, rows))
        return math.fsum(np.ravel(vals).tolist())

    partials = pool.map(work, chunks)
    return math.fsum(partials) / (n * n)


def quad_moment(rep, s: float, phi: float = 0.0, n: int = 512, pool: Pool | None = None,
                extrapolate: bool = True, refine_threshold: float = 1e-3, refine_factor: int = 16) -> float:
    """<|Z-hat(0)|^s> (phi = 0) or <|Z(phi)|^s> (phi != 0) by torus quadrature.

    At phi = 0 and non-integer s the integrand behaves like |x|^(2s+2) across
    root hyperplanes through the nodes, which limits the periodic trapezoid
    rule to O(h^(2s+3)); with ``extrapolate`` one Richardson step against the
    n/2 grid removes that term.  For phi != 0 the singular curves cut the grid
    irregularly, there is no clean error expansion, and the plain rule is
    used (about 1e-4 at n = 512 for s = 1).

    For s < 0 at phi = 0 the integrand is singular on root hyperplanes; nodes
    are then shifted off those hyperplanes and the cells where |Z-hat| is below
    ``refine_threshold`` are re-integrated on a refine_factor^2 subgrid.  Only
    the leading digit should be trusted for s < -1/2.
    """
    pool = pool or serial()
    s = float(s)
    if phi == 0.0:
        formula = formula_for(rep)
        if s <= float(formula.domain_bound):
            raise DomainError(f"moment of rep {_rep_key(rep)} requires s > {formula.domain_bound}")
        if s < 0:
            return _quad_negative(rep, s, n, pool, refine_threshold, refine_factor)

        def integrand(a):
            return _integrand_symmetric_point(rep, a, s)

        order = 2 * s + 3
        smooth = s == int(s)
        offset = (0.0, 0.0)
    else:
        def integrand(a):
            return weyl_density(a) * np.abs(zfull(rep, a, phi)) ** s

        order = 0.0
        smooth = True
        offset = (0.0, 0.0) if s >= 0 else GENERIC_OFFSET
    value = _fsum_rows(integrand, n, pool, offset)
    if extrapolate and not smooth and n % 2 == 0 and order > 0:
        coarse = _fsum_rows(integrand, n // 2, pool, offset)
        value += (value - coarse) / (2.0 ** order - 1.0)
    return value


def _quad_negative(rep, s, n, pool, thresh, factor) -> float:
    h = 2 * math.pi / n

    def work(rows):
        a = torus_grid(n, GENERIC_OFFSET, rows)
        vals = _integrand_symmetric_point(rep, a, s)
        small = np.abs(zhat(rep, a, 0.0)) < thresh
        if np.any(small):
            centers = a[small]
            sub = (np.arange(factor) + 0.5) / factor - 0.5
            du, dv = np.meshgrid(sub * h, sub * h, indexing="ij")
            offs = np.stack([du.ravel(), dv.ravel() + h / (3 * factor)], axis=-1)
            pts = centers[:, None, :] + offs[None, :, :]
            vals[small] = _integrand_symmetric_point(rep, pts, s).mean(axis=1)
        return math.fsum(vals.ravel().tolist())

    chunks = [slice(lo, min(lo + ROW_CHUNK, n)) for lo in range(0, n, ROW_CHUNK)]
    return math.fsum(pool.map(work, chunks)) / (n * n)


def quad_class_function(func, n: int = 256, pool: Pool | None = None, offset=(0.0, 0.0)) -> complex:
    """Haar average of a class function given on torus angles."""
    pool = pool or serial()

    def work_re(a):
        v = weyl_density(a) * func(a)
        return np.real(v)

    def work_im(a):
        v = weyl_density(a) * func(a)
        return np.imag(v)

    re = _fsum_rows(work_re, n, pool, offset)
    im = _fsum_rows(work_im, n, pool, offset)
    return complex(re, im)


def orthogonality_check(n1: int, n2: int, m1: int, m2: int, n: int = 128, pool: Pool | None = None) -> complex:
    """(1/12) int |Delta|^2 chi_[n1,n2] conj(chi_[m1,m2]) dt by quadrature."""
    if max(n1, n2, m1, m2) > 3:
        raise ValueError("labels above 3 are outside the supported range")
    return quad_class_function(lambda a: char_weyl(n1, n2, a) * np.conj(char_weyl(m1, m2, a)), n, pool)


def trace_moments(rep, kmax: int = 4, n: int = 256, pool: Pool | None = None) -> list[float]:
    """Haar moments E[chi^k], k = 1..kmax, of the character of rep."""
    return [quad_class_function(lambda a, k=k: char_fundamental(rep, a) ** k, n, pool).real
            for k in range(1, kmax + 1)]


@dataclass
class Histogram:
    edges: np.ndarray
    density: np.ndarray
    statistic: str
    rep: str
    meta: dict = field(default_factory=dict)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def total(self) -> float:
        return math.fsum((self.density * self.widths).tolist())

    def moment(self, k: int) -> float:
        return math.fsum((self.centers ** k * self.density * self.widths).tolist())

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_left", "bin_right", "density"])
            for lo, hi, d in zip(self.edges[:-1], self.edges[1:], self.density):
                w.writerow([repr(float(lo)), repr(float(hi)), repr(float(d))])

    def to_json(self) -> dict:
        return {
            "statistic": self.statistic,
            "rep": self.rep,
            "bins": len(self.density),
            "edges": [float(x) for x in self.edges],
            "density": [float(x) for x in self.density],
            "moments": [self.moment(k) for k in range(1, 5)],
            **self.meta,
        }


def _statistic(rep, statistic: str, angles: np.ndarray, phi: float) -> np.ndarray:
    if statistic == "trace":
        return char_fundamental(rep, angles)
    z = np.abs(zhat(rep, angles, phi))
    if statistic == "abs":
        return z
    if statistic == "logabs":
        with np.errstate(divide="ignore"):
            return np.log(z)
    raise ValueError(f"unknown statistic {statistic!r}")


def value_histogram(rep, statistic: str = "trace", phi: float = 0.0, bins: int = 100, n: int = 512,
                    value_range: tuple[float, float] | None = None, pool: Pool | None = None) -> Histogram:
    """Density histogram of a statistic under Haar measure, by weighted grid accumulation.

    Nodes sit at generic offsets so log|Z-hat| is finite at every node.  Mass
    falling outside ``value_range`` is counted in the normalization but not
    in any bin.
    """
    if bins < 10:
        raise ValueError("need at least 10 bins")
    pool = pool or serial()
    chunks = [slice(lo, min(lo + ROW_CHUNK, n)) for lo in range(0, n, ROW_CHUNK)]

    def values(rows):
        a = torus_grid(n, GENERIC_OFFSET, rows)
        w = weyl_density(a).ravel()
        x = _statistic(rep, statistic, a, phi).ravel()
        keep = w > 0
        return x[keep], w[keep]

    parts = pool.map(values, chunks)
    x = np.concatenate([p[0] for p in parts])
    w = np.concatenate([p[1] for p in parts])
    if value_range is None:
        value_range = (float(x.min()), float(x.max()))
    counts = np.zeros(bins)
    edges = np.linspace(value_range[0], value_range[1], bins + 1)
    idx = np.searchsorted(edges, x, side="right") - 1
    idx[x == edges[-1]] = bins - 1
    inside = (idx >= 0) & (idx < bins)
    # order-independent per-bin accumulation
    order = np.lexsort((w[inside], idx[inside]))
    sorted_idx = idx[inside][order]
    sorted_w = w[inside][order]
    bounds = np.searchsorted(sorted_idx, np.arange(bins + 1))
    for b in range(bins):
        counts[b] = math.fsum(sorted_w[bounds[b] : bounds[b + 1]].tolist())
    total = math.fsum(w.tolist())
    density = counts / (total * np.diff(edges))
    return Histogram(edges, density, statistic, _rep_key(rep),
                     {"grid": n, "phi": phi, "total_weight": total, "mass_in_range": math.fsum(counts.tolist()) / total})


def monte_carlo_moment(rep, s: float, samples: int = 100_000, seed: int = 0) -> tuple[float, float]:
    """Spot-check estimate of the phi = 0 moment from uniform torus samples (weighted); returns (mean, stderr)."""
    rng = np.random.default_rng(seed)
    a = rng.uniform(0, 2 * math.pi, size=(samples, 2))
    v = _integrand_symmetric_point(rep, a, s)
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(samples))
