"""Exponential sums over finite fields and the unitary classes attached to them.

Gauss sums, Kloosterman and hyper-Kloosterman sums, and the sum
NMK(t) = sum_{x != 0} chi2(x) psi(x^7 + t x) whose normalized L-functions
are characteristic polynomials of matrices in G2 inside SO(7).

Sign conventions: a family of sums S(k_m) over the degree-m extensions has
normalized Frobenius class Theta with Tr Theta^m = -S(k_m) / (scale)^m; the
L-polynomial det(I - T * scale * Theta) has constant term 1 and the
coefficient of T equals S(k_1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import stats

from .ffield import (
    AdditiveCharacter,
    FiniteField,
    MultiplicativeCharacter,
    TableCapExceeded,
    cached_field,
    is_prime,
    legendre,
    quadratic_character,
    unit_roots,
)
from .parallel import Pool, serial

CONVOLUTION_CAP = 1 << 20
UNITARITY_TOL = 1e-6


class UnitarityError(ArithmeticError):
    pass


class SignResolutionError(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# L-polynomials


def power_sums_to_elementary(ps: Sequence[complex]) -> list[complex]:
    """Newton's identities: e_0..e_n from p_1..p_n (complex floats or Fractions)."""
    e = [1]
    for k in range(1, len(ps) + 1):
        acc = 0
        for i in range(1, k + 1):
            acc += (-1) ** (i - 1) * e[k - i] * ps[i - 1]
        e.append(acc / k)
    return e


def elementary_to_power_sums(es: Sequence[complex], n: int) -> list[complex]:
    """p_1..p_n from e_1..e_d (e_k = 0 beyond the degree)."""
    e = list(es) + [0] * max(0, n - len(es))
    p = []
    for k in range(1, n + 1):
        acc = (-1) ** (k - 1) * k * e[k - 1]
        for i in range(1, k):
            acc += (-1) ** (i - 1) * e[i - 1] * p[k - i - 1]
        p.append(acc)
    return p


def _squarefree_int(coeffs: Sequence[int]) -> list[Fraction]:
    """Squarefree part of an integer polynomial (low degree first), exact."""

    def trim(a):
        a = list(a)
        while a and a[-1] == 0:
            a.pop()
        return a

    def rem(a, b):
        a = [Fraction(x) for x in a]
        while len(a) >= len(b) and a:
            c = a[-1] / b[-1]
            shift = len(a) - len(b)
            for i, y in enumerate(b):
                a[shift + i] -= c * y
            a = trim(a)
        return a

    def div(a, b):
        a = [Fraction(x) for x in a]
        out = [Fraction(0)] * (len(a) - len(b) + 1)
        while len(a) >= len(b) and a:
            c = a[-1] / b[-1]
            shift = len(a) - len(b)
            out[shift] = c
            for i, y in enumerate(b):
                a[shift + i] -= c * y
            a = trim(a)
        return out

    f = trim([Fraction(c) for c in coeffs])
    df = trim([i * c for i, c in enumerate(f)][1:])
    if not df:
        return f
    a, b = f, df
    while b:
        a, b = b, rem(a, b)
    if len(a) <= 1:
        return f
    return div(f, a)


@dataclass
class LPolynomial:
    """P(T) = sum c_k T^k = prod (1 - alpha_j T) with |alpha_j| expected to be q^(weight/2)."""

    coeffs: np.ndarray
    q: float
    weight: int
    exact: tuple[int, ...] | None = None

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if abs(self.coeffs[0] - 1) > 1e-12:
            raise ValueError("L-polynomial must have constant term 1")

    @classmethod
    def from_ints(cls, coeffs: Sequence[int], q: int, weight: int) -> "LPolynomial":
        return cls(np.array(coeffs, dtype=complex), q, weight, tuple(int(c) for c in coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def scale(self) -> float:
        return float(self.q) ** (self.weight / 2)

    def __call__(self, t):
        return np.polyval(self.coeffs[::-1], t)

    def normalized_coeffs(self) -> np.ndarray:
        return self.coeffs / self.scale ** np.arange(self.degree + 1)

    def eigenvalues(self) -> np.ndarray:
        """Normalized inverse roots (eigenvalues of the unitary class)."""
        if self.degree == 0:
            return np.zeros(0, dtype=complex)
        if self.exact is not None:
            # exact squarefree part keeps repeated roots from losing half their digits
            sf = _squarefree_int(self.exact)
            c = np.array([float(x) for x in sf])
            roots = np.roots(c[::-1])  # roots of P; inverse roots are 1/roots
            return 1.0 / (roots * self.scale)
        return np.roots(self.normalized_coeffs())

    def unitarity_defect(self) -> float:
        ev = self.eigenvalues()
        return float(np.max(np.abs(np.abs(ev) - 1.0), initial=0.0))

    def check_unitarity(self, tol: float = UNITARITY_TOL, label=None) -> float:
        d = self.unitarity_defect()
        if d > tol:
            raise UnitarityError(f"normalized root off the unit circle by {d:.2e}" + (f" (parameter {label})" if label is not None else ""))
        return d

    def angles(self) -> np.ndarray:
        return np.sort(np.angle(self.eigenvalues()))

    @property
    def trace(self) -> float | complex:
        """Trace of the unitary class: minus the normalized T coefficient."""
        t = -self.coeffs[1] / self.scale if self.degree else 0.0
        return t.real if abs(t.imag) < 1e-12 else t

    def normalized(self) -> "LPolynomial":
        return LPolynomial(self.normalized_coeffs(), 1, 0)

    def is_palindromic(self, tol: float = 1e-9) -> bool:
        """Normalized coefficients read the same both ways."""
        c = self.normalized_coeffs()
        return bool(np.max(np.abs(c - c[::-1])) <= tol * max(1.0, float(np.max(np.abs(c)))))

    def deflate_one(self, tol: float = 1e-9) -> "LPolynomial":
        """Normalized polynomial divided by (1 - T); requires a root at T = 1."""
        c = self.normalized_coeffs()
        quo, rem = np.polydiv(c[::-1], np.array([-1.0, 1.0]))
        if np.max(np.abs(rem)) > tol * max(1.0, float(np.max(np.abs(c)))):
            raise ValueError("no normalized root at T = 1")
        return LPolynomial(quo[::-1], 1, 0)

    def to_json(self) -> dict:
        c = self.exact if self.exact is not None else [[float(z.real), float(z.imag)] for z in self.coeffs]
        return {"coeffs": list(c), "q": self.q, "weight": self.weight}


@dataclass
class ConjugacyClassSample:
    parameter: int
    trace: float
    lpoly: LPolynomial | None = None
    eigenangles: np.ndarray | None = None


def _from_normalized(norm: Sequence[complex], q, weight) -> LPolynomial:
    scale = float(q) ** (weight / 2)
    c = np.asarray(norm, dtype=complex) * scale ** np.arange(len(norm))
    return LPolynomial(c, q, weight)


def _charpoly_from_elementary(e: Sequence[complex]) -> np.ndarray:
    return np.array([(-1) ** k * e[k] for k in range(len(e))], dtype=complex)


def self_dual_charpoly(ps: Sequence[complex], degree: int, forced_one: bool) -> np.ndarray:
    """Normalized det(I - Theta T) for a real orthogonal/symplectic class from a few power sums.

    The even-degree part is palindromic, so p_1..p_(d/2) fix it; with
    ``forced_one`` a factor (1 - T) for the eigenvalue 1 is split off first.
    """
    even = degree - 1 if forced_one else degree
    if even % 2:
        raise ValueError("self-dual part must have even degree")
    half = even // 2
    shifted = [complex(p) - (1 if forced_one else 0) for p in ps[:half]]
    if len(shifted) < half:
        raise ValueError(f"need {half} power sums")
    e = power_sums_to_elementary(shifted)
    full = e + [e[even - k] for k in range(half + 1, even + 1)]
    poly = _charpoly_from_elementary(full)
    if forced_one:
        poly = np.convolve(poly, [1.0, -1.0])
    return poly


# ---------------------------------------------------------------------------
# Gauss sums


def gauss_sum(chi: MultiplicativeCharacter, psi: AdditiveCharacter) -> complex:
    """g(chi, psi) = sum_{x != 0} chi(x) psi(x), with the |g| = sqrt(q) check."""
    if chi.field is not psi.field:
        raise ValueError("characters live on different fields")
    if chi.principal:
        raise ValueError("gauss_sum needs a nonprincipal multiplicative character")
    x = chi.field.nonzero()
    v = chi(x) * psi(x)
    g = complex(math.fsum(v.real.tolist()), math.fsum(v.imag.tolist()))
    q = chi.field.q
    if abs(abs(g) ** 2 - q) > 1e-9 * q:
        raise ArithmeticError(f"|g|^2 = {abs(g) ** 2} differs from q = {q}")
    return g


def gauss_lpoly(chi, psi) -> LPolynomial:
    return LPolynomial(np.array([1.0, gauss_sum(chi, psi)]), chi.field.q, 1)


def lpoly_from_sums(sums: Sequence[complex], degree: int) -> np.ndarray:
    """Truncated exp(sum S_m T^m / m) as coefficients 1..degree."""
    e = power_sums_to_elementary([-s for s in sums])
    return np.array([(-1) ** k * e[k] for k in range(min(degree, len(sums)) + 1)], dtype=complex)


@dataclass
class HasseDavenportReport:
    n: int
    lhs: complex  # -g_n computed over the extension
    rhs: complex  # (-g)^n
    discrepancy: float

    @property
    def ok(self) -> bool:
        return self.discrepancy <= 1e-8 * max(1.0, abs(self.rhs))


def hasse_davenport_check(chi: MultiplicativeCharacter, psi: AdditiveCharacter, n: int) -> HasseDavenportReport:
    """Compare -g_n(chi o N, psi o Tr) computed directly over k_n with (-g(chi, psi))^n."""
    base = chi.field
    g = gauss_sum(chi, psi)
    if n == 1:
        return HasseDavenportReport(1, -g, -g, 0.0)
    ext = cached_field(base.p, base.r * n)
    x = ext.nonzero()
    nx = ext.norm(x, base.r)
    if base.r == 1:
        nb = nx
    else:
        emb = ext.embedding(base)
        back = np.full(ext.q, -1, dtype=np.int64)
        back[emb] = np.arange(base.q)
        nb = back[nx]
    chi_vals = chi(nb)
    psi_vals = unit_roots(base.p)[(psi.a * ext.trace(x)) % base.p]
    v = chi_vals * psi_vals
    gn = complex(math.fsum(v.real.tolist()), math.fsum(v.imag.tolist()))
    rhs = (-g) ** n
    return HasseDavenportReport(n, -gn, rhs, abs(-gn - rhs))


@dataclass
class GaussSpectrum:
    p: int
    angles: np.ndarray
    star_discrepancy: float
    ks_statistic: float
    ks_pvalue: float
    pairing_defect: float

    def to_json(self) -> dict:
        return {"p": self.p, "count": len(self.angles), "star_discrepancy": self.star_discrepancy,
                "ks_stat": self.ks_statistic, "ks_pvalue": self.ks_pvalue, "pairing_defect": self.pairing_defect}


def star_discrepancy(u: np.ndarray) -> float:
    u = np.sort(np.asarray(u))
    n = len(u)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - u), np.max(u - (i - 1) / n)))


def gauss_angle_spectrum(p: int) -> GaussSpectrum:
    """Angles theta_chi of g(chi, psi) = sqrt(p) e^(i theta) for all nonprincipal chi mod p."""
    if not is_prime(p) or p < 5:
        raise ValueError("need a prime p >= 5")
    f = cached_field(p)
    n = p - 1
    # chi_j(g^k) psi(g^k) summed over k: one DFT of k -> psi(g^k)
    vals = unit_roots(p)[f.gen_power(np.arange(n))]
    g = np.fft.ifft(vals) * n
    g = g[1:]  # drop the principal character
    if np.max(np.abs(np.abs(g) ** 2 - p)) > 1e-9 * p:
        raise ArithmeticError("Gauss sum off the circle of radius sqrt(p)")
    j = np.arange(1, n)
    # g(conj chi) = chi(-1) conj(g(chi)) with chi_j(-1) = (-1)^j
    pair = g[::-1] - ((-1.0) ** j) * np.conj(g)
    theta = np.mod(np.angle(g), 2 * np.pi)
    u = theta / (2 * np.pi)
    ks = stats.kstest(u, "uniform")
    return GaussSpectrum(p, theta, star_discrepancy(u), float(ks.statistic), float(ks.pvalue),
                         float(np.max(np.abs(pair)) / math.sqrt(p)))


# ---------------------------------------------------------------------------
# Kloosterman sums


def _psi_table(f: FiniteField) -> np.ndarray:
    """psi(x) = e(Tr(x)/p) for every code x."""
    return unit_roots(f.p)[f.trace(f.elements())]


def kloosterman_complex(a: int, f: FiniteField) -> complex:
    if a % f.q == 0:
        raise ValueError("Kloosterman sum needs a != 0")
    x = f.nonzero()
    arg = f.add(x, f.mul(a, f.inv(x)))
    v = _psi_table(f)[arg]
    return complex(math.fsum(v.real.tolist()), math.fsum(v.imag.tolist()))


def kloosterman(a: int, f: FiniteField) -> float:
    """kl(a, q) = sum_{x y = a} psi(x + y); real, with |kl| <= 2 sqrt(q)."""
    z = kloosterman_complex(a, f)
    if abs(z.imag) > 1e-12:
        raise ArithmeticError(f"Kloosterman sum has imaginary part {z.imag:.2e}")
    return z.real


def kloosterman_all(f: FiniteField, pool: Pool | None = None, chunk: int = 128) -> tuple[np.ndarray, np.ndarray]:
    """(real parts, imaginary parts) of kl(a) for a = 1..q-1 (indexed by code - 1), direct sums."""
    pool = pool or serial()
    psi = _psi_table(f)
    re_t, im_t = psi.real.copy(), psi.imag.copy()
    x = f.nonzero()
    xinv = f.inv(x)
    a_all = f.nonzero()

    def work(lo):
        a = a_all[lo : lo + chunk]
        if f.r == 1:
            arg = (a[:, None] * xinv[None, :] + x[None, :]) % f.p
        else:
            arg = f.add(x[None, :], f.mul(a[:, None], xinv[None, :]))
        return re_t[arg].sum(axis=1), im_t[arg].sum(axis=1)

    parts = pool.map(work, range(0, len(a_all), chunk))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def kloosterman_lpoly(a: int, f: FiniteField, kl: float | None = None) -> tuple[LPolynomial, float]:
    """1 + kl T + q T^2 and the SU(2) angle theta in [0, pi] with kl = -2 sqrt(q) cos(theta)."""
    kl = kloosterman(a, f) if kl is None else kl
    lp = LPolynomial(np.array([1.0, kl, f.q]), f.q, 1)
    c = -kl / (2 * math.sqrt(f.q))
    return lp, float(np.arccos(np.clip(c, -1.0, 1.0)))


def sato_tate_cdf(theta):
    """CDF of (2/pi) sin^2(theta) on [0, pi]."""
    theta = np.asarray(theta, dtype=float)
    return (theta - np.sin(theta) * np.cos(theta)) / np.pi


def sato_tate_density(theta):
    """(2/pi) sin^2(theta), obtained from the A1 Weyl density at the root angle 2 theta."""
    from .rootsys import bundled
    from .torus import weyl_density

    theta = np.asarray(theta, dtype=float)
    # the root angle is phi = 2 theta, so d phi / (2 pi) = d theta / pi on [0, pi)
    w = weyl_density(2 * theta[..., None], bundled("a1"))
    return w / np.pi


@dataclass
class KloostermanReport:
    p: int
    count: int
    weil_violations: int
    max_imag: float
    max_unitarity_defect: float
    ks_stat: float
    angles: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def to_json(self) -> dict:
        return {"family": "kloosterman", "p": self.p, "q": self.p, "count": self.count,
                "weil_violations": self.weil_violations, "max_imag": self.max_imag,
                "max_unitarity_defect": self.max_unitarity_defect, "ks_stat": self.ks_stat,
                "moments": [float(np.mean((self.values / math.sqrt(self.p)) ** k)) for k in range(1, 5)]}


def kloosterman_report(p: int, pool: Pool | None = None) -> KloostermanReport:
    f = cached_field(p)
    re, im = kloosterman_all(f, pool)
    bound = 2 * math.sqrt(p)
    violations = int(np.sum(np.abs(re) > bound + 1e-9))
    c = np.clip(-re / bound, -1.0, 1.0)
    theta = np.arccos(c)
    # 1 + kl T + p T^2 has normalized roots e^{+-i theta}: |root| = 1 iff kl^2 <= 4p
    disc = re**2 - 4.0 * p
    defect = np.where(disc > 0, np.abs(np.sqrt(np.maximum(disc, 0)) / (2 * math.sqrt(p))), 0.0)
    ks = stats.kstest(theta, sato_tate_cdf)
    return KloostermanReport(p, p - 1, violations, float(np.max(np.abs(im))), float(defect.max()),
                             float(ks.statistic), theta, re)


# ---------------------------------------------------------------------------
# hyper-Kloosterman sums


def hyperkloosterman_all(n: int, f: FiniteField, m: int = 1) -> tuple[FiniteField, np.ndarray]:
    """kl_n(b, Q) for every b in k_m^x (Q = q^m), indexed by discrete log in k_m.

    kl_n(g^j) is the (n-1)-fold cyclic self-convolution of k -> psi(g^k),
    done with FFTs over the multiplicative group.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    big = f.q**m
    if big - 1 > CONVOLUTION_CAP:
        raise TableCapExceeded(f"convolution length {big - 1} exceeds cap {CONVOLUTION_CAP}")
    ext = cached_field(f.p, f.r * m)
    vals = unit_roots(f.p)[ext.trace(ext.gen_power(np.arange(big - 1)))]
    spec = np.fft.fft(vals)
    out = np.fft.ifft(spec**n)
    return ext, out


def hyperkloosterman(n: int, a: int, f: FiniteField, m: int = 1) -> complex:
    ext, table = hyperkloosterman_all(n, f, m)
    b = ext.embedding(f)[a] if ext is not f and ext.r != f.r else a
    return complex(table[int(ext.dlog(b))])


def hyperkloosterman_naive(n: int, a: int, f: FiniteField, m: int = 1, cap: int = 10**7) -> complex:
    """Direct sum over x_1 .. x_{n-1}; x_n is forced.  For cross-checks at tiny sizes."""
    ext = cached_field(f.p, f.r * m)
    if (ext.q - 1) ** (n - 1) > cap:
        raise TableCapExceeded("naive hyper-Kloosterman sum too large")
    b = ext.embedding(f)[a] if ext.r != f.r else a
    psi = _psi_table(ext)
    logs = np.arange(ext.q - 1)
    # all (n-1)-tuples of discrete logs; x_n = b / prod
    grids = np.meshgrid(*([logs] * (n - 1)), indexing="ij")
    ks = np.stack([g.ravel() for g in grids])
    xs = ext.gen_power(ks)
    total = np.zeros(xs.shape[1], dtype=np.int64)
    for row in xs:
        total = ext.add(total, row)
    last = ext.gen_power(int(ext.dlog(b)) - ks.sum(axis=0))
    total = ext.add(total, last)
    v = psi[total]
    return complex(math.fsum(v.real.tolist()), math.fsum(v.imag.tolist()))


def hk_group(n: int, p: int) -> str:
    if n % 2 == 0:
        return "USp"
    if p == 2:
        return "G2" if n == 7 else "SO"
    return "SU"


def hk_lpoly_all(n: int, f: FiniteField, tol: float = UNITARITY_TOL) -> list[ConjugacyClassSample]:
    """Reconstruct det(I - q^((n-1)/2) T Theta_n(a, q)) for every a in k^x."""
    group = hk_group(n, f.p)
    mmax = n // 2 if group in ("USp", "SO", "G2") else n - 1
    scale = f.q ** ((n - 1) / 2)
    traces = []  # traces[m-1][a_index] = Tr Theta^m
    a_codes = f.nonzero()
    for m in range(1, mmax + 1):
        ext, table = hyperkloosterman_all(n, f, m)
        emb = ext.embedding(f) if ext.r != f.r else np.arange(f.q)
        kl = table[ext.dlog(emb[a_codes])]
        traces.append((-1) ** (n + 1) * kl / scale**m)
    traces = np.array(traces)
    out = []
    for i, a in enumerate(a_codes):
        ps = traces[:, i]
        if group == "SU":
            e = power_sums_to_elementary(list(ps)) + [1.0]
            norm = _charpoly_from_elementary(e)
        else:
            if np.max(np.abs(ps.imag)) > 1e-9:
                raise UnitarityError(f"self-dual family has a non-real power sum at a = {a}")
            norm = self_dual_charpoly(ps.real, n, forced_one=(n % 2 == 1))
        lp = _from_normalized(norm, f.q, n - 1)
        lp.check_unitarity(tol, label=int(a))
        out.append(ConjugacyClassSample(int(a), float(np.real(ps[0])), lp, lp.angles()))
    return out


def hk_lpoly(n: int, a: int, f: FiniteField) -> tuple[LPolynomial, ConjugacyClassSample]:
    for s in hk_lpoly_all(n, f):
        if s.parameter == a:
            return s.lpoly, s
    raise ValueError("a must be a nonzero field element")


# ---------------------------------------------------------------------------
# the G2 family NMK


def _check_nmk_prime(p: int):
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p < 17:
        raise ValueError("NMK needs p >= 17")


def _nmk_from_fiber_sums(fu: np.ndarray, p: int) -> np.ndarray:
    # NMK(t) = sum_u F(u) e(t u / p)
    return np.fft.ifft(fu) * p


def nmk_all(p: int, m: int = 1, pool: Pool | None = None) -> np.ndarray:
    """NMK over k_m for t = 0..p-1 (t in the prime field): sum chi2(N x) psi(Tr(x^7 + t x))."""
    _check_nmk_prime(p)
    if p**m <= 1 << 22:
        f = cached_field(p, m)
        x = f.nonzero()
        w = legendre(f.norm(x), p) * unit_roots(p)[f.trace(f.power(x, 7))]
        tr = f.trace(x)
        fu = np.bincount(tr, w.real, minlength=p) + 1j * np.bincount(tr, w.imag, minlength=p)
        return _nmk_from_fiber_sums(fu, p)
    if m == 2:
        return _nmk_quadratic_stream(p, pool)
    raise TableCapExceeded(f"NMK over GF({p}^{m}) is beyond the table cap")


def _nonresidue(p: int) -> int:
    return next(d for d in range(2, p) if pow(d, (p - 1) // 2, p) == p - 1)


def _nmk_quadratic_stream(p: int, pool: Pool | None = None, rows: int = 32) -> np.ndarray:
    """NMK over GF(p^2) = GF(p)(sqrt d) without tables, streaming over the real part u.

    For x = u + v sqrt(d): Tr x = 2u, N x = u^2 - d v^2, so every x in a row
    of fixed u falls into the same fiber of the trace.
    """
    pool = pool or serial()
    d = _nonresidue(p)
    roots = unit_roots(p)
    v = np.arange(p, dtype=np.int64)

    def mul(a, b):
        return (a[0] * b[0] + d * (a[1] * b[1] % p)) % p, (a[0] * b[1] + a[1] * b[0]) % p

    def work(lo):
        u = np.arange(lo, min(lo + rows, p), dtype=np.int64)[:, None]
        x = (np.broadcast_to(u, (len(u), p)), np.broadcast_to(v, (len(u), p)))
        x2 = mul(x, x)
        x4 = mul(x2, x2)
        x7 = mul(mul(x4, x2), x)
        nrm = (u * u - d * (v * v % p)) % p
        w = legendre(nrm, p) * roots[(2 * x7[0]) % p]
        return w.sum(axis=1)

    sums = np.concatenate(pool.map(work, range(0, p, rows)))
    fu = np.zeros(p, dtype=complex)
    np.add.at(fu, (2 * np.arange(p)) % p, sums)
    return _nmk_from_fiber_sums(fu, p)


def quadratic_gauss_sum(p: int) -> complex:
    f = cached_field(p)
    return gauss_sum(quadratic_character(f), AdditiveCharacter(f))


@dataclass
class NMKNormalization:
    p: int
    sign: int | None  # epsilon_p; None if indeterminate
    decisive: bool
    traces: np.ndarray  # -NMK'(t) for t = 1..p-1
    candidate_traces: dict
    max_imag: float
    symmetry_defect: float

    def samples(self) -> list[ConjugacyClassSample]:
        return [ConjugacyClassSample(t, float(tr)) for t, tr in zip(range(1, self.p), self.traces)]

    def to_json(self) -> dict:
        return {"family": "nmk", "p": self.p, "q": self.p, "count": self.p - 1, "sign": self.sign,
                "decisive": self.decisive, "trace_min": float(self.traces.min()),
                "trace_max": float(self.traces.max()), "max_imag": self.max_imag,
                "symmetry_defect": self.symmetry_defect}


def nmk_normalize(p: int, values: np.ndarray | None = None, tol: float = 1e-6, pool: Pool | None = None) -> NMKNormalization:
    """Divide by the quadratic Gauss sum and choose epsilon_p so every trace lies in [-2, 7]."""
    vals = nmk_all(p, 1, pool) if values is None else values
    nm = vals[1:]
    chi_m1 = 1 if p % 4 == 1 else -1
    sym = float(np.max(np.abs(np.conj(nm) - chi_m1 * nm)))
    g = quadratic_gauss_sum(p)
    ratio = nm / g
    max_imag = float(np.max(np.abs(ratio.imag)))
    base = -ratio.real  # trace for epsilon = +1
    ok = {}
    for eps in (1, -1):
        tr = eps * base
        ok[eps] = bool(np.all((tr >= -2 - tol) & (tr <= 7 + tol)))
    good = [e for e in (1, -1) if ok[e]]
    if not good:
        raise SignResolutionError(f"p = {p}: no sign puts all traces in [-2, 7]")
    decisive = len(good) == 1
    sign = good[0] if decisive else None
    traces = (sign or 1) * base
    return NMKNormalization(p, sign, decisive, traces, {1: base, -1: -base}, max_imag, sym)


def g2_third_power_sum(p1, p2):
    """Tr Theta^3 for Theta in G2 (7-dim representation) from Tr Theta and Tr Theta^2.

    On the torus the eigenvalues are 1, a^+-1, b^+-1, (ab)^+-1, and for such
    spectra the elementary symmetric functions of all seven eigenvalues
    satisfy e_3 = p_1 + (p_1^2 + p_2)/2.  A generic SO(7) class does not.
    """
    e1 = p1
    e2 = (p1 * p1 - p2) / 2
    e3 = p1 + (p1 * p1 + p2) / 2
    return e1 * p2 - e2 * p1 + 3 * e3


def nmk_power_traces(p: int, mmax: int = 3, sign: int | None = None, pool: Pool | None = None) -> np.ndarray:
    """Tr Theta_t^m = -NMK_m(t) / (eps g)^m for m = 1..mmax and t = 1..p-1."""
    norm = nmk_normalize(p, pool=pool) if sign is None else None
    eps = sign if sign is not None else (norm.sign or 1)
    g = quadratic_gauss_sum(p)
    out = []
    for m in range(1, mmax + 1):
        vals = nmk_all(p, m, pool)[1:]
        tr = -vals / (eps * g) ** m
        if np.max(np.abs(tr.imag)) > 1e-8:
            raise ArithmeticError(f"power sum m={m} is not real")
        out.append(tr.real)
    return np.array(out)


def nmk_charpoly(ps: Sequence[float]) -> np.ndarray:
    """Normalized degree-7 det(I - Theta T) = (1 - T) * palindromic sextic from p_1..p_3."""
    return self_dual_charpoly(ps, 7, forced_one=True).real


def nmk_lpoly(t: int, p: int, traces: np.ndarray | None = None, tol: float = UNITARITY_TOL) -> LPolynomial:
    traces = nmk_power_traces(p) if traces is None else traces
    lp = LPolynomial(nmk_charpoly(traces[:3, t - 1]), 1, 0)
    lp.check_unitarity(tol, label=t)
    return lp


def zhat_value(charpoly: np.ndarray) -> float:
    """prod over the six non-trivial eigenvalues of (1 - lambda) = Q(1), Q = charpoly / (1 - T)."""
    q, r = np.polydiv(np.asarray(charpoly)[::-1], np.array([-1.0, 1.0]))
    return float(np.polyval(q, 1.0).real)


@dataclass
class EquidistReport:
    p: int
    sign: int | None
    count: int
    moments: list[float]
    haar_moments: list[float]
    moment_deviation: list[float]
    ks_stat: float
    zhat_mean: float | None
    zhat_target: float
    scale: float
    third_power_sum: str

    def to_json(self) -> dict:
        return {"family": "nmk", "p": self.p, "q": self.p, "count": self.count, "sign": self.sign,
                "moments": self.moments, "haar_moments": self.haar_moments,
                "moment_deviation": self.moment_deviation, "ks_stat": self.ks_stat,
                "zhat_mean": self.zhat_mean, "zhat_target": self.zhat_target,
                "scale_1_over_sqrt_p": self.scale, "third_power_sum": self.third_power_sum}


def haar_trace_cdf(n: int = 512, bins: int = 900):
    from .torus import value_histogram

    h = value_histogram("7", "trace", bins=bins, n=n, value_range=(-2.0, 7.0))
    cdf = np.concatenate([[0.0], np.cumsum(h.density * h.widths)])
    return h.edges, cdf


def trace_ks(traces: np.ndarray, grid: int = 512) -> float:
    edges, cdf = haar_trace_cdf(grid)
    x = np.sort(traces)
    n = len(x)
    f = np.interp(x, edges, cdf)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def g2_equidist_report(p: int, with_zhat: bool = True, pool: Pool | None = None) -> EquidistReport:
    """Compare the NMK classes at p with Haar measure on G2."""
    from .moments import moment_rep7_exact
    from .torus import trace_moments

    norm = nmk_normalize(p, pool=pool)
    tr = norm.traces
    moments = [float(np.mean(tr**k)) for k in range(1, 5)]
    haar = [float(x) for x in trace_moments("7", 4)]
    zmean = None
    how = "none"
    if with_zhat:
        eps = norm.sign or 1
        g = quadratic_gauss_sum(p)
        p2 = -(nmk_all(p, 2, pool)[1:] / g**2).real
        if p**3 <= 1 << 22:
            p3 = -(nmk_all(p, 3, pool)[1:] / (eps * g) ** 3).real
            how = "direct"
        else:
            p3 = g2_third_power_sum(tr, p2)
            how = "g2-relation"
        z = [zhat_value(nmk_charpoly([a, b, c])) for a, b, c in zip(tr, p2, p3)]
        zmean = float(np.mean(z))
    return EquidistReport(p, norm.sign, p - 1, moments, haar, [m - h for m, h in zip(moments, haar)],
                          trace_ks(tr), zmean, float(moment_rep7_exact(1)), 1 / math.sqrt(p), how)
