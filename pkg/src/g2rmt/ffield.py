"""Finite fields GF(p^r) with exp/log tables, trace, norm and characters.

Elements are stored as integer codes: the element sum_i d_i x^i of
GF(p)[x]/(modulus) has code sum_i d_i p^i, so the prime field sits inside as
the codes 0..p-1.  All field operations act elementwise on numpy arrays of
codes; multiplication and powers go through discrete-log tables, addition
through base-p digits.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np

TABLE_CAP = 1 << 26


class FieldError(ValueError):
    pass


class TableCapExceeded(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# integers

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    for b in _MR_BASES:
        if n % b == 0:
            return n == b
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# polynomials over GF(p): lists of ints, low degree first


def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_mod(a, m, p):
    a = [x % p for x in a]
    inv = pow(m[-1], -1, p)
    dm = len(m) - 1
    for k in range(len(a) - 1, dm - 1, -1):
        c = a[k] * inv % p
        if c:
            for i in range(dm + 1):
                a[k - dm + i] = (a[k - dm + i] - c * m[i]) % p
    return _trim(a[:dm]) if dm else []


def poly_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _trim(out)


def poly_powmod(a, e, m, p):
    result, base = [1], poly_mod(a, m, p)
    while e:
        if e & 1:
            result = poly_mod(poly_mul(result, base, p), m, p)
        base = poly_mod(poly_mul(base, base, p), m, p)
        e >>= 1
    return result


def poly_gcd(a, b, p):
    a, b = _trim([x % p for x in a]), _trim([x % p for x in b])
    while b:
        a, b = b, poly_mod(a, b, p)
    if a:
        inv = pow(a[-1], -1, p)
        a = [x * inv % p for x in a]
    return a


def poly_sub(a, b, p):
    n = max(len(a), len(b))
    a, b = list(a) + [0] * (n - len(a)), list(b) + [0] * (n - len(b))
    return _trim([(x - y) % p for x, y in zip(a, b)])


def is_irreducible(m, p: int) -> bool:
    """Rabin's test: x^(p^r) = x mod m and gcd(x^(p^(r/l)) - x, m) = 1 for primes l | r."""
    m = _trim([x % p for x in m])
    r = len(m) - 1
    if r < 1:
        return False
    if r == 1:
        return True
    x = [0, 1]
    for ell in prime_factors(r):
        h = poly_sub(poly_powmod(x, p ** (r // ell), m, p), x, p)
        if len(poly_gcd(m, h, p)) != 1:
            return False
    return poly_sub(poly_powmod(x, p**r, m, p), x, p) == []


def is_primitive(m, p: int) -> bool:
    """Irreducible with x of multiplicative order p^r - 1."""
    if not is_irreducible(m, p):
        return False
    r = len(m) - 1
    n = p**r - 1
    return all(poly_powmod([0, 1], n // ell, m, p) != [1] for ell in prime_factors(n))


def find_primitive_modulus(p: int, r: int) -> tuple[int, ...]:
    """First monic primitive polynomial of degree r in lexicographic order of (c_0, ..., c_{r-1})."""
    for code in range(1, p**r):
        low = [(code // p**i) % p for i in range(r)]
        m = low + [1]
        if m[0] and is_primitive(m, p):
            return tuple(m)
    raise FieldError(f"no primitive polynomial of degree {r} over GF({p})")


@lru_cache(maxsize=None)
def _bundled_moduli() -> dict:
    text = resources.files("g2rmt").joinpath("data/irreducibles.json").read_text()
    return json.loads(text)


def default_modulus(p: int, r: int) -> tuple[int, ...]:
    entry = _bundled_moduli().get(str(p), {}).get(str(r))
    if entry is not None:
        return tuple(entry)
    return find_primitive_modulus(p, r)


# ---------------------------------------------------------------------------
# fields


@lru_cache(maxsize=None)
def unit_roots(n: int) -> np.ndarray:
    """exp(2 pi i k / n), with cos/sin mirrored so that conj(z[k]) == z[n-k] exactly."""
    k = np.arange(n)
    half = np.minimum(k, n - k)
    z = np.cos(2 * np.pi * half / n) + 1j * np.sin(2 * np.pi * half / n)
    z[k > n - k] = np.conj(z[k > n - k])
    z[2 * k == n] = -1.0
    z.setflags(write=False)
    return z


@dataclass(eq=False)
class FiniteField:
    p: int
    r: int
    modulus: tuple[int, ...]
    generator: int
    exp: np.ndarray | None = field(repr=False, default=None)
    log: np.ndarray | None = field(repr=False, default=None)

    @property
    def q(self) -> int:
        return self.p**self.r

    @property
    def has_tables(self) -> bool:
        return self.exp is not None

    def __repr__(self):
        return f"GF({self.p}^{self.r})" if self.r > 1 else f"GF({self.p})"

    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=np.int64)

    def nonzero(self) -> np.ndarray:
        return np.arange(1, self.q, dtype=np.int64)

    # -- digits ---------------------------------------------------------
    def digits(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        out = np.empty(x.shape + (self.r,), dtype=np.int64)
        for i in range(self.r):
            x, out[..., i] = np.divmod(x, self.p)
        return out

    def from_digits(self, d) -> np.ndarray:
        d = np.asarray(d, dtype=np.int64) % self.p
        return d @ (self.p ** np.arange(self.r, dtype=np.int64))

    def from_poly(self, coeffs) -> int:
        """Code of the element sum c_i x^i (reduced modulo the field modulus)."""
        red = poly_mod(list(coeffs), list(self.modulus), self.p) if self.r > 1 else [sum(coeffs[:1]) % self.p]
        return int(sum(c * self.p**i for i, c in enumerate(red)))

    # -- arithmetic -----------------------------------------------------
    def _need_tables(self):
        if not self.has_tables:
            raise TableCapExceeded(f"{self} was built without discrete-log tables")

    def add(self, a, b):
        if self.r == 1:
            return (np.asarray(a, dtype=np.int64) + b) % self.p
        return self.from_digits(self.digits(a) + self.digits(b))

    def neg(self, a):
        if self.r == 1:
            return (-np.asarray(a, dtype=np.int64)) % self.p
        return self.from_digits(-self.digits(a))

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def scale(self, c: int, a):
        """Multiply by a prime-field scalar."""
        if self.r == 1:
            return (c * np.asarray(a, dtype=np.int64)) % self.p
        return self.from_digits(c * self.digits(a))

    def mul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.r == 1:
            return (a * b) % self.p
        self._need_tables()
        la, lb = self.log[a], self.log[b]
        out = self.exp[(la + lb) % (self.q - 1)].astype(np.int64)
        return np.where((a == 0) | (b == 0), 0, out)

    def power(self, a, e: int):
        a = np.asarray(a, dtype=np.int64)
        self._need_tables()
        out = self.exp[(self.log[a] * (e % (self.q - 1))) % (self.q - 1)].astype(np.int64)
        if e == 0:
            return np.ones_like(out)
        return np.where(a == 0, 0, out)

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("0 has no inverse")
        return self.power(a, -1)

    def dlog(self, a):
        self._need_tables()
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ValueError("discrete log of 0")
        return self.log[a].astype(np.int64)

    def gen_power(self, k):
        self._need_tables()
        return self.exp[np.asarray(k, dtype=np.int64) % (self.q - 1)].astype(np.int64)

    def poly_eval(self, coeffs, x):
        """Evaluate sum c_i x^i (c_i field codes, low degree first) at the codes x."""
        x = np.asarray(x, dtype=np.int64)
        acc = np.zeros_like(x)
        for c in reversed(list(coeffs)):
            acc = self.add(self.mul(acc, x), np.full_like(x, int(c)))
        return acc

    # -- trace and norm -------------------------------------------------
    @property
    def trace_vector(self) -> np.ndarray:
        """Tr(x^i) for the power basis, from Newton's identities on the modulus."""
        if "_tvec" not in self.__dict__:
            p, r, m = self.p, self.r, self.modulus
            ps = [r % p]
            for k in range(1, r):
                val = -k * m[r - k]
                for i in range(1, k):
                    val -= m[r - i] * ps[k - i]
                ps.append(val % p)
            self.__dict__["_tvec"] = np.array(ps, dtype=np.int64) if r > 1 else np.array([1], dtype=np.int64)
        return self.__dict__["_tvec"]

    def trace(self, x, base_degree: int = 1):
        """Trace to the subfield of degree ``base_degree``: sum of x^(p^(d i))."""
        if base_degree == 1:
            if self.r == 1:
                return np.asarray(x, dtype=np.int64) % self.p
            return (self.digits(x) @ self.trace_vector) % self.p
        if self.r % base_degree:
            raise FieldError("base degree must divide the extension degree")
        x = np.asarray(x, dtype=np.int64)
        acc = np.zeros_like(x)
        for i in range(self.r // base_degree):
            acc = self.add(acc, self.power(x, self.p ** (base_degree * i)))
        return acc

    def norm(self, x, base_degree: int = 1):
        """Norm to the subfield of degree ``base_degree``: x^((q-1)/(p^d-1))."""
        if self.r % base_degree:
            raise FieldError("base degree must divide the extension degree")
        x = np.asarray(x, dtype=np.int64)
        if self.r == base_degree:
            return x.copy()
        return self.power(x, (self.q - 1) // (self.p**base_degree - 1))

    def subfield_elements(self, d: int) -> np.ndarray:
        if self.r % d:
            raise FieldError("subfield degree must divide the extension degree")
        step = (self.q - 1) // (self.p**d - 1)
        return np.concatenate([[0], self.gen_power(step * np.arange(self.p**d - 1))])

    def embedding(self, small: "FiniteField") -> np.ndarray:
        """Codes in this field of the elements 0..small.q-1 of a subfield, as a lookup array.

        The image of x is a root of small.modulus inside the degree-small.r subfield.
        """
        if small.p != self.p or self.r % small.r:
            raise FieldError(f"{small} is not a subfield of {self}")
        if small.r == 1:
            return np.arange(self.p, dtype=np.int64)
        cand = self.subfield_elements(small.r)[1:]
        vals = self.poly_eval(small.modulus, cand)
        roots = cand[vals == 0]
        if len(roots) == 0:
            raise FieldError("modulus of the subfield has no root here")
        rho = int(roots.min())
        basis = [1]
        for _ in range(small.r - 1):
            basis.append(int(self.mul(basis[-1], rho)))
        dig = small.digits(small.elements())  # (q_small, r_small)
        out = np.zeros(small.q, dtype=np.int64)
        for i, b in enumerate(basis):
            out = self.add(out, self.scale(1, self.mul(np.full(small.q, b), dig[:, i])))
        return out


def _mul_digits(d1: np.ndarray, d2: np.ndarray, modulus, p: int) -> np.ndarray:
    """Multiply elements given as digit arrays (..., r) modulo a monic modulus."""
    r = len(modulus) - 1
    prod = np.zeros(np.broadcast_shapes(d1.shape[:-1], d2.shape[:-1]) + (2 * r - 1,), dtype=np.int64)
    for i in range(r):
        prod[..., i : i + r] += d1[..., i : i + 1] * d2
        prod %= p
    m = np.array(modulus[:r], dtype=np.int64)
    for k in range(2 * r - 2, r - 1, -1):
        c = prod[..., k : k + 1]
        prod[..., k - r : k] = (prod[..., k - r : k] - c * m) % p
    return prod[..., :r]


def _build_tables(p, r, modulus, g):
    q = p**r
    n = q - 1
    exp = np.empty(n, dtype=np.int32)
    exp[0] = 1
    if r == 1:
        filled = 1
        while filled < n:
            step = pow(g, filled, p)
            k = min(filled, n - filled)
            exp[filled : filled + k] = (exp[:k].astype(np.int64) * step) % p
            filled += k
    else:
        pw = p ** np.arange(r, dtype=np.int64)
        gd = np.array([(g // p**i) % p for i in range(r)], dtype=np.int64)
        cur = gd  # g^filled as digits
        filled = 1
        while filled < n:
            k = min(filled, n - filled)
            src = exp[:k].astype(np.int64)
            sd = np.stack([(src // p**i) % p for i in range(r)], axis=-1)
            exp[filled : filled + k] = _mul_digits(sd, cur[None, :], modulus, p) @ pw
            cur = _mul_digits(cur[None, :], cur[None, :], modulus, p)[0]
            filled += k
    counts = np.bincount(exp, minlength=q)
    if counts[0] or np.any(counts[1:] != 1):
        return None
    log = np.full(q, -1, dtype=np.int32)
    log[exp] = np.arange(n, dtype=np.int32)
    exp.setflags(write=False)
    log.setflags(write=False)
    return exp, log


def make_field(p: int, r: int = 1, modulus=None, tables: bool = True, table_cap: int = TABLE_CAP) -> FiniteField:
    """GF(p^r), with the bundled or given modulus and discrete-log tables when q <= table_cap."""
    if not is_prime(p):
        raise FieldError(f"{p} is not prime")
    if r < 1:
        raise FieldError("degree must be positive")
    q = p**r
    if tables and q > table_cap:
        raise TableCapExceeded(f"q = {q} exceeds the table cap {table_cap}; pass tables=False")
    if r == 1:
        mod = (0, 1)
    else:
        mod = tuple(int(c) % p for c in (modulus if modulus is not None else default_modulus(p, r)))
        if len(mod) != r + 1 or mod[-1] != 1:
            raise FieldError("modulus must be monic of degree r, low degree first")
        if not is_irreducible(list(mod), p):
            raise FieldError(f"modulus {mod} is reducible over GF({p})")
    if r == 1:
        cands = (g for g in range(1, p) if all(pow(g, (p - 1) // l, p) != 1 for l in prime_factors(p - 1)) or p == 2)
        gen = next(cands)
    else:
        n = q - 1
        facs = prime_factors(n)
        gen = None
        for code in range(p, q):
            poly = [(code // p**i) % p for i in range(r)]
            if all(poly_powmod(poly, n // l, list(mod), p) != [1] for l in facs):
                gen = code
                break
    f = FiniteField(p, r, mod, gen)
    if tables:
        built = _build_tables(p, r, mod, gen)
        if built is None:
            raise FieldError("generator search produced an element of lower order")
        f.exp, f.log = built
    return f


@lru_cache(maxsize=32)
def cached_field(p: int, r: int = 1) -> FiniteField:
    return make_field(p, r)


# ---------------------------------------------------------------------------
# characters


@dataclass(frozen=True, eq=False)
class AdditiveCharacter:
    """psi(x) = exp(2 pi i a Tr(x) / p)."""

    field: FiniteField
    a: int = 1

    def __post_init__(self):
        if self.a % self.field.p == 0:
            raise FieldError("additive character must be nontrivial")

    def __call__(self, x):
        t = self.field.trace(x)
        return unit_roots(self.field.p)[(self.a * t) % self.field.p]


@dataclass(frozen=True, eq=False)
class MultiplicativeCharacter:
    """chi(g^k) = exp(2 pi i j k / (q-1)); chi(0) = 0 by convention."""

    field: FiniteField
    j: int

    @property
    def principal(self) -> bool:
        return self.j % (self.field.q - 1) == 0

    @property
    def order(self) -> int:
        n = self.field.q - 1
        return n // math.gcd(n, self.j % n)

    def conj(self) -> "MultiplicativeCharacter":
        return MultiplicativeCharacter(self.field, (-self.j) % (self.field.q - 1))

    def __call__(self, x):
        x = np.asarray(x, dtype=np.int64)
        n = self.field.q - 1
        safe = np.where(x == 0, 1, x)
        k = self.field.dlog(safe)
        vals = unit_roots(n)[(self.j * k) % n]
        return np.where(x == 0, 0, vals)


def quadratic_character(f: FiniteField) -> MultiplicativeCharacter:
    if f.p == 2:
        raise FieldError("no quadratic character in characteristic 2")
    return MultiplicativeCharacter(f, (f.q - 1) // 2)


def legendre(x, p: int) -> np.ndarray:
    """Quadratic character of GF(p) by Euler's criterion, as integers in {-1, 0, 1}."""
    x = np.asarray(x, dtype=np.int64) % p
    sq = np.zeros(p, dtype=np.int64)
    sq[(np.arange(1, p, dtype=np.int64) ** 2) % p] = 1
    return np.where(x == 0, 0, 2 * sq[x] - 1)


def char_value(ch, x):
    """Evaluate an additive or multiplicative character at x (array or scalar)."""
    out = ch(x)
    return complex(out) if np.ndim(out) == 0 else out
