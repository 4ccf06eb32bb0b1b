"""Root systems in simple-root coordinates, with exact rational arithmetic.

Roots and weights are integer (or rational) coordinate vectors with respect to
the simple roots; inner products go through the Gram matrix of the simple
roots.  The Weyl group is generated as the closure of the simple reflections,
so the same code serves G2 and any root system loaded from a JSON file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Sequence

SHORT = "short"
LONG = "long"

MAX_WEYL_ORDER = 10**6


class RootSystemError(ValueError):
    pass


Vector = tuple  # tuple of int/Fraction
Matrix = tuple  # tuple of row tuples


@dataclass(frozen=True)
class Root:
    coords: tuple[int, ...]
    length_class: str

    def __post_init__(self):
        if not any(self.coords):
            raise RootSystemError("zero vector is not a root")
        if self.length_class not in (SHORT, LONG):
            raise RootSystemError(f"bad length class {self.length_class!r}")

    def __neg__(self) -> "Root":
        return Root(tuple(-c for c in self.coords), self.length_class)


@dataclass(frozen=True)
class Weight:
    coords: tuple[Fraction, ...]


@dataclass(frozen=True)
class WeylElement:
    """Linear map on simple-root coordinates, stored as a rational matrix."""

    matrix: Matrix
    det: int

    def apply(self, v: Sequence) -> tuple:
        return tuple(sum(m * x for m, x in zip(row, v)) for row in self.matrix)

    def dual_matrix(self) -> Matrix:
        """Inverse transpose: the induced action on torus angles.

        With ``t^mu = exp(i <mu, theta>)``, acting on ``t`` by ``w`` sends
        ``theta`` to ``M^{-T} theta``.
        """
        inv = _mat_inverse(self.matrix)
        n = len(inv)
        return tuple(tuple(inv[j][i] for j in range(n)) for i in range(n))


@dataclass(frozen=True)
class RootSystem:
    name: str
    rank: int
    roots: tuple[Root, ...]
    simple_indices: tuple[int, ...]
    gram: Matrix
    n_positive: int = field(default=0)

    @property
    def positive_roots(self) -> tuple[Root, ...]:
        return self.roots[: self.n_positive]

    def roots_of_class(self, length_class: str) -> tuple[Root, ...]:
        return tuple(r for r in self.roots if r.length_class == length_class)

    @property
    def simple_roots(self) -> tuple[Root, ...]:
        return tuple(self.roots[i] for i in self.simple_indices)

    def inner(self, u: Sequence, v: Sequence) -> Fraction:
        return sum(
            (Fraction(u[i]) * self.gram[i][j] * v[j] for i in range(self.rank) for j in range(self.rank)),
            Fraction(0),
        )

    def reflection_matrix(self, i: int) -> Matrix:
        """Matrix of the reflection in the i-th simple root."""
        n = self.rank
        a = self.gram[i][i]
        rows = []
        for r in range(n):
            row = []
            for c in range(n):
                # s(e_c) = e_c - 2 (e_c . a_i)/(a_i . a_i) a_i
                val = Fraction(int(r == c))
                if r == i:
                    val -= 2 * self.gram[c][i] / a
                row.append(val)
            rows.append(tuple(row))
        return tuple(rows)


def _mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    m = len(b[0])
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(m)) for i in range(n))


def _mat_det(a: Matrix) -> Fraction:
    n = len(a)
    m = [list(map(Fraction, row)) for row in a]
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            for k in range(c, n):
                m[r][k] -= f * m[c][k]
    return det


def _mat_inverse(a: Matrix) -> Matrix:
    n = len(a)
    m = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for c in range(n):
        piv = next(r for r in range(c, n) if m[r][c] != 0)
        m[c], m[piv] = m[piv], m[c]
        p = m[c][c]
        m[c] = [x / p for x in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return tuple(tuple(row[n:]) for row in m)


def _validate(name, rank, positive, gram) -> RootSystem:
    if rank < 1:
        raise RootSystemError("rank must be positive")
    if len(gram) != rank or any(len(row) != rank for row in gram):
        raise RootSystemError("gram matrix has wrong shape")
    gram = tuple(tuple(Fraction(x) for x in row) for row in gram)
    if any(gram[i][j] != gram[j][i] for i in range(rank) for j in range(rank)):
        raise RootSystemError("gram matrix is not symmetric")
    seen = set()
    for r in positive:
        if len(r.coords) != rank:
            raise RootSystemError(f"root {r.coords} has wrong length for rank {rank}")
        if r.coords in seen:
            raise RootSystemError(f"duplicate root {r.coords}")
        if tuple(-c for c in r.coords) in seen:
            raise RootSystemError(f"root {r.coords} listed with both signs")
        seen.add(r.coords)
    roots = tuple(positive) + tuple(-r for r in positive)
    simple = []
    for i in range(rank):
        unit = tuple(int(i == j) for j in range(rank))
        if unit not in seen:
            raise RootSystemError(f"simple root e{i + 1} missing from positive roots")
        simple.append(next(k for k, r in enumerate(roots) if r.coords == unit))
    rs = RootSystem(name, rank, roots, tuple(simple), gram, len(positive))
    # length classes must agree with the Gram norms
    norms = {}
    for r in roots:
        nrm = rs.inner(r.coords, r.coords)
        if nrm <= 0:
            raise RootSystemError(f"root {r.coords} has non-positive norm")
        norms.setdefault(r.length_class, set()).add(nrm)
    for cls, vals in norms.items():
        if len(vals) != 1:
            raise RootSystemError(f"{cls} roots have inconsistent norms {sorted(vals)}")
    if len(norms) == 2 and min(norms[SHORT]) >= min(norms[LONG]):
        raise RootSystemError("short roots are not shorter than long roots")
    # closure under simple reflections
    coords = {r.coords for r in roots}
    for i in range(rank):
        s = rs.reflection_matrix(i)
        for r in roots:
            img = WeylElement(s, -1).apply(r.coords)
            if any(Fraction(x).denominator != 1 for x in img) or tuple(int(x) for x in img) not in coords:
                raise RootSystemError(f"root set not closed under reflection s{i + 1}: image of {r.coords}")
    return rs


def build_g2() -> RootSystem:
    """G2 with positive roots a1..a6 = (1,0),(0,1),(1,1),(2,1),(3,1),(3,2)."""
    positive = [
        Root((1, 0), SHORT),
        Root((0, 1), LONG),
        Root((1, 1), SHORT),
        Root((2, 1), SHORT),
        Root((3, 1), LONG),
        Root((3, 2), LONG),
    ]
    gram = ((Fraction(1), Fraction(-3, 2)), (Fraction(-3, 2), Fraction(3)))
    return _validate("G2", 2, positive, gram)


def load_rootsystem(path) -> RootSystem:
    """Load a root system from JSON; negative roots are implied."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise RootSystemError(f"cannot read root system file {path}: {exc}") from exc
    return rootsystem_from_dict(data)


def rootsystem_from_dict(data: dict) -> RootSystem:
    try:
        name = str(data["name"])
        rank = int(data["rank"])
        full_list = "roots" in data
        entries = data["roots"] if full_list else data["positive_roots"]
        gram = [[Fraction(str(x)) for x in row] for row in data["gram"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise RootSystemError(f"malformed root system data: {exc}") from exc
    listed = []
    for e in entries:
        coords = e["coords"]
        if any(not isinstance(c, int) for c in coords):
            raise RootSystemError(f"non-integral root coordinates {coords}")
        listed.append(Root(tuple(coords), e.get("class", LONG)))
    coords = {r.coords for r in listed}
    # a list containing both signs of some root is read as the full root set
    if full_list or any(tuple(-c for c in r.coords) in coords for r in listed):
        return rootsystem_from_roots(name, rank, listed, gram)
    return _validate(name, rank, listed, gram)


def rootsystem_from_roots(name: str, rank: int, roots: Sequence[Root], gram) -> RootSystem:
    """Build from an explicit full root list (both signs), checking negation closure."""
    coords = {r.coords for r in roots}
    for r in roots:
        if tuple(-c for c in r.coords) not in coords:
            raise RootSystemError(f"not closed under negation: missing -{r.coords}")
    positive = [r for r in roots if _is_positive(r.coords)]
    return _validate(name, rank, positive, gram)


def _is_positive(v) -> bool:
    first = next(c for c in v if c != 0)
    return first > 0


def bundled(name: str) -> RootSystem:
    with resources.as_file(resources.files("g2rmt") / "data" / f"{name}.json") as p:
        return load_rootsystem(p)


def weyl_group(rs: RootSystem, max_order: int = MAX_WEYL_ORDER) -> list[WeylElement]:
    """All Weyl group elements, by breadth-first closure of the simple reflections."""
    gens = [rs.reflection_matrix(i) for i in range(rs.rank)]
    ident = tuple(tuple(Fraction(int(i == j)) for j in range(rs.rank)) for i in range(rs.rank))
    elems = {ident: 1}
    frontier = [ident]
    while frontier:
        nxt = []
        for m in frontier:
            for g in gens:
                prod = _mat_mul(g, m)
                if prod not in elems:
                    elems[prod] = -elems[m]
                    nxt.append(prod)
                    if len(elems) > max_order:
                        raise RootSystemError(
                            f"Weyl group exceeds {max_order} elements; invalid root system?"
                        )
        frontier = nxt
    return [WeylElement(m, d) for m, d in elems.items()]


def half_sum_delta(rs: RootSystem) -> Weight:
    n = rs.rank
    total = [Fraction(0)] * n
    for r in rs.positive_roots:
        for i in range(n):
            total[i] += r.coords[i]
    return Weight(tuple(x / 2 for x in total))


def fundamental_weights(rs: RootSystem) -> list[Weight]:
    """Weights w_i with 2(w_i, a_j)/(a_j, a_j) = delta_ij, in simple-root coordinates."""
    n = rs.rank
    # Cartan-type matrix C[j][k] = 2 (e_k, a_j)/(a_j,a_j); solve C x = e_i
    cmat = tuple(tuple(2 * rs.gram[j][k] / rs.gram[j][j] for k in range(n)) for j in range(n))
    inv = _mat_inverse(cmat)
    return [Weight(tuple(inv[k][i] for k in range(n))) for i in range(n)]


def weyl_dimension(rs: RootSystem, highest_weight: Sequence) -> Fraction:
    """Weyl dimension formula prod (lam+delta, a)/(delta, a) over positive roots."""
    delta = half_sum_delta(rs).coords
    shifted = [Fraction(a) + b for a, b in zip(highest_weight, delta)]
    num = Fraction(1)
    den = Fraction(1)
    for r in rs.positive_roots:
        num *= rs.inner(shifted, r.coords)
        den *= rs.inner(delta, r.coords)
    return num / den


def g2_highest_weight(n1: int, n2: int) -> tuple[int, int]:
    """n1*w1 + n2*w2 with w1 = a4 = (2,1) and w2 = a6 = (3,2)."""
    return (2 * n1 + 3 * n2, n1 + 2 * n2)
