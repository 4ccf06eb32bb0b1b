import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from g2rmt.curves import (
    CurveSpec,
    RHViolation,
    count_points,
    count_points_bruteforce,
    curve_zeta,
    family_moment,
    parse_curve,
    random_squarefree,
    scan_genus1,
    scan_hyperelliptic,
    zeta_from_counts,
)
from g2rmt.moments import moment_usp


def _enumerate_pairs(p, f):
    """Affine points of y^2 = f(x) by looping over all (x, y), plus points at infinity."""
    pts = sum(1 for x in range(p) for y in range(p) if (y * y - sum(c * x**i for i, c in enumerate(f))) % p == 0)
    deg = len(f) - 1
    if deg % 2:
        return pts + 1
    lead_square = any((y * y - f[-1]) % p == 0 for y in range(1, p))
    return pts + (2 if lead_square else 0)


def test_projective_line():
    assert count_points(CurveSpec("projective_line", 5), 2) == 26
    z = curve_zeta(CurveSpec("projective_line", 5))
    assert z.coeffs == (1,)
    t = 0.1 + 0.05j
    assert abs(z.zeta(t) - 1 / ((1 - t) * (1 - 5 * t))) < 1e-15


def test_y2_x3_plus_x_mod_5():
    c = parse_curve("y2=x3+x", 5)
    assert count_points(c) == _enumerate_pairs(5, (0, 1, 0, 1)) == count_points_bruteforce(c)


@pytest.mark.parametrize("p", [7, 11, 13, 101])
def test_y2_x5_plus_1_two_ways(p):
    c = parse_curve("y^2 = x^5 + 1", p)
    assert c.genus == 2
    assert count_points(c) == count_points_bruteforce(c)


@pytest.mark.parametrize("text, p, m", [("y2=x3+x+1", 7, 2), ("y2=x6+x+3", 11, 2), ("y2=2x4+x+3", 5, 3),
                                        ("y2=x7+x+2", 3, 4)])
def test_extension_counts_match_bruteforce(text, p, m):
    c = parse_curve(text, p)
    assert p**m <= 10**4
    assert count_points(c, m) == count_points_bruteforce(c, m)


def test_genus1_zeta_from_bruteforce():
    c = parse_curve("y2=x3+x+1", 13)
    n1 = count_points_bruteforce(c)
    z = curve_zeta(c, extra=2)
    a1 = n1 - 14
    assert z.coeffs == (1, a1, 13)
    ev = z.P.eigenvalues()
    assert abs(ev[0] - np.conj(ev[1])) < 1e-12
    assert np.allclose(np.abs(1 / (ev * math.sqrt(13))), 13**-0.5)


def test_functional_equation(rng):
    for text, p in [("y2=x3+x+1", 13), ("y2=x5+3x+1", 17), ("y2=x7+x+5", 11), ("P1", 7)]:
        z = curve_zeta(parse_curve(text, p))
        t = rng.uniform(0.05, 0.4, 5) * np.exp(1j * rng.uniform(0, 2 * np.pi, 5))
        assert z.functional_equation_defect(t) < 1e-9
        c = z.coeffs
        g = z.g
        assert all(c[2 * g - i] == p ** (g - i) * c[i] for i in range(g + 1))


def test_inconsistent_counts_raise():
    with pytest.raises(RHViolation):
        zeta_from_counts(1, 13, [40])  # |a_1| = 26 > 2 sqrt(13)
    with pytest.raises(RHViolation):
        zeta_from_counts(1, 13, [14, 1000])


def test_curve_validation():
    with pytest.raises(ValueError):
        CurveSpec("hyperelliptic", 5, (0, 0, 1, 1))  # x^2 (x + 1) is not squarefree
    with pytest.raises(ValueError):
        CurveSpec("hyperelliptic", 2, (1, 1, 0, 1))
    with pytest.raises(ValueError):
        parse_curve("y2=x3+x", 9)


def test_genus1_scan_hasse_and_size():
    scan = scan_genus1(101)
    assert scan.hasse_violations == 0
    assert scan.family_size == 101 * 100  # q^2 - q nonsingular Weierstrass equations
    # spot-check against individual counts
    for i in (0, 777, 5000):
        c = CurveSpec("hyperelliptic", 101, (int(scan.b[i]), int(scan.a[i]), 0, 1))
        assert count_points(c) - 102 == scan.a1[i]


def test_hyperelliptic_scan_small():
    scan = scan_hyperelliptic(2, 31, 30, seed=1)
    assert scan.rh_violations == 0 and scan.fe_violations == 0
    assert len(scan.det_values()) == 30


def test_random_squarefree_is_seeded():
    f1 = random_squarefree(101, 5, np.random.default_rng(3))
    f2 = random_squarefree(101, 5, np.random.default_rng(3))
    assert f1 == f2 and f1[-1] == 1 and len(f1) == 6


def test_family_moment_s0():
    assert family_moment(1, 101, 0).empirical == 1.0


def test_family_moment_genus1_converges():
    reps = [family_moment(1, q, 2) for q in (101, 401, 1009)]
    assert abs(reps[-1].empirical - 5) < 0.1 * 5
    devs = [abs(r.deviation) for r in reps]
    assert devs[0] > devs[1] > devs[2]
    assert reps[-1].rmt_value == pytest.approx(moment_usp(1, 2).real)


@pytest.mark.xfail(reason="sampled genus-2 family: standard error of the mean is about 0.16 "
                          "at 200 curves (0.07 at 1000), far above the O(1/q) bias, so the trend is noise", strict=False)
def test_family_moment_genus2_trend():
    d101 = abs(family_moment(2, 101, 1, samples=200).deviation)
    d401 = abs(family_moment(2, 401, 1, samples=200).deviation)
    assert d401 < d101


@given(st.lists(st.integers(0, 12), min_size=3, max_size=3))
def test_hasse_bound_random_cubics(coeffs):
    f = tuple(coeffs) + (1,)
    try:
        c = CurveSpec("hyperelliptic", 13, f)
    except ValueError:
        return
    a1 = count_points(c) - 14
    assert a1 * a1 <= 4 * 13
