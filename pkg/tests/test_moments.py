import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from g2rmt.laurent import ct_product
from g2rmt.moments import (
    REP7,
    REP14,
    DomainError,
    log_convex_violations,
    macdonald_g2,
    moment,
    moment_rep7_exact,
    moment_rep7_gamma,
    moment_rep14_exact,
    moment_rep14_gamma,
    moment_usp,
)
from g2rmt.rootsys import LONG, SHORT, build_g2
from g2rmt.torus import quad_moment


def test_macdonald_small_values():
    assert macdonald_g2(1, 1) == 1
    assert macdonald_g2(2, 1) == 6
    assert macdonald_g2(3, 1) == 55


def test_rep7_exact():
    assert [moment_rep7_exact(s) for s in range(3)] == [1, 6, 55]


def test_rep14_exact():
    assert moment_rep14_exact(0) == 1
    assert moment_rep14_exact(1) == 33
    assert moment_rep14_exact(2) == macdonald_g2(3, 3) == ct_product(build_g2(), {SHORT: 3, LONG: 3})


def test_exact_forms_are_macdonald_specializations():
    for s in range(6):
        assert moment_rep7_exact(s) == macdonald_g2(s + 1, 1)
        assert moment_rep14_exact(s) == macdonald_g2(s + 1, s + 1)


def test_exact_rejects_non_integers():
    with pytest.raises(DomainError):
        moment_rep7_exact(Fraction(1, 2))
    with pytest.raises(DomainError):
        moment_rep14_exact(-1)


@pytest.mark.parametrize("s", range(8))
def test_gamma_matches_factorial_form(s):
    assert abs(moment_rep7_gamma(s) - float(moment_rep7_exact(s))) <= 1e-12 * float(moment_rep7_exact(s))
    assert abs(moment_rep14_gamma(s) - float(moment_rep14_exact(s))) <= 1e-12 * float(moment_rep14_exact(s))


@pytest.mark.parametrize("rep, formula", [("7", REP7), ("14", REP14)])
def test_gamma_matches_quadrature_at_half(rep, formula):
    assert abs(formula(0.5).real - quad_moment(rep, 0.5, n=512)) < 1e-8


def test_domain_error_names_the_bound():
    with pytest.raises(DomainError, match="-3/2"):
        REP7(-1.6)


def test_moment_attaches_exact_value():
    m = moment("7", 2)
    assert m.exact == 55 and m.consistent()
    assert moment("14", 0.5).exact is None


def test_log_convexity():
    grid = np.linspace(-1.4, 12, 600)
    assert log_convex_violations(REP7, grid) == 0
    assert log_convex_violations(REP14, np.linspace(-1.1, 8, 600)) == 0


@given(st.floats(-1.45, 20))
def test_rep7_positive_on_real_axis(s):
    v = REP7(s)
    assert v.real > 0 and abs(v.imag) <= 1e-12 * v.real


@given(st.floats(-1.0, 10), st.floats(-30, 30))
def test_conjugate_symmetry(x, y):
    s = complex(x, y)
    assert abs(REP14(s.conjugate()) - REP14(s).conjugate()) <= 1e-10 * abs(REP14(s))


def test_usp_examples():
    assert abs(moment_usp(1, 0) - 1) < 1e-14
    assert abs(moment_usp(1, 2) - 5) < 1e-12
    # SU(2): int (2 - 2cos t)^2 (2/pi) sin^2 t dt
    val, _ = integrate.quad(lambda t: (2 - 2 * math.cos(t)) ** 2 * 2 / math.pi * math.sin(t) ** 2, 0, math.pi)
    assert abs(val - 5) < 1e-12


def test_usp4_against_torus_quadrature():
    # USp(4) Weyl density on angles (a, b) in [0, pi]^2, independent of the closed form
    n = 400
    h = math.pi / n
    t = (np.arange(n) + 0.5) * h
    a, b = np.meshgrid(t, t, indexing="ij")
    dens = (np.cos(a) - np.cos(b)) ** 2 * np.sin(a) ** 2 * np.sin(b) ** 2
    det = (2 - 2 * np.cos(a)) * (2 - 2 * np.cos(b))
    ratio = (dens * det).sum() / dens.sum()
    assert abs(ratio - moment_usp(2, 1).real) < 1e-6


def test_usp_domain():
    with pytest.raises(DomainError):
        moment_usp(2, -1.5)
    with pytest.raises(ValueError):
        moment_usp(0, 1)
