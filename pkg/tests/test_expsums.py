import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from g2rmt.expsums import (
    LPolynomial,
    UnitarityError,
    elementary_to_power_sums,
    g2_third_power_sum,
    gauss_angle_spectrum,
    gauss_lpoly,
    gauss_sum,
    hasse_davenport_check,
    hk_group,
    hk_lpoly,
    hk_lpoly_all,
    hyperkloosterman,
    hyperkloosterman_all,
    hyperkloosterman_naive,
    kloosterman,
    kloosterman_all,
    kloosterman_complex,
    kloosterman_lpoly,
    lpoly_from_sums,
    nmk_all,
    nmk_charpoly,
    nmk_lpoly,
    nmk_normalize,
    nmk_power_traces,
    power_sums_to_elementary,
    quadratic_gauss_sum,
    sato_tate_cdf,
    sato_tate_density,
    self_dual_charpoly,
    zhat_value,
)
from g2rmt.ffield import AdditiveCharacter, MultiplicativeCharacter, cached_field, quadratic_character
from g2rmt.torus import eigenangles, zhat


# -- Newton identities and L-polynomials ------------------------------------

@given(st.lists(st.integers(-5, 5), min_size=1, max_size=7))
def test_newton_round_trip_exact(roots):
    ps = [Fraction(sum(r**k for r in roots)) for k in range(1, len(roots) + 1)]
    e = power_sums_to_elementary(ps)
    poly = np.poly(roots)  # monic, highest degree first: coefficients (-1)^k e_k
    assert all(Fraction((-1) ** k * int(round(poly[k]))) == e[k] for k in range(len(roots) + 1))
    assert elementary_to_power_sums(e[1:], len(roots)) == ps


@given(st.tuples(st.floats(0, 6.28), st.floats(0, 6.28)))
def test_self_dual_reconstruction_on_g2_spectra(t):
    ang = np.array(eigenangles("7", np.array(t)).all_angles())
    ev = np.exp(1j * ang)
    ps = [np.sum(ev**k).real for k in range(1, 4)]
    charpoly = nmk_charpoly(ps)
    want = np.poly(ev).real  # (-1)^k e_k: prod (1 - lambda T), low degree first
    assert np.allclose(charpoly, want, atol=1e-9)
    # Z-hat at the symmetry point from the reconstructed polynomial
    assert abs(zhat_value(charpoly) - zhat("7", np.array(t)).real) < 1e-8


@given(st.tuples(st.floats(0, 6.28), st.floats(0, 6.28)))
def test_g2_third_power_sum_relation(t):
    ev = np.exp(1j * np.array(eigenangles("7", np.array(t)).all_angles()))
    p1, p2, p3 = (np.sum(ev**k).real for k in (1, 2, 3))
    assert abs(g2_third_power_sum(p1, p2) - p3) < 1e-9


def test_self_dual_charpoly_symplectic():
    ang = np.array([0.4, 1.9])
    ev = np.exp(1j * np.concatenate([ang, -ang]))
    ps = [np.sum(ev**k).real for k in (1, 2)]
    c = self_dual_charpoly(ps, 4, forced_one=False)
    assert np.allclose(c, np.poly(ev).real, atol=1e-12)


def test_lpolynomial_unitarity_error():
    bad = LPolynomial(np.array([1.0, 0.0, 4.0]), 1, 0)
    with pytest.raises(UnitarityError):
        bad.check_unitarity()
    with pytest.raises(ValueError):
        LPolynomial(np.array([2.0, 1.0]), 1, 0)


# -- Gauss sums ---------------------------------------------------------------

def test_quadratic_gauss_sum_mod_5():
    g = gauss_sum(quadratic_character(cached_field(5)), AdditiveCharacter(cached_field(5)))
    assert abs(g - math.sqrt(5)) < 1e-12


@pytest.mark.parametrize("p, r", [(5, 1), (7, 1), (11, 1), (101, 1), (3, 2), (2, 4)])
def test_gauss_sum_modulus(p, r):
    f = cached_field(p, r)
    psi = AdditiveCharacter(f)
    for j in range(1, f.q - 1):
        g = gauss_sum(MultiplicativeCharacter(f, j), psi)
        assert abs(abs(g) ** 2 - f.q) <= 1e-9 * f.q


def test_gauss_lpoly_matches_exp_series():
    f = cached_field(7)
    chi, psi = MultiplicativeCharacter(f, 2), AdditiveCharacter(f)
    g = gauss_sum(chi, psi)
    assert np.allclose(gauss_lpoly(chi, psi).coeffs, lpoly_from_sums([g], 1))
    # with the sum over the quadratic extension the T^2 coefficient vanishes
    g2 = -hasse_davenport_check(chi, psi, 2).lhs
    c = lpoly_from_sums([g, g2], 2)
    assert abs(c[1] - g) < 1e-12 and abs(c[2]) < 1e-9


@pytest.mark.parametrize("p, j, n", [(5, 2, 1), (5, 2, 2), (5, 1, 3), (7, 2, 3), (7, 3, 2), (7, 1, 2)])
def test_hasse_davenport(p, j, n):
    f = cached_field(p)
    rep = hasse_davenport_check(MultiplicativeCharacter(f, j), AdditiveCharacter(f), n)
    assert rep.ok


def test_hasse_davenport_over_extension_base():
    f = cached_field(2, 2)
    rep = hasse_davenport_check(MultiplicativeCharacter(f, 1), AdditiveCharacter(f), 3)
    assert rep.ok


def test_gauss_spectrum_small():
    spec = gauss_angle_spectrum(101)
    assert len(spec.angles) == 99
    assert spec.pairing_defect < 1e-9
    f = cached_field(101)
    direct = gauss_sum(MultiplicativeCharacter(f, 5), AdditiveCharacter(f))
    assert abs(np.mod(np.angle(direct), 2 * np.pi) - spec.angles[4]) < 1e-9


# -- Kloosterman --------------------------------------------------------------

def test_kloosterman_mod_5():
    assert abs(kloosterman(1, cached_field(5)) - (2 + 2 * math.cos(4 * math.pi / 5))) < 1e-12


def test_kloosterman_reality_mod_101():
    re, im = kloosterman_all(cached_field(101))
    assert np.max(np.abs(im)) < 1e-12
    assert abs(re[6] - kloosterman(7, cached_field(101))) < 1e-12


@pytest.mark.parametrize("p", [3, 5, 53, 199])
def test_weil_bound(p):
    re, _ = kloosterman_all(cached_field(p))
    assert np.all(np.abs(re) <= 2 * math.sqrt(p) + 1e-9)


def test_kloosterman_over_extension_symmetries():
    f = cached_field(3, 4)
    re, im = kloosterman_all(f)
    assert np.max(np.abs(im)) < 1e-12
    assert np.all(np.abs(re) <= 2 * math.sqrt(f.q) + 1e-9)
    a = f.nonzero()
    # Frobenius: kl(a^p) = kl(a)
    assert np.allclose(re[f.power(a, 3) - 1], re, atol=1e-10)
    assert abs(kloosterman_complex(5, f).real - re[4]) < 1e-10


def test_kloosterman_lpoly_roots():
    f = cached_field(101)
    for a in (1, 2, 50):
        lp, theta = kloosterman_lpoly(a, f)
        ev = lp.eigenvalues()
        assert abs(ev[0] - np.conj(ev[1])) < 1e-9
        lp.check_unitarity(1e-9)
        assert abs(lp.trace - 2 * math.cos(theta)) < 1e-9
    _, theta = kloosterman_lpoly(1, f, kl=0.0)
    assert theta == pytest.approx(math.pi / 2)


def test_sato_tate_density_and_cdf():
    th = np.linspace(0, math.pi, 2001)
    dens = sato_tate_density(th)
    assert np.allclose(dens, 2 / math.pi * np.sin(th) ** 2, atol=1e-12)
    assert abs(np.trapezoid(dens, th) - 1) < 1e-6
    assert sato_tate_cdf(math.pi) == pytest.approx(1)


# -- hyper-Kloosterman --------------------------------------------------------

def test_hk_n2_is_kloosterman():
    f = cached_field(13)
    ext, table = hyperkloosterman_all(2, f)
    for a in range(1, 13):
        assert abs(table[int(f.dlog(a))] - kloosterman(a, f)) < 1e-9


@pytest.mark.parametrize("n, p, r, m", [(3, 7, 1, 1), (3, 2, 2, 1), (4, 5, 1, 1), (3, 3, 1, 2)])
def test_convolution_equals_naive(n, p, r, m):
    f = cached_field(p, r)
    for a in (1, int(f.generator)):
        assert abs(hyperkloosterman(n, a, f, m) - hyperkloosterman_naive(n, a, f, m)) < 1e-9


@pytest.mark.parametrize("n", [2, 3, 5])
def test_convolution_total(n):
    # sum over a of kl_n(a) = (sum_{x != 0} psi(x))^n = (-1)^n
    _, table = hyperkloosterman_all(n, cached_field(11))
    assert abs(table.sum() - (-1) ** n) < 1e-9


def test_hk_n3_unitary():
    for s in hk_lpoly_all(3, cached_field(7)):
        assert s.lpoly.degree == 3
        assert s.lpoly.unitarity_defect() < 1e-6


def test_hk_n2_reconstruction_is_kloosterman_poly():
    f = cached_field(13)
    lp, _ = hk_lpoly(2, 3, f)
    assert np.allclose(lp.coeffs, [1, kloosterman(3, f), 13], atol=1e-9)


def test_group_types():
    assert hk_group(2, 3) == "USp"
    assert hk_group(7, 2) == "G2"
    assert hk_group(5, 2) == "SO"
    assert hk_group(3, 7) == "SU"


@pytest.mark.parametrize("r", [2, 3])
def test_hk7_characteristic_two(r):
    samples = hk_lpoly_all(7, cached_field(2, r))
    assert len(samples) == 2**r - 1
    for s in samples:
        lp = s.lpoly
        assert lp.degree == 7
        assert lp.unitarity_defect() < 1e-6
        assert abs(lp.normalized()(1.0)) < 1e-9
        assert lp.deflate_one().is_palindromic()
        assert -2 - 1e-6 <= s.trace <= 7 + 1e-6


# -- NMK ----------------------------------------------------------------------

def test_nmk_reality_by_residue_class():
    v17 = nmk_all(17)[1:]
    v19 = nmk_all(19)[1:]
    assert np.max(np.abs(v17.imag)) < 1e-9 * np.max(np.abs(v17))
    assert np.max(np.abs(v19.real)) < 1e-9 * np.max(np.abs(v19))


def test_nmk_small_prime_rejected():
    with pytest.raises(ValueError):
        nmk_all(13)


def test_quadratic_gauss_sum_phase():
    assert abs(quadratic_gauss_sum(17) - math.sqrt(17)) < 1e-9
    assert abs(quadratic_gauss_sum(19) - 1j * math.sqrt(19)) < 1e-9


@pytest.fixture(scope="module")
def p101():
    norm = nmk_normalize(101)
    return norm, nmk_power_traces(101, sign=norm.sign)


def test_nmk_sign_resolution(p101):
    norm, _ = p101
    assert norm.decisive and norm.sign in (1, -1)
    assert np.all((norm.traces >= -2 - 1e-6) & (norm.traces <= 7 + 1e-6))
    assert norm.max_imag < 1e-9 and norm.symmetry_defect < 1e-9


def test_nmk_lpolys_p101(p101):
    norm, traces = p101
    assert np.allclose(traces[0], norm.traces, atol=1e-12)
    for t in range(1, 101):
        lp = nmk_lpoly(t, 101, traces)
        assert abs(lp(1.0)) < 1e-9
        assert abs(lp.coeffs[1] + norm.traces[t - 1]) < 1e-12
        assert lp.unitarity_defect() < 1e-6
        # second power sum of the reconstructed spectrum equals the GF(p^2) sum
        ev = lp.eigenvalues()
        assert abs(np.sum(ev**2).real - traces[1, t - 1]) < 1e-6 * max(1.0, abs(traces[1, t - 1]))


def test_nmk_g2_relation_at_p101(p101):
    _, traces = p101
    assert np.max(np.abs(g2_third_power_sum(traces[0], traces[1]) - traces[2])) < 1e-9


def test_nmk_streaming_matches_tables():
    from g2rmt.expsums import _nmk_quadratic_stream

    assert np.max(np.abs(_nmk_quadratic_stream(101) - nmk_all(101, 2))) < 1e-9


def test_nmk_trace_distribution_approaches_haar():
    from g2rmt.expsums import trace_ks

    ks = [trace_ks(nmk_normalize(p).traces) for p in (1009, 10007)]
    assert ks[1] < ks[0]
