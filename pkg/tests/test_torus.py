import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from g2rmt.torus import (
    char_fundamental,
    char_weyl,
    eigenangles,
    orthogonality_check,
    quad_class_function,
    quad_moment,
    torus_grid,
    trace_moments,
    value_histogram,
    weyl_density,
    zhat,
)

angle = st.floats(0, 2 * math.pi)
points = st.tuples(angle, angle).map(np.array)


def test_weyl_density_vanishes_at_identity():
    assert weyl_density(np.zeros(2)) == 0


def test_weyl_density_is_normalized():
    a = torus_grid(400)
    assert abs(weyl_density(a).mean() - 1) < 1e-10


@given(points)
def test_weyl_density_is_even(t):
    assert abs(weyl_density(t) - weyl_density(-t)) <= 1e-12 * max(1.0, weyl_density(t))


def test_fundamental_characters():
    assert char_fundamental("7", np.zeros(2)) == pytest.approx(7)
    assert char_fundamental("14", np.zeros(2)) == pytest.approx(14)
    assert char_fundamental("7", np.array([math.pi, math.pi])) == pytest.approx(-1, abs=1e-12)


def test_char_weyl_matches_fundamental(rng):
    t = rng.uniform(0, 2 * math.pi, size=(100, 2))
    assert np.max(np.abs(char_weyl(1, 0, t) - char_fundamental("7", t))) < 1e-9
    assert np.max(np.abs(char_weyl(0, 1, t) - char_fundamental("14", t))) < 1e-9
    assert np.max(np.abs(char_weyl(0, 0, t) - 1)) < 1e-12


def test_char_weyl_dimension():
    assert abs(char_weyl(1, 1, np.zeros(2)) - 64) < 1e-9


def test_eigenangles_rep7():
    assert all(a == 0 for a in eigenangles("7", np.zeros(2)).all_angles())
    t1, t2 = 0.3, 1.1
    got = sorted(eigenangles("7", np.array([t1, t2])).all_angles())
    want = sorted([0, t1, -t1, t1 + t2, -(t1 + t2), 2 * t1 + t2, -(2 * t1 + t2)])
    assert np.allclose(got, want, atol=1e-12)


@given(points)
def test_eigenangles_have_determinant_one(t):
    for rep in ("7", "14"):
        sp = eigenangles(rep, t)
        assert sp.dimension == int(rep)
        assert abs(np.prod(np.exp(1j * np.array(sp.all_angles()))) - 1) < 1e-9


def test_zhat_zero_at_identity():
    assert abs(zhat("7", np.zeros(2))) < 1e-15


def test_zhat_real_at_symmetry_point(rng):
    t = rng.uniform(0, 2 * math.pi, size=(1000, 2))
    z = zhat("7", t)
    assert np.max(np.abs(z.imag)) < 1e-10
    assert np.min(z.real) >= -1e-12


def test_zhat_grid_average():
    a = torus_grid(256)
    assert abs(np.mean(weyl_density(a) * zhat("7", a).real) - 6) < 1e-6


def test_quad_moment_values():
    assert abs(quad_moment("7", 0) - 1) < 1e-10
    assert abs(quad_moment("7", 2, n=512) - 55) < 1e-6
    assert abs(quad_moment("14", 1, n=512) - 33) < 1e-6


def test_quad_moment_off_symmetry_point_is_finite():
    v = quad_moment("7", 1.0, phi=0.7, n=256)
    assert 0 < v < 100


@pytest.mark.parametrize("a, b, expected, tol", [((1, 0), (1, 0), 1, 1e-8), ((1, 0), (0, 1), 0, 1e-8),
                                                  ((0, 0), (0, 0), 1, 1e-12)])
def test_orthogonality_examples(a, b, expected, tol):
    assert abs(orthogonality_check(*a, *b) - expected) < tol


def test_orthogonality_rejects_large_labels():
    with pytest.raises(ValueError):
        orthogonality_check(4, 0, 0, 0)


def test_trace_moments():
    m = trace_moments("7", 4)
    assert np.allclose(m, [0, 1, 1, 4], atol=1e-9)


def test_trace_histogram_support_and_mass():
    h = value_histogram("7", "trace", bins=90, n=256)
    assert h.edges[0] >= -2 - 1e-6 and h.edges[-1] <= 7 + 1e-6
    assert abs(h.total() - 1) < 1e-9
    for k, want in zip(range(1, 5), [0, 1, 1, 4]):
        # bin-centre moments: error O(width^2) times the moment scale
        assert abs(h.moment(k) - want) < 2e-3 * 7 ** k


def test_abs_histogram_first_moment():
    h = value_histogram("7", "abs", bins=400, n=512)
    assert abs(h.moment(1) - 6) < 1e-3


def test_class_function_average_of_constant():
    assert abs(quad_class_function(lambda a: np.ones(a.shape[:-1])) - 1) < 1e-12
