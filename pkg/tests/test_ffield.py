import numpy as np
import pytest
from hypothesis import given, strategies as st

from g2rmt.ffield import (
    AdditiveCharacter,
    FieldError,
    MultiplicativeCharacter,
    TableCapExceeded,
    cached_field,
    is_irreducible,
    is_prime,
    legendre,
    make_field,
    poly_mul,
    quadratic_character,
    unit_roots,
)

FIELDS = [(5, 1), (7, 1), (2, 3), (3, 2), (7, 3), (2, 6)]


def _brute_mul(f, a, b):
    """Schoolbook product of two codes modulo the field modulus."""
    da = [int(x) for x in f.digits(a)]
    db = [int(x) for x in f.digits(b)]
    prod = poly_mul(da, db, f.p)
    return f.from_poly(prod) if prod else 0


def test_gf5():
    f = make_field(5)
    assert list(f.elements()) == [0, 1, 2, 3, 4]
    assert f.generator in (2, 3)
    assert sorted(f.gen_power(np.arange(4))) == [1, 2, 3, 4]


def test_gf8_lagrange():
    f = make_field(2, 3)
    assert f.q == 8
    assert np.all(f.power(f.nonzero(), 7) == 1)


def test_gf8_trace_of_generator():
    f = make_field(2, 3)
    g = f.generator
    direct = f.add(f.add(g, f.power(g, 2)), f.power(g, 4))
    assert int(f.trace(g)) == int(direct)


def test_trace_and_norm_trivial_values():
    f = cached_field(3, 4)
    assert int(f.trace(0)) == 0
    assert int(f.norm(1)) == 1


def test_norm_of_quadratic_generator():
    p = 7
    f = make_field(p, 2)
    g = f.generator
    direct = f.mul(g, f.power(g, p))
    assert int(f.norm(g)) == int(direct)
    assert int(direct) < p  # lands in the prime field


@pytest.mark.parametrize("p, r", FIELDS)
def test_table_multiplication_matches_schoolbook(p, r):
    f = cached_field(p, r)
    rng = np.random.default_rng(p * 100 + r)
    a = rng.integers(0, f.q, 200)
    b = rng.integers(0, f.q, 200)
    got = f.mul(a, b)
    assert all(int(x) == _brute_mul(f, int(u), int(v)) for x, u, v in zip(got, a, b))


@pytest.mark.parametrize("p, r", FIELDS)
def test_trace_additive_norm_multiplicative(p, r):
    f = cached_field(p, r)
    rng = np.random.default_rng(7)
    a = rng.integers(0, f.q, 100)
    b = rng.integers(0, f.q, 100)
    assert np.array_equal(f.trace(f.add(a, b)), (f.trace(a) + f.trace(b)) % p)
    assert np.array_equal(f.norm(f.mul(a, b)), (f.norm(a) * f.norm(b)) % p)


def test_trace_fibers_are_equal():
    f = cached_field(7, 3)
    assert np.all(np.bincount(f.trace(f.elements()), minlength=7) == 49)


def test_trace_to_intermediate_field():
    big = cached_field(2, 6)
    t = big.trace(big.elements(), base_degree=2)
    sub = set(big.subfield_elements(2).tolist())
    assert set(t.tolist()) <= sub


def test_embedding_is_a_ring_homomorphism():
    small, big = make_field(2, 2), cached_field(2, 6)
    emb = big.embedding(small)
    x, y = np.meshgrid(small.elements(), small.elements(), indexing="ij")
    x, y = x.ravel(), y.ravel()
    assert np.array_equal(emb[small.add(x, y)], big.add(emb[x], emb[y]))
    assert np.array_equal(emb[small.mul(x, y)], big.mul(emb[x], emb[y]))


def test_bad_moduli_rejected():
    with pytest.raises(FieldError):
        make_field(2, 2, modulus=(1, 0, 1))  # x^2 + 1 = (x + 1)^2 over GF(2)
    with pytest.raises(FieldError):
        make_field(4)


def test_table_cap():
    with pytest.raises(TableCapExceeded):
        make_field(10007, 2, table_cap=1000)


def test_irreducibility_and_primality():
    assert is_irreducible([1, 1, 1], 2)
    assert not is_irreducible([1, 0, 1], 2)
    assert [n for n in range(30) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def test_additive_character_basics():
    f = cached_field(5)
    psi = AdditiveCharacter(f)
    assert psi(0) == 1
    with pytest.raises(FieldError):
        AdditiveCharacter(f, 5)


@pytest.mark.parametrize("p", [3, 5, 11, 101])
def test_quadratic_character_is_legendre(p):
    f = cached_field(p)
    chi = quadratic_character(f)
    vals = chi(f.nonzero())
    assert np.allclose(vals.imag, 0, atol=1e-15)
    assert set(np.rint(vals.real).astype(int).tolist()) == {-1, 1}
    assert np.array_equal(np.rint(vals.real).astype(int), legendre(f.nonzero(), p))


def test_unit_roots_are_exactly_conjugate():
    for n in (5, 12, 101):
        w = unit_roots(n)
        assert np.array_equal(w[1:][::-1], np.conj(w[1:]))
        assert w[0] == 1


@given(st.integers(0, 342), st.integers(0, 342))
def test_additive_character_homomorphism(x, y):
    f = cached_field(7, 3)
    psi = AdditiveCharacter(f, 3)
    assert abs(psi(f.add(x, y)) - psi(x) * psi(y)) < 1e-12


@given(st.integers(1, 63), st.integers(1, 63), st.integers(0, 62))
def test_multiplicative_character_homomorphism(x, y, j):
    f = cached_field(2, 6)
    chi = MultiplicativeCharacter(f, j)
    assert abs(chi(f.mul(x, y)) - chi(x) * chi(y)) < 1e-12
    assert abs(chi(x) * chi.conj()(x) - 1) < 1e-12


@given(st.integers(1, 80), st.integers(0, 200))
def test_power_and_inverse(x, e):
    f = cached_field(3, 4)
    assert int(f.mul(x, f.inv(x))) == 1
    assert int(f.mul(f.power(x, e), x)) == int(f.power(x, e + 1))
