from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from g2rmt.laurent import (
    InstanceTooLarge,
    LaurentPoly,
    constant_term,
    ct_product,
    div_binomial,
    mul,
    root_factor,
    root_product,
    weyl_character,
)
from g2rmt.moments import macdonald_g2
from g2rmt.rootsys import LONG, SHORT, build_g2

G2 = build_g2()

exponents = st.tuples(st.integers(-3, 3), st.integers(-3, 3))
coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=7)
polys = st.dictionaries(exponents, coeffs, max_size=6).map(lambda d: LaurentPoly(2, d))


def lp(terms):
    return LaurentPoly(2, terms)


def test_root_factor_examples():
    assert root_factor((1, 0), 0) == lp({(0, 0): 1})
    assert root_factor((1, 0), 2) == lp({(0, 0): 1, (1, 0): -2, (2, 0): 1})
    assert root_factor((2, 1), 1) == lp({(0, 0): 1, (2, 1): -1})


def test_mul_examples():
    p = lp({(1, -2): Fraction(3, 4), (0, 0): 2})
    assert mul(p, LaurentPoly.one(2)) == p
    assert mul(lp({(0, 0): 1, (1, 0): -1}), lp({(0, 0): 1, (1, 0): 1})) == lp({(0, 0): 1, (2, 0): -1})
    a = (2, 1)
    assert mul(root_factor(a, 1), root_factor((-2, -1), 1)) == lp({(0, 0): 2, a: -1, (-2, -1): -1})


def test_constant_term_examples():
    assert constant_term(lp({(0, 0): 1, (1, 0): -1})) == 1
    assert constant_term(lp({(0, 0): 2, (1, 1): -1, (-1, -1): -1})) == 2
    assert constant_term(root_product(G2, {SHORT: 1, LONG: 1})) == 12


@pytest.mark.parametrize("ks, kl, value", [(1, 1, 1), (2, 1, 6), (2, 2, 33), (0, 0, Fraction(1, 12))])
def test_ct_product_values(ks, kl, value):
    assert ct_product(G2, {SHORT: ks, LONG: kl}) == value


def test_ct_product_agrees_with_closed_form_small():
    for ks in range(3):
        for kl in range(3):
            assert ct_product(G2, {SHORT: ks, LONG: kl}) == macdonald_g2(ks, kl)


def test_term_cap():
    with pytest.raises(InstanceTooLarge):
        root_product(G2, {SHORT: 3, LONG: 3}, term_cap=100)


def test_missing_class_rejected():
    with pytest.raises(ValueError):
        ct_product(G2, {SHORT: 1})


def test_weyl_character_dimensions():
    chi7 = weyl_character(G2, (2, 1))
    chi14 = weyl_character(G2, (3, 2))
    assert sum(chi7.terms.values()) == 7 and chi7.coeff((0, 0)) == 1
    assert sum(chi14.terms.values()) == 14 and chi14.coeff((0, 0)) == 2


def test_div_binomial_inverts_multiplication():
    p = lp({(0, 0): 3, (1, 2): -1, (-2, 1): Fraction(1, 2)})
    v = (1, 1)
    assert div_binomial(mul(p, root_factor(v, 1)), v) == p
    with pytest.raises(ValueError):
        div_binomial(lp({(0, 0): 1}), v)


@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert mul(a, b) == mul(b, a)
    assert mul(mul(a, b), c) == mul(a, mul(b, c))
    assert mul(a, b + c) == mul(a, b) + mul(a, c)


@given(polys, exponents)
def test_shift_is_multiplication_by_monomial(a, v):
    assert a.shift(v) == mul(a, LaurentPoly.monomial(v))
    assert constant_term(a.shift(v)) == a.coeff(tuple(-x for x in v))


@given(polys, polys, st.tuples(st.floats(0, 6.3), st.floats(0, 6.3)))
def test_evaluation_is_a_ring_homomorphism(a, b, t):
    t = np.array(t)
    lhs = mul(a, b).evaluate(t)
    rhs = a.evaluate(t) * b.evaluate(t)
    assert abs(lhs - rhs) <= 1e-9 * (1 + abs(rhs))
