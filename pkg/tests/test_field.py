import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from supercartan.field import (DivisionByZero, FieldCtx, FieldError, NonPrime, embed, inv,
                               is_irreducible, make_field)

import oracles

FIELDS = [(5, 1), (5, 2), (5, 3), (7, 2), (11, 1), (5, 4)]


def test_prime_field_is_plain_modular_arithmetic():
    F = make_field(5, 1)
    assert F.modulus == (0, 1)
    assert F(3) * F(4) == F(2)
    assert F(3) + F(4) == F(2)


def test_gf25_modulus_is_x2_plus_2():
    assert make_field(5, 2).modulus == (2, 0, 1)


@pytest.mark.parametrize("p,k", [(5, 2), (5, 3), (7, 2), (5, 4), (7, 3)])
def test_modulus_matches_bruteforce_search(p, k):
    assert make_field(p, k).modulus == oracles.first_irreducible(p, k)


@pytest.mark.parametrize("bad", [4, 1, 0, 9, 2, 3])
def test_rejects_bad_characteristic(bad):
    with pytest.raises(NonPrime):
        make_field(bad, 1)


def test_inverse_examples():
    F5, F25 = make_field(5), make_field(5, 2)
    assert inv(F5(2)) == F5(3)
    assert inv(F25(1)) == F25(1)
    with pytest.raises(DivisionByZero):
        inv(F5(0))


def test_embed_examples():
    F5, F25 = make_field(5), make_field(5, 2)
    assert embed(F5(3), F25).coeffs == (3, 0)
    assert embed(F5(0), F25) == F25(0)
    assert embed(F5(2), F25) + embed(F5(4), F25) == embed(F5(1), F25)
    with pytest.raises(FieldError):
        embed(F25.gen, F5)


def test_parse_render_roundtrip_over_all_of_gf125():
    F = make_field(5, 3)
    for a in F.elements():
        assert F.parse(a.render()) == a


def test_irreducibility_agrees_with_trial_division():
    for p in (5, 7):
        for k in (2, 3, 4):
            rng = np.random.default_rng(p * 10 + k)
            for _ in range(30):
                f = [int(x) for x in rng.integers(0, p, size=k)] + [1]
                assert is_irreducible(f, p) == oracles.is_irreducible_brute(tuple(f), p)


def elements(draw, F):
    return F([draw(st.integers(0, F.p - 1)) for _ in range(F.k)])


@st.composite
def field_and_elements(draw, count=3):
    p, k = draw(st.sampled_from(FIELDS))
    F = make_field(p, k)
    return F, [elements(draw, F) for _ in range(count)]


@given(field_and_elements())
def test_multiplication_matches_schoolbook(data):
    F, (a, b, _) = data
    assert (a * b).coeffs == oracles.poly_mulmod(list(a.coeffs), list(b.coeffs), F.modulus, F.p)


@given(field_and_elements())
def test_field_axioms(data):
    F, (a, b, c) = data
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert a + (-a) == F.zero
    assert a * F.one == a
    if a:
        assert a * inv(a) == F.one
        assert a / a == F.one


@settings(max_examples=40)
@given(field_and_elements(count=1))
def test_inverse_matches_bruteforce(data):
    F, (a,) = data
    if not a:
        return
    assert inv(a).coeffs == oracles.gf_inv_brute(a.coeffs, F.modulus, F.p)


@given(field_and_elements(count=1))
def test_frobenius_order(data):
    F, (a,) = data
    assert a ** F.order == a


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(FIELDS), st.integers(1, 5), st.integers(1, 5), st.integers(1, 5),
       st.integers(0, 10 ** 6))
def test_vectorized_matmul_matches_scalar(pk, r, s, n, seed):
    F = FieldCtx(*pk)
    rng = np.random.default_rng(seed)
    A = rng.integers(0, F.p, size=(F.k, r, s))
    B = rng.integers(0, F.p, size=(F.k, s, n))
    C = F.matmul(A, B)
    for i in range(r):
        for j in range(n):
            acc = F.zero
            for t in range(s):
                acc = acc + F.element_at(A, (i, t)) * F.element_at(B, (t, j))
            assert F.element_at(C, (i, j)) == acc
