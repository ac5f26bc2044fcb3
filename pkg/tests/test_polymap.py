import random

import pytest
from hypothesis import given, strategies as st

from nilrec import nilgroup as ng
from nilrec import polymap as pm
from nilrec.polymap import DomainError, NonAbelian
from nilrec.semigroup import EMPTY, FiniteSet, Overlap, fset

from oracles import eval_poly, mat, matinv, naive_matmul, subsets

GROUND = fset(1, 2, 3, 4, 5)


def z(m):
    return ng.elementary(2, 1, 2, m)


def int_poly(scale=1, d=1, hi=10):
    return pm.from_json({"kind": "monomial", "degree": d,
                         "rule": {"range": [1, hi], "scale": scale}}, 2)


def rand_poly(seed, n=3, ground_size=5):
    return pm.random_polynomial(random.Random(seed), n, ground_size)


def agrees(P, fn, ground=GROUND):
    return all(mat(pm.evaluate(P, FiniteSet(a))) == fn(a) for a in subsets(ground.elements)
               if FiniteSet(a).isdisjoint(P.exclusion))


@given(st.integers(0, 10 ** 6), st.integers(3, 5))
def test_evaluate_matches_oracle(seed, n):
    P = rand_poly(seed, n)
    assert agrees(P, lambda a: eval_poly(P, a))


@given(st.integers(0, 10 ** 6))
def test_empty_set_maps_to_identity(seed):
    assert pm.evaluate(rand_poly(seed), EMPTY).is_identity()


def test_integer_monomial_sum():
    assert pm.evaluate(int_poly(), fset(1, 2)) == z(3)


def test_degree_two_single_entry():
    e12 = ng.elementary(3, 1, 2)
    P = pm.monomial(3, 2, [((1, 2), e12)])
    assert pm.evaluate(P, fset(1, 2)) == e12
    assert pm.evaluate(P, fset(1, 3)).is_identity()


def test_monomial_single_level():
    with pytest.raises(ValueError):
        pm.monomial(3, 1, [((1,), ng.elementary(3, 1, 2)), ((2,), ng.elementary(3, 1, 3))])


def test_triangular_keys_must_increase():
    with pytest.raises(ValueError):
        pm.triangular(3, 2, [((2, 1), ng.elementary(3, 1, 2))])


@given(st.integers(0, 10 ** 6))
def test_shift_extensional(seed):
    P = rand_poly(seed, ground_size=5)
    gamma = fset(1, 2)
    U = pm.shift(P, gamma)
    for a in subsets((3, 4, 5, 6)):
        assert mat(pm.evaluate(U, FiniteSet(a))) == eval_poly(P, (1, 2) + a)
    with pytest.raises(DomainError):
        pm.evaluate(U, fset(1))


def test_shift_integer_example():
    U = pm.shift(int_poly(), fset(1))
    assert pm.evaluate(U, fset(2, 3)) == z(6)


def test_shift_errors():
    P = int_poly()
    with pytest.raises(Overlap):
        pm.shift(pm.restrict(P, fset(1)), fset(1, 2))
    with pytest.raises(ValueError):
        pm.shift(P, EMPTY)


@given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
def test_conjugate_extensional(seed, gseed):
    P = rand_poly(seed)
    g = ng.random_element(random.Random(gseed), 3, bound=4)
    C = pm.conjugate(P, g)
    assert agrees(C, lambda a: naive_matmul(naive_matmul(matinv(g), eval_poly(P, a)), mat(g)))


@given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
def test_product_and_quotient_extensional(s1, s2):
    P, Q = rand_poly(s1), rand_poly(s2)
    assert agrees(pm.product(P, Q), lambda a: naive_matmul(eval_poly(P, a), eval_poly(Q, a)))
    inv_q = lambda a: matinv(ng.GroupElement(tuple(map(tuple, eval_poly(Q, a)))))
    assert agrees(pm.quotient_left(Q, P), lambda a: naive_matmul(inv_q(a), eval_poly(P, a)))
    assert pm.extensional_equal(pm.quotient_left(P, P), pm.constant_identity(3), GROUND)
    assert pm.extensional_equal(pm.product(P, pm.constant_identity(3)), P, GROUND)


def test_extensional_equal_detects_difference():
    e = ng.elementary(3, 1, 2)
    P = pm.monomial(3, 1, [((1,), e)])
    Q = pm.product(P, pm.monomial(3, 2, [((1, 2), e)]))
    assert pm.extensional_equal(P, P, GROUND)
    assert not pm.extensional_equal(P, Q, GROUND)
    assert pm.extensional_equal(P, Q, fset(1, 3))


def test_discrete_derivative_integer():
    D = pm.discrete_derivative_abelian(int_poly(), fset(2))
    assert pm.evaluate(D, fset(1, 3)) == z(2)


@given(st.integers(1, 5), st.integers(1, 3), st.integers(-3, 3))
def test_discrete_derivative_identity(b, d, scale):
    P = int_poly(scale, d, hi=6)
    beta = fset(b)
    D = pm.discrete_derivative_abelian(P, beta)
    for a in subsets(tuple(x for x in range(1, 6) if x != b)):
        alpha = FiniteSet(a)
        assert pm.evaluate(P, alpha.union(beta)) == pm.evaluate(P, alpha) * pm.evaluate(D, alpha)


def test_discrete_derivative_rejects_non_abelian():
    P = pm.product(pm.monomial(3, 1, [((1,), ng.elementary(3, 1, 2))]),
                   pm.monomial(3, 1, [((2,), ng.elementary(3, 2, 3))]))
    with pytest.raises(NonAbelian):
        pm.discrete_derivative_abelian(P, fset(1))
    assert pm.is_abelian(pm.discrete_derivative_abelian(pm.constant_identity(3), fset(1)))


@given(st.integers(0, 10 ** 6))
def test_json_round_trip(seed):
    P = rand_poly(seed)
    back = pm.from_json(pm.to_json(P))
    assert back == P


def test_system_requires_one_dimension():
    with pytest.raises(ng.DimensionMismatch):
        pm.System((pm.constant_identity(2), pm.constant_identity(3)))
