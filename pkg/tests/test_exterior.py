import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from amdkit.exterior import (
    DegreeError,
    FormError,
    KForm,
    comass_sample,
    compound,
    evaluate,
    index_sets,
    permutation_sign,
    pullback_linear,
    pushforward_orthogonal,
    wedge,
)


def det_oracle(form, V):
    """Sum over basis k-sets of coefficient times the matching minor."""
    total = 0.0
    for c, idx in zip(form.coeffs, index_sets(form.n, form.k)):
        total += c * np.linalg.det(V[list(idx), :])
    return total


def random_form(rng, n, k):
    return KForm(n, k, rng.normal(size=math.comb(n, k)))


dims = st.integers(2, 6).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n)))


def test_index_sets_lexicographic():
    assert index_sets(4, 2) == ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def test_permutation_sign():
    assert permutation_sign((0, 1, 2)) == 1
    assert permutation_sign((1, 0, 2)) == -1
    assert permutation_sign((2, 0, 1)) == 1
    assert permutation_sign((0, 0, 1)) == 0


@given(dims, st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_evaluate_matches_minor_expansion(nk, seed):
    n, k = nk
    rng = np.random.default_rng(seed)
    w = random_form(rng, n, k)
    V = rng.normal(size=(n, k))
    assert evaluate(w, V) == pytest.approx(det_oracle(w, V), rel=1e-10, abs=1e-10)


@given(st.integers(0, 2**31))
@settings(max_examples=30, deadline=None)
def test_wedge_graded_commutative_and_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = random_form(rng, 5, 1), random_form(rng, 5, 2), random_form(rng, 5, 1)
    assert wedge(a, b).allclose(wedge(b, a), atol=1e-12)  # deg 1 * deg 2: sign +
    assert wedge(a, c).allclose(-wedge(c, a), atol=1e-12)
    assert wedge(wedge(a, b), c).allclose(wedge(a, wedge(b, c)), atol=1e-12)
    assert wedge(a, a).norm() < 1e-12


def test_basis_wedge_gives_volume():
    n = 3
    e = [KForm.basis(n, (i,)) for i in range(n)]
    vol = wedge(wedge(e[0], e[1]), e[2])
    assert evaluate(vol, np.eye(3)) == pytest.approx(1.0)
    assert KForm.basis(3, (1, 0)).allclose(-KForm.basis(3, (0, 1)))


@given(st.integers(0, 2**31))
@settings(max_examples=30, deadline=None)
def test_compound_is_multiplicative(seed):
    rng = np.random.default_rng(seed)
    A, B = rng.normal(size=(4, 4)), rng.normal(size=(4, 4))
    assert np.allclose(compound(A @ B, 2), compound(A, 2) @ compound(B, 2), atol=1e-10)


@given(st.integers(0, 2**31))
@settings(max_examples=30, deadline=None)
def test_pullback_evaluates_on_image(seed):
    rng = np.random.default_rng(seed)
    w = random_form(rng, 4, 2)
    A = rng.normal(size=(4, 4))
    V = rng.normal(size=(4, 2))
    assert evaluate(pullback_linear(w, A), V) == pytest.approx(evaluate(w, A @ V), rel=1e-9, abs=1e-9)


def test_pushforward_by_rotation_inverts_pullback():
    rng = np.random.default_rng(3)
    Q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
    w = random_form(rng, 5, 3)
    V = rng.normal(size=(5, 3))
    assert evaluate(pushforward_orthogonal(w, Q), Q @ V) == pytest.approx(evaluate(w, V))


def test_comass_of_unit_basis_form():
    w = KForm.basis(4, (0, 1))
    c = comass_sample(w, 2000, rng_seed=1)
    assert 0.9 < c <= 1.0 + 1e-12


def test_arithmetic_and_errors():
    a = KForm.basis(3, (0, 2), 2.0)
    assert (a + a - a * 2.0).norm() == 0.0
    with pytest.raises(DegreeError):
        KForm.zero(3, 4)
    with pytest.raises(FormError):
        KForm(3, 2, [1.0, 2.0])
    with pytest.raises(FormError):
        _ = a + KForm.zero(4, 2)


def test_terms_roundtrip():
    terms = {(0, 1): 1.5, (1, 3): -2.0}
    w = KForm.from_dict(4, 2, terms)
    assert w.terms() == terms
    for idx in itertools.combinations(range(4), 2):
        assert evaluate(w, np.eye(4)[:, list(idx)]) == pytest.approx(terms.get(idx, 0.0))


def brute_force_wedge_eval(a, b, V):
    """(a ^ b)(v_1..v_{k+l}) = 1/(k! l!) sum over permutations sign * a(...) b(...)."""
    k, l = a.k, b.k
    total = 0.0
    for perm in itertools.permutations(range(k + l)):
        s = permutation_sign(perm)
        total += s * evaluate(a, V[:, list(perm[:k])]) * evaluate(b, V[:, list(perm[k:])])
    return total / (math.factorial(k) * math.factorial(l))


@given(st.integers(0, 2**31), st.integers(1, 2), st.integers(1, 2))
@settings(max_examples=30, deadline=None)
def test_wedge_matches_permutation_sum(seed, k, l):
    rng = np.random.default_rng(seed)
    a, b = random_form(rng, 5, k), random_form(rng, 5, l)
    V = rng.normal(size=(5, k + l))
    assert evaluate(wedge(a, b), V) == pytest.approx(brute_force_wedge_eval(a, b, V), rel=1e-10, abs=1e-10)


@given(st.integers(0, 2**31))
@settings(max_examples=30, deadline=None)
def test_alternation(seed):
    rng = np.random.default_rng(seed)
    w = random_form(rng, 5, 3)
    V = rng.normal(size=(5, 3))
    assert evaluate(w, V[:, [1, 0, 2]]) == pytest.approx(-evaluate(w, V), abs=1e-12)


@given(st.integers(0, 2**31))
@settings(max_examples=30, deadline=None)
def test_pullback_functoriality(seed):
    rng = np.random.default_rng(seed)
    w = random_form(rng, 4, 2)
    A, B = rng.normal(size=(2, 4, 4))
    lhs = pullback_linear(w, A @ B)
    rhs = pullback_linear(pullback_linear(w, A), B)
    assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-10)


def test_worked_examples():
    e = [KForm.basis(4, (i,)) for i in range(4)]
    e12 = wedge(e[0], e[1])
    assert e12.terms() == {(0, 1): 1.0}
    assert wedge(e12, wedge(e[0], e[2])).norm() == 0.0
    w0 = wedge(e[0], e[2]) + wedge(e[1], e[3])
    # w0 ^ w0 = 2 e13 ^ e24 = 2 sign(0,2,1,3) e1234
    assert wedge(w0, w0).terms() == {(0, 1, 2, 3): -2.0}
    I = np.eye(4)
    assert evaluate(e12, I[:, [0, 1]]) == 1.0 and evaluate(e12, I[:, [1, 0]]) == -1.0
    assert evaluate(w0, I[:, [0, 2]]) == 1.0
    assert pullback_linear(w0, I).allclose(w0)
    swap = I[:, [1, 0, 2, 3]]
    assert pullback_linear(e12, swap).allclose(-e12)
    # half turn about span(e1, e2): e3 -> -e3, e4 -> -e4
    R = np.diag([1.0, 1.0, -1.0, -1.0])
    pulled = pullback_linear(w0, R)
    for idx in itertools.combinations(range(4), 2):
        assert evaluate(pulled, I[:, list(idx)]) == pytest.approx(evaluate(w0, R @ I[:, list(idx)]))
    assert pulled.allclose(-w0)
    assert comass_sample(KForm.zero(4, 2), 100) == 0.0
    assert 0.99 < comass_sample(w0, 10000, rng_seed=0) <= 1 + 1e-12


def test_evaluate_arity_mismatch():
    with pytest.raises(FormError):
        evaluate(KForm.basis(3, (0, 1)), np.eye(3)[:, :1])
    with pytest.raises(DegreeError):
        wedge(KForm.basis(3, (0, 1)), KForm.basis(3, (0, 2)))
