import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import hermite_e

from wnchaos import chaos
from wnchaos.chaos import (
    ChaosExpansion,
    basis_element,
    compose_polynomial,
    constant,
    evaluate,
    expectation,
    first_chaos,
    hida_norm_sq,
    l2_norm_sq,
    product,
    truncate,
    wick_exp,
    wick_power,
    wick_product,
)
from wnchaos.errors import DomainError
from wnchaos.gaussian_field import sample_omega, sample_theta_batch
from wnchaos.hermite import hermite_poly
from wnchaos.multiindex import MultiIndex, factorial

H1 = basis_element((1,))
H2 = basis_element((0, 1))


def coeffs_close(F, G, tol=1e-12):
    """Term-by-term match, relative to the largest coefficient once that exceeds 1."""
    keys = set(F.terms) | set(G.terms)
    scale = max([1.0] + [abs(c) for c in F.terms.values()])
    return all(abs(F.coefficient(k) - G.coefficient(k)) <= tol * scale for k in keys)


@st.composite
def sparse_chaos(draw, max_degree=4, max_basis=6, dyadic=False):
    n = draw(st.integers(0, 6))
    terms = {}
    for _ in range(n):
        entries = draw(st.lists(st.integers(0, 2), min_size=1, max_size=max_basis))
        alpha = MultiIndex(entries)
        if alpha.degree > max_degree:
            continue
        if dyadic:
            c = draw(st.integers(-16, 16)) / 8
        else:
            c = draw(st.floats(-2, 2, allow_nan=False))
        terms[alpha] = c
    return ChaosExpansion(1, terms)


def random_sparse(rng, max_degree=4, max_basis=6, n_terms=5):
    terms = {}
    while len(terms) < n_terms:
        entries = rng.integers(0, 3, size=rng.integers(1, max_basis + 1))
        alpha = MultiIndex(entries.tolist())
        if alpha.degree <= max_degree:
            terms[alpha] = float(rng.uniform(-1, 1))
    return ChaosExpansion(1, terms)


# -- structure -------------------------------------------------------------


def test_zero_coefficients_pruned_and_bounds():
    F = ChaosExpansion(1, {MultiIndex((1,)): 0.0, MultiIndex((0, 2, 1)): 3.0})
    assert len(F) == 1
    assert F.max_degree == 3 and F.max_basis == 3
    assert (H1 - H1).terms == {}


def test_expectation_examples():
    assert expectation(constant(5.0) + 3 * H1) == 5.0
    assert expectation(basis_element((2,))) == 0.0


# -- norms -----------------------------------------------------------------


def test_l2_norm_examples():
    assert l2_norm_sq(2 * basis_element((2,))) == 8.0
    assert l2_norm_sq(constant(1.0)) == 1.0
    assert l2_norm_sq(0.3 * H1 + 0.4 * H2) == pytest.approx(0.25, abs=1e-15)


def test_hida_norm_examples():
    assert hida_norm_sq(H1, 1) == 0.5
    F = 0.3 * H1 + 0.7 * basis_element((1, 2))
    assert hida_norm_sq(F, 0) == l2_norm_sq(F)
    assert hida_norm_sq(H2, 2) == 1 / 16


def test_test_norm_examples():
    assert chaos.test_norm_sq(H1, 1) == 2.0
    assert chaos.test_norm_sq(constant(1.0), 7) == 1.0
    assert chaos.test_norm_sq(basis_element((2,)), 0) == 4.0


@given(sparse_chaos(), st.floats(-3, 3), st.floats(0, 3))
def test_hida_norm_monotone_in_q(F, q, dq):
    F = ChaosExpansion(1, {a: abs(c) for a, c in F.terms.items()})
    assert hida_norm_sq(F, q + dq) <= hida_norm_sq(F, q) * (1 + 1e-12)


# -- Wick algebra ----------------------------------------------------------


def test_wick_product_examples():
    assert wick_product(H1, H1) == basis_element((2,))
    F = 0.5 * H1 + basis_element((0, 3))
    assert wick_product(constant(1.0), F) == F
    assert wick_product(constant(1.0) + H1, constant(1.0) - H1) == constant(1.0) - basis_element((2,))


def test_wick_product_dimension_mismatch():
    with pytest.raises(DomainError):
        wick_product(H1, basis_element((1,), d=2))


@given(sparse_chaos(dyadic=True), sparse_chaos(dyadic=True), sparse_chaos(dyadic=True))
def test_wick_algebra_laws(F, G, K):
    assert coeffs_close(wick_product(F, G), wick_product(G, F))
    assert coeffs_close(wick_product(wick_product(F, G), K), wick_product(F, wick_product(G, K)))
    assert coeffs_close(wick_product(F, G + K), wick_product(F, G) + wick_product(F, K))


def test_wick_power_examples():
    assert wick_power(H1, 3) == basis_element((3,))
    assert wick_power(0.3 * H1 + H2, 0) == constant(1.0)
    c = 1.7
    for n in range(7):
        assert coeffs_close(wick_power(c * H1, n), basis_element((n,), c ** n) if n else constant(1.0))


@given(sparse_chaos(max_degree=2, max_basis=3, dyadic=True), st.integers(0, 5))
@settings(max_examples=40)
def test_wick_power_is_iterated_product(F, n):
    iterated = constant(1.0)
    for _ in range(n):
        iterated = wick_product(iterated, F)
    assert coeffs_close(wick_power(F, n), iterated)


def _phi(rng, k, J=6):
    a = np.zeros(J)
    a[rng.choice(J, size=k, replace=False)] = rng.normal(size=k)
    return a / np.linalg.norm(a)


def _hermite_chaos(w, n):
    """||phi||^n h_n(w/||phi||) built by ordinary products, independent of the Wick route."""
    norm = math.sqrt(l2_norm_sq(w))
    h = hermite_e.herme2poly([0] * n + [1])
    return compose_polynomial(w / norm, h) * norm ** n


@pytest.mark.parametrize("k", [1, 2, 3])
def test_wick_power_hermite_identity_pointwise(k):
    rng = np.random.default_rng(k)
    a = _phi(rng, k)
    w = first_chaos(a)
    thetas = sample_theta_batch(11, range(100), len(a))
    x = evaluate(w, thetas)
    for n in range(7):
        lhs = evaluate(wick_power(w, n), thetas)
        rhs = hermite_poly(n, x)
        assert np.all(np.abs(lhs - rhs) <= 1e-9 * np.maximum(1.0, np.abs(rhs)))


@pytest.mark.parametrize("k, scale", [(1, 1.0), (2, 1.0), (3, 1.0), (3, 0.6), (2, 2.5)])
def test_wick_power_hermite_identity_coefficients(k, scale):
    a = _phi(np.random.default_rng(10 + k), k) * scale
    w = first_chaos(a)
    for n in range(7):
        assert coeffs_close(wick_power(w, n), _hermite_chaos(w, n), tol=1e-12)


def test_wick_power_multinomial_form():
    a = np.array([0.5, 0.0, -0.25, 0.75])
    w = first_chaos(a)
    F = wick_power(w, 4)
    for alpha, c in F.terms.items():
        dense = np.zeros(4)
        dense[: len(alpha.entries)] = alpha.entries
        expected = math.factorial(4) / factorial(alpha) * np.prod(a ** dense)
        assert c == pytest.approx(expected, rel=1e-14)


def test_wick_exp_coefficients():
    c = 0.8
    E = wick_exp(c * H1, 10).value
    for n in range(11):
        key = MultiIndex((n,)) if n else MultiIndex(())
        assert E.coefficient(key) == pytest.approx(c ** n / math.factorial(n), rel=1e-14)
    assert len(E) == 11
    assert wick_exp(ChaosExpansion(1), 20).value == constant(1.0)


def test_wick_exp_rejects_constant_term():
    with pytest.raises(DomainError):
        wick_exp(constant(1.0) + H1)


def test_wick_exp_tail_diagnostic_shrinks():
    tails = [wick_exp(H1, N).tail_hida_norm for N in (5, 10, 20)]
    assert tails[0] > tails[1] > tails[2] > 0


def test_wick_exp_pathwise_matches_lognormal():
    a = _phi(np.random.default_rng(3), 3)
    E = wick_exp(first_chaos(a), 20)
    thetas = sample_theta_batch(4, range(2000), len(a))
    w = thetas @ a
    exact = np.exp(w - 0.5)
    got = evaluate(E.value, thetas)
    # the truncation tail is far below rounding here; the degree-20 Hermite
    # products cancel heavily, so allow a rounding floor on top of it
    bound = np.array([sum(abs(x) ** n / math.factorial(n) for n in range(21, 60)) for x in w])
    assert np.all(np.abs(got - exact) <= 1e3 * bound + 1e-9 * np.maximum(1.0, exact))


def test_wick_exp_monte_carlo_mean():
    a = np.array([0.6, 0.0, 0.8])
    E = wick_exp(first_chaos(a), 20).value
    vals = evaluate(E, sample_theta_batch(21, range(100_000), 3))
    se = vals.std(ddof=1) / math.sqrt(vals.size)
    assert abs(vals.mean() - 1.0) < 3 * se


# -- evaluation ------------------------------------------------------------


def test_evaluate_examples():
    assert evaluate(H1, np.array([1.5])) == 1.5
    assert evaluate(basis_element((2,)), np.array([2.0])) == 3.0
    assert evaluate(constant(1.0), sample_omega(0, 0, 5)) == 1.0


def test_evaluate_truncation_error():
    with pytest.raises(DomainError):
        evaluate(basis_element((0, 0, 1)), np.zeros(2))


def test_evaluate_batch_matches_single():
    F = random_sparse(np.random.default_rng(0))
    thetas = sample_theta_batch(1, range(10), 6)
    assert np.array_equal(evaluate(F, thetas), [evaluate(F, t) for t in thetas])


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_sampled_mean_and_isometry(seed):
    F = random_sparse(np.random.default_rng(seed))
    vals = evaluate(F, sample_theta_batch(100 + seed, range(100_000), 6))
    n = vals.size
    assert abs(vals.mean() - expectation(F)) < 3 * vals.std(ddof=1) / math.sqrt(n)
    sq = vals * vals
    assert abs(sq.mean() - l2_norm_sq(F)) < 3 * sq.std(ddof=1) / math.sqrt(n)


# -- ordinary products ------------------------------------------------------


def test_product_hermite_square():
    assert product(H1, H1) == basis_element((2,)) + constant(1.0)


@given(sparse_chaos(max_degree=3, max_basis=3), sparse_chaos(max_degree=3, max_basis=3),
       st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_product_is_pointwise(F, G, theta):
    theta = np.array(theta)
    lhs = evaluate(product(F, G), theta)
    rhs = evaluate(F, theta) * evaluate(G, theta)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


def test_truncate():
    F = H1 + basis_element((3,)) + basis_element((0, 0, 1))
    assert truncate(F, max_degree=1) == H1 + basis_element((0, 0, 1))
    assert truncate(F, max_basis=1) == H1 + basis_element((3,))


# -- text format -----------------------------------------------------------


@given(sparse_chaos())
def test_text_round_trip(F):
    assert chaos.loads(chaos.dumps(F)) == F


def test_text_format_layout_and_errors():
    text = chaos.dumps(0.1 * basis_element((2, 0, 1)))
    assert text == "d=1\nalpha=2,0,1 c=0.1\n"
    with pytest.raises(DomainError, match="line 3"):
        chaos.loads("d=1\nalpha=1 c=2\nalpha=x c=1\n")
