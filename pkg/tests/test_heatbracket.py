import math

import numpy as np
import pytest
from scipy.integrate import quad

from indexbench.context import Grading, Operator, TraceContext, trace
from indexbench.errors import CapError, ParameterError, ValidationError
from indexbench.heatbracket import (
    HeatBracketRequest,
    PreparedBracket,
    binomial_table,
    divided_diff_exp,
    heat_bracket,
    lemma_misc_check,
)
from indexbench.randgen import (
    balanced_grading,
    random_even,
    random_graded_module,
    random_hermitian,
    random_matrix,
    random_odd_hermitian,
    random_ungraded_module,
)


def test_divided_diff_exp_two_nodes():
    mu = 1.3
    val = divided_diff_exp([0.0, mu])
    assert val == pytest.approx((1 - math.exp(-mu)) / mu, rel=1e-13)


def test_divided_diff_exp_confluent():
    # all nodes equal: e^{-x} / n!
    for n in range(5):
        val = divided_diff_exp([0.7] * (n + 1))
        assert val == pytest.approx(math.exp(-0.7) / math.factorial(n), rel=1e-12)


def test_divided_diff_exp_nearly_confluent_stable():
    base = divided_diff_exp([0.5, 0.5, 0.5])
    close = divided_diff_exp([0.5, 0.5 + 1e-13, 0.5 - 1e-13])
    assert close == pytest.approx(base, rel=1e-9)


def test_divided_diff_vs_quadrature():
    # oracle: the simplex integral computed by adaptive quadrature
    lam = [0.3, 1.9]

    def integrand(t):
        return math.exp(-(1 - t) * lam[0] - t * lam[1])

    oracle = quad(integrand, 0, 1, epsabs=1e-13)[0]
    assert divided_diff_exp(lam) == pytest.approx(oracle, rel=1e-12)


def test_bracket_level0_balanced_grading_zero():
    ctx = TraceContext([(2, 1.0)])
    pb = PreparedBracket(ctx, np.zeros((2, 2)), Grading(ctx, [1, -1]))
    assert pb.value([np.eye(2)]) == pytest.approx(0.0)


def test_bracket_scalar_case():
    c = 0.85
    ctx = TraceContext([(1, 1.0)])
    pb = PreparedBracket(ctx, np.array([[c]]))
    one = np.eye(1, dtype=complex)
    assert pb.value([one, one]) == pytest.approx(math.exp(-c * c), rel=1e-12)


def test_bracket_offdiagonal_oracle():
    # <E12, E21> over D^2 = diag(0, mu): (1 - e^{-mu})/mu, with the 1-D
    # quadrature of tau(E12 e^{-t D^2} E21 e^{-(1-t) D^2}) as the oracle
    mu = 2.4
    ctx = TraceContext([(2, 1.0)])
    d = np.diag([0.0, math.sqrt(mu)])
    pb = PreparedBracket(ctx, d)
    e12 = np.zeros((2, 2), dtype=complex)
    e12[0, 1] = 1.0
    e21 = e12.T.copy()

    def integrand(t):
        return math.exp(-t * mu)

    oracle = quad(integrand, 0, 1, epsabs=1e-13)[0]
    closed = (1 - math.exp(-mu)) / mu
    val = pb.value([e12, e21])
    assert oracle == pytest.approx(closed, rel=1e-12)
    assert val == pytest.approx(closed, rel=1e-12)


def test_bracket_scale_parameter():
    ctx = TraceContext([(1, 1.0)])
    pb = PreparedBracket(ctx, np.array([[1.0]]))
    one = np.eye(1, dtype=complex)
    t = 1.7
    assert pb.value([one], scale=t) == pytest.approx(math.exp(-t * t), rel=1e-12)


def test_method_agreement_contract():
    rng = np.random.default_rng(0)
    for trial in range(8):
        d_dim = int(rng.integers(2, 7))
        ctx = TraceContext([(d_dim, float(rng.uniform(0.3, 1.5)))])
        dmat = random_hermitian(rng, ctx)
        pb = PreparedBracket(ctx, dmat)
        n = int(rng.integers(0, 4))
        factors = [random_matrix(rng, ctx) for _ in range(n + 1)]
        v_dd = pb.value(factors)
        v_nq = pb.value(factors, method="nested_quadrature")
        assert abs(v_dd - v_nq) <= 1e-6 * max(1e-30, abs(v_nq))
        if trial < 3:
            v_mc = pb.value(factors, method="monte_carlo",
                            mc_samples=100_000, mc_seed=trial)
            assert abs(v_dd - v_mc) <= 1e-2 * max(1e-2, abs(v_dd))


def test_monte_carlo_deterministic_seed():
    rng = np.random.default_rng(1)
    ctx = TraceContext([(3, 1.0)])
    pb = PreparedBracket(ctx, random_hermitian(rng, ctx))
    factors = [random_matrix(rng, ctx) for _ in range(3)]
    a = pb.value(factors, method="monte_carlo", mc_samples=20_000, mc_seed=7)
    b = pb.value(factors, method="monte_carlo", mc_samples=20_000, mc_seed=7)
    assert a == b


def test_heat_bracket_request_wrapper():
    ctx = TraceContext([(2, 1.0)])
    d = Operator(ctx, np.diag([0.5, -0.5]))
    req = HeatBracketRequest(D=d, factors=(np.eye(2),), scale=1.0)
    assert heat_bracket(req) == pytest.approx(2 * math.exp(-0.25), rel=1e-12)


def test_level_cap_error():
    ctx = TraceContext([(2, 1.0)])
    pb = PreparedBracket(ctx, np.zeros((2, 2)))
    factors = [np.eye(2)] * 8  # level 7 > default cap 6
    with pytest.raises(CapError):
        pb.value(factors)
    # explicit cost acknowledgment lifts the cap
    val = pb.value(factors, allow_large=True)
    assert val == pytest.approx(2.0 / math.factorial(7), rel=1e-12)


def test_non_self_adjoint_rejected():
    ctx = TraceContext([(2, 1.0)])
    with pytest.raises(ValidationError):
        PreparedBracket(ctx, np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_quadrature_cap():
    ctx = TraceContext([(2, 1.0)])
    pb = PreparedBracket(ctx, np.diag([0.3, 0.7]))
    with pytest.raises(CapError):
        pb.value([np.eye(2)] * 6, method="nested_quadrature")


# -- bracket identities -------------------------------------------------------


def graded_setup(seed=2):
    rng = np.random.default_rng(seed)
    mod = random_graded_module(rng, dim=4)
    parities = ["even", "odd", "even", "odd"]
    factors = []
    for p in parities:
        if p == "even":
            factors.append(random_even(rng, mod.ctx, mod.grading))
        else:
            factors.append(random_odd_hermitian(rng, mod.ctx, mod.grading))
    return mod, factors, parities


def test_lemma_insert_ones_n0():
    # <F0> = <F0, 1>: one insertion gap after the single factor
    rng = np.random.default_rng(3)
    mod = random_ungraded_module(rng, dim=3)
    f0 = random_matrix(rng, mod.ctx)
    rep = lemma_misc_check(mod.ctx, mod.D, [f0], "insert_ones")
    assert rep["pass"], rep


def test_lemma_insert_ones_graded():
    mod, factors, parities = graded_setup()
    rep = lemma_misc_check(mod.ctx, mod.D, factors, "insert_ones",
                           grading=mod.grading, parities=parities)
    assert rep["pass"], rep


def test_lemma_cyclic_all_even():
    rng = np.random.default_rng(4)
    mod = random_graded_module(rng, dim=4)
    factors = [random_even(rng, mod.ctx, mod.grading) for _ in range(3)]
    rep = lemma_misc_check(mod.ctx, mod.D, factors, "cyclic",
                           grading=mod.grading,
                           parities=["even"] * 3, j=1)
    assert rep["pass"], rep


def test_lemma_cyclic_graded_signs():
    mod, factors, parities = graded_setup(5)
    for j in (1, 2, 3):
        rep = lemma_misc_check(mod.ctx, mod.D, factors, "cyclic",
                               grading=mod.grading, parities=parities, j=j)
        assert rep["pass"], (j, rep)


def test_lemma_bracket_D():
    mod, factors, parities = graded_setup(6)
    rep = lemma_misc_check(mod.ctx, mod.D, factors, "bracket_D",
                           grading=mod.grading, parities=parities)
    assert rep["pass"], rep


def test_lemma_bracket_D2_interior():
    mod, factors, parities = graded_setup(7)
    rep = lemma_misc_check(mod.ctx, mod.D, factors, "bracket_D2",
                           grading=mod.grading, parities=parities, j=1)
    assert rep["pass"], rep
    rep2 = lemma_misc_check(mod.ctx, mod.D, factors, "bracket_D2",
                            grading=mod.grading, parities=parities, j=2)
    assert rep2["pass"], rep2


def test_lemma_bracket_D2_needs_interior_slot():
    mod, factors, parities = graded_setup(8)
    with pytest.raises(ParameterError):
        lemma_misc_check(mod.ctx, mod.D, factors, "bracket_D2",
                         grading=mod.grading, parities=parities, j=0)


def test_lemma_needs_parities_when_graded():
    rng = np.random.default_rng(9)
    mod = random_graded_module(rng, dim=4)
    f = [random_matrix(rng, mod.ctx) for _ in range(2)]
    with pytest.raises(ValidationError):
        lemma_misc_check(mod.ctx, mod.D, f, "cyclic", grading=mod.grading)


def test_binomial_table():
    t = binomial_table(8, 5)
    assert t[5, 2] == 10
    assert t[7, 3] == 35
    assert t[4, 0] == 1
