import numpy as np
import pytest
from scipy.special import gamma

from indexbench.chains import (
    Chain,
    boundary_B,
    boundary_b,
    canonicalize,
    growth_report,
    pair,
    pair_scale,
)
from indexbench.context import TraceContext
from indexbench.errors import LevelError, StructuralError
from indexbench.randgen import (
    random_chain,
    random_context,
    random_matrix,
    random_test_cochain,
)


def e_matrix(i, j, d=2):
    m = np.zeros((d, d), dtype=complex)
    m[i, j] = 1.0
    return m


@pytest.fixture
def ctx():
    return TraceContext([(2, 1.0)])


def test_boundary_b_level1(ctx):
    rng = np.random.default_rng(0)
    a0, a1 = random_matrix(rng, ctx), random_matrix(rng, ctx)
    c = Chain.elementary(ctx, [a0, a1])
    bc = boundary_b(c)
    assert bc.level == 0
    # (a0 a1) - (a1 a0)
    total = sum(co * en[0] for co, en in bc.terms)
    assert np.allclose(total, a0 @ a1 - a1 @ a0)


def test_boundary_b_level0_zero(ctx):
    c = Chain.elementary(ctx, [np.eye(2)])
    assert boundary_b(c).is_zero()


def test_boundary_b_matrix_units(ctx):
    c = Chain.elementary(ctx, [e_matrix(0, 0), e_matrix(0, 1)])
    bc = boundary_b(c)
    total = sum(co * en[0] for co, en in bc.terms)
    assert np.allclose(total, e_matrix(0, 1))


def test_boundary_B_level0(ctx):
    a0 = random_matrix(np.random.default_rng(1), ctx)
    bc = boundary_B(Chain.elementary(ctx, [a0]))
    assert bc.level == 1
    assert len(bc.terms) == 1
    co, entries = bc.terms[0]
    assert np.allclose(entries[0], np.eye(2))
    assert np.allclose(entries[1], a0)


def test_boundary_B_level1_signs(ctx):
    rng = np.random.default_rng(2)
    a0, a1 = random_matrix(rng, ctx), random_matrix(rng, ctx)
    bc = boundary_B(Chain.elementary(ctx, [a0, a1]))
    # (1, a0, a1) - (1, a1, a0)
    assert bc.level == 2
    assert len(bc.terms) == 2
    coeffs = sorted(t[0].real for t in bc.terms)
    assert coeffs == pytest.approx([-1.0, 1.0])


def test_boundary_B_squared_zero(ctx):
    rng = np.random.default_rng(3)
    c = random_chain(rng, ctx, 2, max_terms=3)
    assert boundary_B(boundary_B(c)).is_zero()


def test_canonicalize_drops_scalar_slots(ctx):
    a0 = random_matrix(np.random.default_rng(4), ctx)
    c = Chain.elementary(ctx, [a0, np.eye(2)])
    assert canonicalize(c).is_zero()


def test_canonicalize_merges(ctx):
    a0, a1 = (random_matrix(np.random.default_rng(5), ctx) for _ in range(1)), None
    rng = np.random.default_rng(5)
    a0, a1 = random_matrix(rng, ctx), random_matrix(rng, ctx)
    c = Chain(ctx, 1, [(1.0, [a0, a1]), (1.0, [a0, a1])])
    cc = canonicalize(c)
    assert len(cc.terms) == 1
    assert cc.terms[0][0] == pytest.approx(2.0)


def test_canonicalize_idempotent(ctx):
    rng = np.random.default_rng(6)
    for _ in range(10):
        c = random_chain(rng, ctx, int(rng.integers(0, 4)), max_terms=4)
        c1 = canonicalize(c)
        c2 = canonicalize(c1)
        assert len(c1.terms) == len(c2.terms)
        for (x, ex), (y, ey) in zip(c1.terms, c2.terms):
            assert x == pytest.approx(y)
            for a, b in zip(ex, ey):
                assert np.allclose(a, b)


def test_scalar_shift_invisible_to_characters():
    # (a0, a1 + 3) and (a0, a1) pair identically with a character cochain
    from indexbench.characters import connes_cochain
    from indexbench.randgen import random_graded_module
    from indexbench.fredholm import to_bounded

    rng = np.random.default_rng(7)
    bm = to_bounded(random_graded_module(rng, dim=4, invertible=True))
    from indexbench.randgen import random_even

    a0 = random_even(rng, bm.ctx, bm.grading)
    a1 = random_even(rng, bm.ctx, bm.grading)
    phi = connes_cochain(bm, 2)
    a2 = random_even(rng, bm.ctx, bm.grading)
    c_plain = Chain.elementary(bm.ctx, [a0, a1, a2])
    c_shift = Chain.elementary(bm.ctx, [a0, a1 + 3.0 * np.eye(4), a2])
    assert pair(phi, c_plain) == pytest.approx(pair(phi, c_shift), abs=1e-10)


def test_mixed_context_entries_raise():
    ctx1 = TraceContext([(2, 1.0)])
    with pytest.raises(StructuralError):
        Chain(ctx1, 1, [(1.0, [np.eye(2)])])  # wrong entry count
    from indexbench.errors import ContextError

    with pytest.raises(ContextError):
        Chain(ctx1, 1, [(1.0, [np.eye(2), np.eye(3)])])


def test_pair_zero_cochain(ctx):
    from indexbench.chains import Cochain

    c = random_chain(np.random.default_rng(8), ctx, 2)
    assert pair(Cochain.zero(), c) == 0.0


def test_pair_level_error(ctx):
    from indexbench.chains import Cochain

    phi = Cochain(lambda entries: 1.0, frozenset({2}))
    with pytest.raises(LevelError):
        pair(phi, Chain.elementary(ctx, [np.eye(2)]))


def test_pair_transpose_of_b(ctx):
    rng = np.random.default_rng(9)
    c = random_chain(rng, ctx, 2, max_terms=3)
    psi = random_test_cochain(rng, ctx, [1])
    assert pair(psi, boundary_b(c)) == pair(psi, boundary_b(c))


def test_pair_linearity(ctx):
    rng = np.random.default_rng(10)
    c1 = random_chain(rng, ctx, 2, max_terms=2)
    c2 = random_chain(rng, ctx, 2, max_terms=2)
    psi = random_test_cochain(rng, ctx, [2])
    z1, z2 = complex(0.3, -1.1), complex(-2.0, 0.7)
    lhs = pair(psi, c1.scaled(z1) + c2.scaled(z2))
    rhs = z1 * pair(psi, c1) + z2 * pair(psi, c2)
    assert lhs == pytest.approx(rhs)


def test_bicomplex_identities_random():
    rng = np.random.default_rng(11)
    for _ in range(25):
        ctx = random_context(rng, max_blocks=2, max_dim=4)
        level = int(rng.integers(1, 6))
        c = random_chain(rng, ctx, level, max_terms=4)
        needed = {max(level - 2, 0), level, level + 2}
        psis = [random_test_cochain(rng, ctx, needed) for _ in range(4)]
        bb = boundary_b(boundary_b(c))
        BB = boundary_B(boundary_B(c))
        mixed = canonicalize(boundary_b(boundary_B(c)) + boundary_B(boundary_b(c)))
        for psi in psis:
            scale = pair_scale(psi, c)
            for chain in (bb, BB, mixed):
                if chain.level >= 0:
                    assert abs(pair(psi, chain)) <= 1e-10 * scale


def test_growth_report_zero_family(ctx):
    fam = {n: Chain.zero(ctx, n) for n in range(4)}
    rep = growth_report(fam, 1.5)
    assert rep["sup"] == 0.0


def test_growth_report_single_chain(ctx):
    rng = np.random.default_rng(12)
    c = random_chain(rng, ctx, 3, max_terms=1)
    rep = growth_report({3: c}, 1.0)
    expected = c.surrogate_norm() / float(gamma(1.5))
    assert rep["sup"] == pytest.approx(expected)


def test_growth_report_chern_decay():
    from indexbench.characters import chern_plus

    ctx = TraceContext([(2, 1.0)])
    p = np.diag([1.0, 0.0]).astype(complex)
    fam = chern_plus(ctx, p, 6)
    # coefficients grow like 4^k, so the Gamma weight wins for lambda < 1/2
    rep = growth_report(fam, 0.4)
    values = [row["value"] for row in rep["per_level"]]
    assert all(np.isfinite(values))
    peak = int(np.argmax(values))
    tail = values[peak:]
    assert all(tail[i + 1] <= tail[i] for i in range(len(tail) - 1))
    assert values[-1] < max(values)


def test_growth_report_scalar_projection_vanishes():
    from indexbench.characters import chern_plus

    ctx = TraceContext([(2, 1.0)])
    fam = chern_plus(ctx, np.eye(2), 3)
    for k in range(1, 4):
        assert fam[2 * k].is_zero()
