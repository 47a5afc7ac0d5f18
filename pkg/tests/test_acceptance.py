"""Acceptance gate: every criterion at its stated tolerance, one printed
pass/fail line each.  Run with `pytest tests/test_acceptance.py -s`."""

import math
import time

import numpy as np
import pytest
from scipy.special import gamma

from indexbench import characters as ch
from indexbench import library, pairings, verify
from indexbench.chains import (
    boundary_B,
    boundary_b,
    canonicalize,
    pair,
    pair_scale,
)
from indexbench.context import TraceContext, op_norm
from indexbench.fredholm import (
    d_alpha,
    double,
    double_generator,
    ef_index_parametrix,
    interpolation_bound_check,
    log_commutator_check,
    mckean_singer,
    pairing_even_bounded,
    perturbation_bound_check,
    pseudo_parametrix,
    to_bounded,
)
from indexbench.heatbracket import PreparedBracket
from indexbench.randgen import (
    module_chain,
    random_chain,
    random_context,
    random_even,
    random_graded_module,
    random_hermitian,
    random_matrix,
    random_odd_hermitian,
    random_projection,
    random_test_cochain,
    random_ungraded_module,
)


def _report(number, title, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {number} [{status}] {title}" + (f" -- {detail}" if detail else ""))
    assert ok, f"criterion {number}: {title} ({detail})"


def test_criterion_1_bicomplex_identities():
    t0 = time.time()
    rng = np.random.default_rng(1001)
    worst = 0.0
    for _ in range(100):
        ctx = random_context(rng, max_blocks=2, max_dim=4)
        level = int(rng.integers(1, 6))
        c = random_chain(rng, ctx, level, max_terms=4)
        needed = {max(level - 2, 0), level, level + 2}
        psis = [random_test_cochain(rng, ctx, needed) for _ in range(10)]
        bb = boundary_b(boundary_b(c))
        BB = boundary_B(boundary_B(c))
        mixed = canonicalize(boundary_b(boundary_B(c)) + boundary_B(boundary_b(c)))
        for psi in psis:
            for chain in (bb, BB, mixed):
                if chain.level >= 0:
                    worst = max(worst, abs(pair(psi, chain)) / pair_scale(psi, c))
    elapsed = time.time() - t0
    _report(1, "bicomplex identities b^2, B^2, bB+Bb", worst <= 1e-10 and elapsed < 10.0,
            f"worst residual {worst:.2e}, {elapsed:.1f}s")


def test_criterion_2_heat_bracket_oracles():
    t0 = time.time()
    rng = np.random.default_rng(1002)
    worst_q, worst_mc = 0.0, 0.0
    for i in range(50):
        d_dim = int(rng.integers(2, 7))
        ctx = TraceContext([(d_dim, float(rng.uniform(0.3, 1.5)))])
        dmat = random_hermitian(rng, ctx)
        pb = PreparedBracket(ctx, dmat)
        n = int(rng.integers(0, 4))
        factors = [random_matrix(rng, ctx) for _ in range(n + 1)]
        v_dd = pb.value(factors)
        v_nq = pb.value(factors, method="nested_quadrature")
        worst_q = max(worst_q, abs(v_dd - v_nq) / max(1e-30, abs(v_nq)))
        if i % 5 == 0:
            v_mc = pb.value(factors, method="monte_carlo",
                            mc_samples=100_000, mc_seed=1000 + i)
            worst_mc = max(worst_mc,
                           abs(v_dd - v_mc) / max(1e-2, abs(v_dd)))
    elapsed = time.time() - t0
    _report(2, "heat-bracket oracle equivalence",
            worst_q <= 1e-6 and worst_mc <= 1e-2 and elapsed < 60.0,
            f"dd vs quad {worst_q:.2e}, dd vs mc {worst_mc:.2e}, {elapsed:.1f}s")


def test_criterion_3_jlo_cocycle():
    rng = np.random.default_rng(1003)
    ok = True
    worst = 0.0
    for n in (0, 2):
        for mod in (library.type1_worked()["unbounded"],
                    double(library.type2_fractional()["unbounded"]),
                    random_graded_module(rng, dim=4)):
            chains = [module_chain(rng, mod, n + 1, max_terms=2)
                      for _ in range(3)]
            rep = ch.jlo_cocycle_check(mod, n, chains, allow_large=True)
            ok &= rep["pass"]
            worst = max(worst, max(r["residual"] / r["scale"]
                                   for r in rep["rows"]))
    for mod in (library.odd_consistency()["unbounded"],
                random_ungraded_module(rng, dim=3)):
        chains = [module_chain(rng, mod, 2, max_terms=2) for _ in range(3)]
        rep = ch.jlo_cocycle_check(mod, 1, chains)
        ok &= rep["pass"]
        worst = max(worst, max(r["residual"] / r["scale"] for r in rep["rows"]))
    _report(3, "JLO cocycle identity, n in {0,1,2}", ok,
            f"worst relative residual {worst:.2e} (tol 1e-8)")


def test_criterion_4_connes_cocycle_degree_shift():
    rng = np.random.default_rng(1004)
    ok = True
    worst = 0.0
    bm = to_bounded(random_graded_module(rng, dim=4, invertible=True))
    rep = ch.connes_psi_check(
        bm, 0,
        [module_chain(rng, bm, 0, max_terms=2) for _ in range(4)],
        [module_chain(rng, bm, 2, max_terms=2) for _ in range(4)],
    )
    ok &= rep["pass"]
    worst = max(worst, max(r["residual"] / r["scale"] for r in rep["rows"]))
    bmo = to_bounded(random_ungraded_module(rng, dim=3, invertible=True))
    rep = ch.connes_psi_check(
        bmo, 1,
        [module_chain(rng, bmo, 1, max_terms=2) for _ in range(4)],
        [module_chain(rng, bmo, 3, max_terms=2) for _ in range(4)],
    )
    ok &= rep["pass"]
    worst = max(worst, max(r["residual"] / r["scale"] for r in rep["rows"]))
    _report(4, "Connes cocycle and degree shift through psi", ok,
            f"worst relative residual {worst:.2e} (tol 1e-10)")


def _five_methods(bounded, unbounded, p):
    ctx = bounded.ctx
    chi = bounded.grading.matrix
    eye = np.eye(ctx.total_dim)
    e = p @ (eye + chi) / 2.0
    f = p @ (eye - chi) / 2.0
    s = pseudo_parametrix(ctx, e, f, bounded.F.matrix)
    vals = {"kernel": pairing_even_bounded(bounded, p, 1).value}
    for m in (1, 3):
        vals[f"parametrix m={m}"] = ef_index_parametrix(
            ctx, e, f, bounded.F.matrix, s.matrix, m).value
    for t in (0.5, 1.0, 2.0):
        vals[f"mckean t={t}"] = mckean_singer(unbounded, p, 1, t).value
    for lvl in (0, 2):
        vals[f"connes n={lvl}"] = pairings.connes_pairing(
            bounded, p, 1, lvl).value
    return vals


def test_criterion_5_index_consistency():
    t1 = library.type1_worked()
    vals1 = _five_methods(t1["bounded"], t1["unbounded"], t1["projection"])
    dev1 = max(abs(v - 1.0) for v in vals1.values())
    jlo1 = pairings.jlo_pairing(t1["unbounded"], t1["projection"], 1, 10)
    in_tail1 = abs(jlo1.value - 1.0) <= \
        jlo1.diagnostics["tail_bound"] * (1 + 1e-6)

    t2 = library.type2_fractional()
    dbl = double(t2["unbounded"])
    fb = to_bounded(dbl)
    p2 = double_generator(t2["unbounded"], t2["projection"])
    vals2 = _five_methods(fb, dbl, p2)
    vals2["mckean (base)"] = mckean_singer(
        t2["unbounded"], t2["projection"], 1, 1.0).value
    dev2 = max(abs(v - 1.0 / 3.0) for v in vals2.values())
    jlo2 = pairings.jlo_pairing(dbl, p2, 1, 10)
    in_tail2 = abs(jlo2.value - 1.0 / 3.0) <= \
        jlo2.diagnostics["tail_bound"] * (1 + 1e-6)

    mutual1 = max(vals1.values()) - min(vals1.values())
    mutual2 = max(vals2.values()) - min(vals2.values())
    ok = dev1 <= 1e-8 and dev2 <= 1e-8 and mutual1 <= 1e-8 and \
        mutual2 <= 1e-8 and in_tail1 and in_tail2
    _report(5, "index consistency across five methods", ok,
            f"type I dev {dev1:.2e}, type II dev {dev2:.2e}, "
            f"JLO tails {jlo1.diagnostics['tail_bound']:.1e}/"
            f"{jlo2.diagnostics['tail_bound']:.1e}")


def test_criterion_6_reduction_theorem():
    rng = np.random.default_rng(1006)
    worst_gamma = 0.0
    for n in (0, 1, 2, 3):
        q = ch.scalar_reduction_integral(n)
        worst_gamma = max(worst_gamma,
                          abs(q - float(gamma(n / 2.0 + 1.0)) / 2.0))
    ok = worst_gamma <= 1e-10
    worst_res = 0.0
    mod = random_graded_module(rng, dim=4, invertible=True)
    rep = ch.reduction_check(mod, 2, [module_chain(rng, mod, 2, max_terms=2)
                                      for _ in range(3)])
    ok &= rep["pass"]
    worst_res = max(worst_res, max(r["residual"] for r in rep["rows"]))
    modo = random_ungraded_module(rng, dim=3, invertible=True)
    rep = ch.reduction_check(modo, 1, [module_chain(rng, modo, 1, max_terms=2)
                                       for _ in range(3)])
    ok &= rep["pass"]
    worst_res = max(worst_res, max(r["residual"] for r in rep["rows"]))
    t1 = library.type1_worked()
    from indexbench.chains import Chain

    rep = ch.reduction_check(t1["unbounded"], 0,
                             [Chain.elementary(t1["ctx"], [t1["projection"]])])
    ok &= rep["pass"] and abs(rep["rows"][0]["lhs"].real - 1.0) <= 1e-8
    _report(6, "reduction to the Connes character", ok,
            f"scalar quadrature dev {worst_gamma:.2e}, residual {worst_res:.2e}")


def test_criterion_7_transgression_identities():
    rng = np.random.default_rng(1007)
    mod = random_graded_module(rng, dim=4)
    v = random_odd_hermitian(rng, mod.ctx, mod.grading)
    w = random_odd_hermitian(rng, mod.ctx, mod.grading)
    slopes = {}
    rep = ch.duhamel_check(
        mod, v, [random_even(rng, mod.ctx, mod.grading) for _ in range(3)])
    slopes["duhamel"] = rep["slope"]
    rep = ch.jlo_transgression_check(mod, v, 2,
                                     [module_chain(rng, mod, 2, max_terms=2)])
    slopes["cobound"] = rep["rows"][0]["slope"]
    bm = to_bounded(random_graded_module(rng, dim=4, invertible=True))
    a = random_even(rng, bm.ctx, bm.grading)
    a = (a - a.conj().T) / 2.0
    rep = ch.connes_transgression_check(
        bm, a, 2, [module_chain(rng, bm, 2, max_terms=2)])
    slopes["connes"] = rep["rows"][0]["slope"]
    slope_ok = all(s is not None and abs(s - 2.0) <= 0.4
                   for s in slopes.values())

    worst = 0.0
    rep = ch.theorem_transgression_check(
        mod, v, 2, [module_chain(rng, mod, 2, max_terms=2) for _ in range(3)])
    alg_ok = rep["pass"]
    worst = max(worst, max(r["residual"] / r["scale"] for r in rep["rows"]))
    rep = ch.level2_aux_check(
        mod, v, w, 2, [module_chain(rng, mod, 2, max_terms=2) for _ in range(3)])
    alg_ok &= rep["pass"]
    worst = max(worst, max(r["residual"] / r["scale"] for r in rep["rows"]))
    modu = random_ungraded_module(rng, dim=3)
    vu = random_hermitian(rng, modu.ctx)
    wu = random_hermitian(rng, modu.ctx)
    rep = ch.theorem_transgression_check(
        modu, vu, 1, [module_chain(rng, modu, 1, max_terms=2) for _ in range(3)])
    alg_ok &= rep["pass"]
    rep = ch.level2_aux_check(
        modu, vu, wu, 1, [module_chain(rng, modu, 1, max_terms=2) for _ in range(3)])
    alg_ok &= rep["pass"]
    _report(7, "transgression identities", slope_ok and alg_ok,
            f"slopes {', '.join(f'{k}={s:.3f}' for k, s in slopes.items())}, "
            f"worst algebraic residual {worst:.2e}")


def test_criterion_8_getzler_certification():
    rng = np.random.default_rng(1008)
    delta, eps = 0.1, 0.1
    violations = 0
    with_power = 0
    for _ in range(50):
        mod = random_graded_module(rng, dim=4)
        pb = PreparedBracket(mod.ctx, mod.D, mod.grading)
        vals_d, u = np.linalg.eigh(np.asarray(mod.D.matrix))
        abs_d = (u * (np.abs(vals_d) ** (1 + eps))[None, :]) @ u.conj().T
        n = int(rng.integers(1, 4))
        f_norms, r_norms, mats = [], [], []
        k = 0
        for _ in range(n + 1):
            r = random_matrix(rng, mod.ctx)
            if k < n and rng.random() < 0.5:
                fj = random_matrix(rng, mod.ctx)
                mats.append(fj @ abs_d + r)
                f_norms.append(op_norm(fj))
                r_norms.append(op_norm(r))
                k += 1
            else:
                mats.append(r)
                f_norms.append(0.0)
                r_norms.append(op_norm(r))
        with_power += int(k > 0)
        bound = ch.getzler_bound(mod, n, k, f_norms, r_norms, delta, eps)
        if abs(pb.value(mats)) > bound:
            violations += 1
    _report(8, "Getzler bound certification", violations == 0 and with_power > 0,
            f"{violations} violations over 50 instances "
            f"({with_power} with |D|^(1+eps) factors)")


def test_criterion_9_appendix_suite():
    rep = verify.run_suite("appendix", seed=1009)
    failed = [c["name"] for c in rep["checks"] if not c["pass"]]
    c1 = next(c for c in rep["checks"] if c["name"] == "log-commutator C1 = pi")
    c1p = next(c for c in rep["checks"] if c["name"] == "log-commutator C1' = 0")
    _report(9, "appendix inequality suite", rep["pass"],
            f"C1 = {c1['C1']:.10f}, C1' = {c1p['C1prime']:.2e}"
            + (f", failed: {failed}" if failed else ""))


def test_criterion_10_doubling_and_alpha_endpoint():
    rng = np.random.default_rng(1010)
    # doubling preserves pairings on the scenario library and random modules
    devs = []
    t2 = library.type2_fractional()
    before = mckean_singer(t2["unbounded"], t2["projection"], 1, 1.0).value
    dbl = double(t2["unbounded"])
    p2 = double_generator(t2["unbounded"], t2["projection"])
    devs.append(abs(pairing_even_bounded(to_bounded(dbl), p2, 1).value - before))
    devs.append(abs(mckean_singer(dbl, p2, 1, 1.0).value - before))
    for _ in range(3):
        mod = random_graded_module(rng, dim=4)
        p = random_projection(rng, mod.ctx, mod.grading)
        ms = mckean_singer(mod, p, 1, 1.0).value
        dblm = double(mod)
        pp = double_generator(mod, p)
        devs.append(abs(mckean_singer(dblm, pp, 1, 1.0).value - ms))
        devs.append(abs(pairing_even_bounded(to_bounded(dblm), pp, 1).value - ms))
    double_ok = max(devs) <= 1e-8

    # d_alpha at the endpoint equals the bounded transform exactly
    endpoint_dev = 0.0
    for _ in range(3):
        mod = random_graded_module(rng, dim=4, invertible=True)
        f1 = np.asarray(d_alpha(mod, 1.0).matrix)
        f2 = np.asarray(to_bounded(mod).F.matrix)
        endpoint_dev = max(endpoint_dev, float(np.max(np.abs(f1 - f2))))
    endpoint_ok = endpoint_dev <= 1e-13

    # alpha-transgression (slow suite member, small module keeps it quick)
    mod = random_graded_module(rng, dim=2, invertible=True)
    chains = [module_chain(rng, mod, 2, max_terms=1)]
    rep = ch.d_alpha_transgression_check(mod, 2, 0.5, 1.25, chains)
    slopes = [r["slope"] for r in rep["rows"]]
    slope_ok = all(s is not None and abs(s - 2.0) <= 0.4 for s in slopes)
    _report(10, "doubling and alpha = 1 endpoint",
            double_ok and endpoint_ok and slope_ok,
            f"max pairing shift {max(devs):.2e}, endpoint dev "
            f"{endpoint_dev:.2e}, slopes {[f'{s:.3f}' for s in slopes]}")
