"""Built-in randomized verification suites with fixed seeds.

Each suite function returns {"suite", "seed", "checks": [...], "pass"};
``run_suite`` dispatches by name.  The suites mirror the acceptance gates:

    complex         bicomplex identities b^2, B^2, bB + Bb on random chains
    cocycles        heat-bracket method agreement, bracket identities, the
                    JLO and Connes cocycle identities, Getzler certification
    indices         index-method consistency on the scenario library plus
                    random (e,f)-Fredholm instances
    transgressions  Duhamel and the three transgression identities
    reduction       retraction to the Connes character and scalar quadrature
    appendix        trace/p-norm/singular-number inequalities and the
                    perturbation, interpolation and log-commutator bounds
"""

from __future__ import annotations

import math

import numpy as np

from . import characters as ch
from . import library, pairings
from .chains import boundary_B, boundary_b, canonicalize, pair, pair_scale
from .context import (
    holder_check,
    op_norm,
    p_norm,
    singular_profile,
    summability_report,
    trace,
)
from .errors import IndexbenchError
from .fredholm import (
    double,
    double_generator,
    ef_index_kernel,
    ef_index_parametrix,
    interpolation_bound_check,
    log_commutator_check,
    mckean_singer,
    pairing_even_bounded,
    pairing_odd_bounded,
    perturbation_bound_check,
    pseudo_parametrix,
    spectral_flow,
    to_bounded,
    validate,
)
from .heatbracket import PreparedBracket, lemma_misc_check
from .randgen import (
    balanced_grading,
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
    random_unitary,
)

SUITES = ("complex", "cocycles", "indices", "transgressions", "reduction",
          "appendix", "all")


def _check(checks, name, ok, **details):
    checks.append({"name": name, "pass": bool(ok), **details})


def suite_complex(seed: int = 0, slow: bool = False) -> dict:
    rng = np.random.default_rng(seed)
    checks = []
    worst = {"b2": 0.0, "B2": 0.0, "bBBb": 0.0}
    for _ in range(100):
        ctx = random_context(rng, max_blocks=2, max_dim=4)
        level = int(rng.integers(1, 6))
        c = random_chain(rng, ctx, level, max_terms=4)
        needed = {max(level - 2, 0), level, level + 2}
        cochains = [random_test_cochain(rng, ctx, needed) for _ in range(10)]
        bb = boundary_b(boundary_b(c))
        BB = boundary_B(boundary_B(c))
        mixed = canonicalize(boundary_b(boundary_B(c)) + boundary_B(boundary_b(c))) \
            if level >= 1 else boundary_b(boundary_B(c))
        for psi in cochains:
            for key, chain in (("b2", bb), ("B2", BB), ("bBBb", mixed)):
                if chain.level < 0:
                    continue
                val = abs(pair(psi, chain))
                scale = pair_scale(psi, c)
                worst[key] = max(worst[key], val / scale)
    for key, rel in worst.items():
        _check(checks, f"{key} residual", rel <= 1e-10, worst_relative=rel,
               tolerance=1e-10)

    # canonicalize idempotency and pairing linearity
    rng2 = np.random.default_rng(seed + 1)
    ok_idem, ok_lin = True, True
    for _ in range(20):
        ctx = random_context(rng2, max_blocks=2, max_dim=4)
        c = random_chain(rng2, ctx, int(rng2.integers(0, 4)), max_terms=4)
        c1 = canonicalize(c)
        c2 = canonicalize(c1)
        ok_idem &= len(c1.terms) == len(c2.terms) and all(
            abs(a[0] - b[0]) <= 1e-14 for a, b in zip(c1.terms, c2.terms)
        )
        phi = random_test_cochain(rng2, ctx, [c.level])
        z1, z2 = complex(rng2.normal(), rng2.normal()), complex(rng2.normal())
        d = random_chain(rng2, ctx, c.level, max_terms=2)
        lhs = pair(phi, c.scaled(z1) + d.scaled(z2))
        rhs = z1 * pair(phi, c) + z2 * pair(phi, d)
        ok_lin &= abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs), abs(rhs))
    _check(checks, "canonicalize idempotent", ok_idem)
    _check(checks, "pairing linear", ok_lin)
    return {"suite": "complex", "seed": seed, "checks": checks,
            "pass": all(c["pass"] for c in checks)}


def suite_cocycles(seed: int = 0, slow: bool = False) -> dict:
    rng = np.random.default_rng(seed)
    checks = []

    # heat-bracket method agreement (the full grid runs in the acceptance suite)
    ok_q, ok_mc, worst_q, worst_mc = True, True, 0.0, 0.0
    for i in range(6 if not slow else 12):
        mod = random_ungraded_module(rng, dim=int(rng.integers(2, 5)))
        n = int(rng.integers(0, 4))
        factors = [random_matrix(rng, mod.ctx) for _ in range(n + 1)]
        pb = PreparedBracket(mod.ctx, mod.D, None)
        v_dd = pb.value(factors)
        v_q = pb.value(factors, method="nested_quadrature")
        rel = abs(v_dd - v_q) / max(1e-30, abs(v_q))
        worst_q = max(worst_q, rel)
        ok_q &= rel <= 1e-6
        if i < 3:
            v_mc = pb.value(factors, method="monte_carlo",
                            mc_samples=100_000, mc_seed=seed + i)
            rel_mc = abs(v_dd - v_mc) / max(1e-30, abs(v_dd))
            worst_mc = max(worst_mc, rel_mc)
            ok_mc &= rel_mc <= 1e-2
    _check(checks, "bracket dd vs quadrature", ok_q, worst_relative=worst_q)
    _check(checks, "bracket dd vs monte carlo", ok_mc, worst_relative=worst_mc)

    # bracket identities
    mod = random_graded_module(rng, dim=4)
    parities = ["even", "odd", "even", "odd"]
    factors = [random_even(rng, mod.ctx, mod.grading) if p == "even"
               else rng.normal() * random_odd_hermitian(rng, mod.ctx, mod.grading)
               for p in parities]
    for variant, kw in (("cyclic", {"j": 1}), ("insert_ones", {}),
                        ("bracket_D", {}), ("bracket_D2", {"j": 1})):
        rep = lemma_misc_check(mod.ctx, mod.D, factors, variant,
                               grading=mod.grading, parities=parities, **kw)
        _check(checks, f"lemma misc {variant}", rep["pass"],
               residual=rep["residual"], scale=rep["scale"])

    # JLO cocycle identity, n in {0, 1, 2}
    for n in (0, 2):
        m = random_graded_module(rng, dim=4)
        chains = [module_chain(rng, m, n + 1, max_terms=2) for _ in range(3)]
        rep = ch.jlo_cocycle_check(m, n, chains)
        _check(checks, f"jlo cocycle n={n} (graded)", rep["pass"],
               residuals=[r["residual"] for r in rep["rows"]])
    mu = random_ungraded_module(rng, dim=3)
    chains = [module_chain(rng, mu, 2, max_terms=2) for _ in range(3)]
    rep = ch.jlo_cocycle_check(mu, 1, chains)
    _check(checks, "jlo cocycle n=1 (ungraded)", rep["pass"],
           residuals=[r["residual"] for r in rep["rows"]])

    # Connes cocycle and degree shift through psi
    bm = to_bounded(random_graded_module(rng, dim=4, invertible=True))
    rep = ch.connes_psi_check(
        bm, 0,
        [module_chain(rng, bm, 0, max_terms=2) for _ in range(3)],
        [module_chain(rng, bm, 2, max_terms=2) for _ in range(3)],
    )
    _check(checks, "connes psi identities (even)", rep["pass"],
           residuals=[r["residual"] for r in rep["rows"]])
    bmo = to_bounded(random_ungraded_module(rng, dim=3, invertible=True))
    rep = ch.connes_psi_check(
        bmo, 1,
        [module_chain(rng, bmo, 1, max_terms=2) for _ in range(3)],
        [module_chain(rng, bmo, 3, max_terms=2) for _ in range(3)],
    )
    _check(checks, "connes psi identities (odd)", rep["pass"],
           residuals=[r["residual"] for r in rep["rows"]])

    # cochains vanish on scalar slots
    m = random_graded_module(rng, dim=4)
    one = np.eye(4, dtype=complex)
    from .chains import Chain

    c_scalar = Chain(m.ctx, 2, [(1.0, [random_even(rng, m.ctx, m.grading),
                                       2.5 * one,
                                       random_even(rng, m.ctx, m.grading)])])
    vals = [abs(pair(ch.jlo_cochain(m, 2), c_scalar)),
            abs(pair(ch.connes_cochain(to_bounded(
                random_graded_module(rng, dim=4, invertible=True)), 2),
                c_scalar))]
    _check(checks, "characters vanish on scalar slots",
           all(v <= 1e-12 for v in vals), values=vals)

    # Getzler bound certification
    viol = 0
    delta, eps = 0.1, 0.1
    total = 50 if slow else 20
    for _ in range(total):
        m = random_graded_module(rng, dim=4)
        pb = PreparedBracket(m.ctx, m.D, m.grading)
        vals_d, u = np.linalg.eigh(np.asarray(m.D.matrix))
        abs_d = (u * (np.abs(vals_d) ** (1 + eps))[None, :]) @ u.conj().T
        n = int(rng.integers(0, 4))
        f_norms, r_norms, mats = [], [], []
        k = 0
        for _ in range(n + 1):
            r = random_matrix(rng, m.ctx)
            if k < n and rng.random() < 0.4:
                fj = random_matrix(rng, m.ctx)
                mats.append(fj @ abs_d + r)
                f_norms.append(op_norm(fj))
                r_norms.append(op_norm(r))
                k += 1
            else:
                mats.append(r)
                f_norms.append(0.0)
                r_norms.append(op_norm(r))
        bound = ch.getzler_bound(m, n, k, f_norms, r_norms, delta, eps)
        if abs(pb.value(mats)) > bound:
            viol += 1
    _check(checks, "getzler bound certification", viol == 0,
           violations=viol, instances=total)
    return {"suite": "cocycles", "seed": seed, "checks": checks,
            "pass": all(c["pass"] for c in checks)}


def suite_indices(seed: int = 0, slow: bool = False) -> dict:
    rng = np.random.default_rng(seed)
    checks = []

    # Type I worked example
    t1 = library.type1_worked()
    vals = _even_method_values(t1["bounded"], t1["unbounded"], t1["projection"])
    dev = max(abs(v - t1["expected"]) for v in vals.values())
    _check(checks, "type I: five methods = 1", dev <= 1e-8, values=vals)
    jlo = pairings.jlo_pairing(t1["unbounded"], t1["projection"], 1, 10)
    jdev = abs(jlo.value - t1["expected"])
    _check(checks, "type I: truncated JLO within tail",
           jdev <= jlo.diagnostics["tail_bound"] * (1 + 1e-6),
           deviation=jdev, tail_bound=jlo.diagnostics["tail_bound"])

    # Type II fractional example through the doubling trick
    t2 = library.type2_fractional()
    dbl = double(t2["unbounded"])
    fb = to_bounded(dbl)
    pprime = double_generator(t2["unbounded"], t2["projection"])
    vals = _even_method_values(fb, dbl, pprime)
    vals["mckean_singer_base"] = mckean_singer(
        t2["unbounded"], t2["projection"], 1, 1.0).value
    dev = max(abs(v - t2["expected"]) for v in vals.values())
    _check(checks, "type II: five methods = 1/3", dev <= 1e-8, values=vals)
    jlo = pairings.jlo_pairing(dbl, pprime, 1, 10)
    jdev = abs(jlo.value - t2["expected"])
    _check(checks, "type II: truncated JLO within tail",
           jdev <= jlo.diagnostics["tail_bound"] * (1 + 1e-6),
           deviation=jdev, tail_bound=jlo.diagnostics["tail_bound"])

    # odd consistency: all odd routes produce 0 in a finite factor
    t3 = library.odd_consistency()
    odd_vals = {
        "kernel": pairing_odd_bounded(t3["bounded"], t3["unitary"], 1).value,
        "connes": pairings.connes_pairing(t3["bounded"], t3["unitary"], 1, 1).value,
        "connes_n3": pairings.connes_pairing(t3["bounded"], t3["unitary"], 1, 3).value,
    }
    dev = max(abs(v) for v in odd_vals.values())
    _check(checks, "odd consistency: indices vanish", dev <= 1e-8,
           values=odd_vals)

    # random (e, f)-Fredholm: kernel vs parametrix through the pseudoinverse
    worst = 0.0
    for _ in range(10):
        ctx = random_context(rng, max_blocks=2, max_dim=4)
        e = random_projection(rng, ctx)
        f = random_projection(rng, ctx)
        t = random_matrix(rng, ctx)
        s = pseudo_parametrix(ctx, e, f, t)
        k = ef_index_kernel(ctx, e, f, t).value
        for m in (1, 3):
            p = ef_index_parametrix(ctx, e, f, t, s.matrix, m).value
            worst = max(worst, abs(k - p))
    _check(checks, "kernel = parametrix (pseudoinverse)", worst <= 1e-10,
           worst_deviation=worst)

    # local constancy under small perturbations
    ctx = t1["ctx"]
    base = ef_index_kernel(ctx, t1["projection"] @ (np.eye(2) + np.diag([1., -1.])) / 2,
                           t1["projection"] @ (np.eye(2) - np.diag([1., -1.])) / 2,
                           t1["bounded"].F.matrix).value
    stable = True
    for _ in range(5):
        eta = 1e-3 * rng.random()
        pert = t1["bounded"].F.matrix + eta * random_hermitian(rng, ctx)
        v = ef_index_kernel(ctx, t1["projection"] @ (np.eye(2) + np.diag([1., -1.])) / 2,
                            t1["projection"] @ (np.eye(2) - np.diag([1., -1.])) / 2,
                            pert).value
        stable &= abs(v - base) <= 1e-12
    _check(checks, "index locally constant", stable, base=base)

    # spectral flow scenarios
    ctx1 = random_context(rng, max_blocks=1, max_dim=1)
    w = ctx1.blocks[0][1]
    path = [np.array([[t - 0.5]], dtype=complex) for t in np.linspace(0, 1, 11)]
    rep = spectral_flow(path, ctx1)
    _check(checks, "spectral flow single crossing", abs(rep.value - w) <= 1e-12,
           value=rep.value, weight=w)
    const = [np.array([[0.7]], dtype=complex)] * 3
    _check(checks, "spectral flow constant path",
           spectral_flow(const, ctx1).value == 0.0)
    rep_fwd = spectral_flow(path, ctx1)
    rep_rev = spectral_flow(path[::-1], ctx1)
    _check(checks, "spectral flow antisymmetry",
           abs(rep_fwd.value + rep_rev.value) <= 1e-12)

    # doubling preserves pairings; to_bounded consistent with McKean-Singer
    m = random_graded_module(rng, dim=4, invertible=True)
    p = random_projection(rng, m.ctx, m.grading)
    ms = mckean_singer(m, p, 1, 1.0).value
    dblm = double(m)
    p2 = double_generator(m, p)
    ms2 = mckean_singer(dblm, p2, 1, 1.0).value
    kb2 = pairing_even_bounded(to_bounded(dblm), p2, 1).value
    kb1 = pairing_even_bounded(to_bounded(m), p, 1).value
    _check(checks, "double preserves pairing", abs(ms - ms2) <= 1e-8,
           before=ms, after=ms2)
    _check(checks, "bounded-transform pairing = mckean-singer",
           abs(kb1 - ms) <= 1e-8 and abs(kb2 - ms2) <= 1e-8,
           kernel=kb1, mckean=ms)
    return {"suite": "indices", "seed": seed, "checks": checks,
            "pass": all(c["pass"] for c in checks)}


def _even_method_values(bounded, unbounded, p) -> dict:
    ctx = bounded.ctx
    chi = bounded.grading.matrix
    eye = np.eye(ctx.total_dim)
    e = p @ (eye + chi) / 2.0
    f = p @ (eye - chi) / 2.0
    s = pseudo_parametrix(ctx, e, f, bounded.F.matrix)
    out = {"kernel": pairing_even_bounded(bounded, p, 1).value}
    for m in (1, 3):
        out[f"parametrix_m{m}"] = ef_index_parametrix(
            ctx, e, f, bounded.F.matrix, s.matrix, m).value
    for t in (0.5, 1.0, 2.0):
        out[f"mckean_t{t}"] = mckean_singer(unbounded, p, 1, t).value
    for lvl in (0, 2):
        out[f"connes_n{lvl}"] = pairings.connes_pairing(bounded, p, 1, lvl).value
    return out


def suite_transgressions(seed: int = 0, slow: bool = False) -> dict:
    rng = np.random.default_rng(seed)
    checks = []

    m = random_graded_module(rng, dim=4)
    v = random_odd_hermitian(rng, m.ctx, m.grading)
    factors = [random_even(rng, m.ctx, m.grading) for _ in range(3)]
    rep = ch.duhamel_check(m, v, factors)
    _check(checks, "duhamel derivative", rep["slope"] is not None
           and abs(rep["slope"] - 2.0) <= 0.3, slope=rep["slope"])

    # scalar closed form, d = 1: d/dt <f0>_{D+tV} = -2 D V f0 e^{-D^2}
    from .context import TraceContext, Operator as Op
    ctx1 = TraceContext([(1, 1.0)])
    d0, v0, f0 = 0.8, 0.35, 1.7
    m1 = random_ungraded_module(rng, dim=1)
    m1 = type(m1)(ctx1, Op(ctx1, np.array([[d0]], dtype=complex)),
                  [], None)
    rep = ch.duhamel_check(m1, np.array([[v0]], dtype=complex),
                           [np.array([[f0]], dtype=complex)])
    closed = -2.0 * d0 * v0 * f0 * math.exp(-d0 * d0)
    _check(checks, "duhamel scalar closed form",
           abs(rep["rhs"].real - closed) <= 1e-12, rhs=rep["rhs"].real,
           closed_form=closed)

    rep = ch.jlo_transgression_check(m, v, 2,
                                     [module_chain(rng, m, 2, max_terms=2)])
    s = rep["rows"][0]["slope"]
    _check(checks, "jlo transgression (cobound)",
           s is not None and abs(s - 2.0) <= 0.4, slope=s)

    bm = to_bounded(random_graded_module(rng, dim=4, invertible=True))
    a = random_even(rng, bm.ctx, bm.grading)
    a = (a - a.conj().T) / 2.0
    rep = ch.connes_transgression_check(bm, a, 2,
                                        [module_chain(rng, bm, 2, max_terms=2)])
    s = rep["rows"][0]["slope"]
    bpart = max(rep["b_part_residuals"], default=0.0)
    _check(checks, "connes transgression", s is not None
           and abs(s - 2.0) <= 0.4 and bpart <= 1e-10, slope=s,
           b_part=bpart)

    # algebraic identities
    rep = ch.theorem_transgression_check(
        m, v, 2, [module_chain(rng, m, 2, max_terms=2) for _ in range(3)])
    _check(checks, "coboundary identity for Ch(D,V) (graded n=2)",
           rep["pass"], residuals=[r["residual"] for r in rep["rows"]])
    mu = random_ungraded_module(rng, dim=3)
    vu = random_hermitian(rng, mu.ctx)
    rep = ch.theorem_transgression_check(
        mu, vu, 1, [module_chain(rng, mu, 1, max_terms=2) for _ in range(3)])
    _check(checks, "coboundary identity for Ch(D,V) (ungraded n=1)",
           rep["pass"], residuals=[r["residual"] for r in rep["rows"]])

    w = random_odd_hermitian(rng, m.ctx, m.grading)
    rep = ch.level2_aux_check(
        m, v, w, 2, [module_chain(rng, m, 2, max_terms=2) for _ in range(3)])
    _check(checks, "level2 aux identity (graded n=2)", rep["pass"],
           residuals=[r["residual"] for r in rep["rows"]])
    wu = random_hermitian(rng, mu.ctx)
    rep = ch.level2_aux_check(
        mu, vu, wu, 1, [module_chain(rng, mu, 1, max_terms=2) for _ in range(3)])
    _check(checks, "level2 aux identity (ungraded n=1)", rep["pass"],
           residuals=[r["residual"] for r in rep["rows"]])

    if slow:
        mod = random_graded_module(rng, dim=4, invertible=True)
        chains = [module_chain(rng, mod, 2, max_terms=2),
                  module_chain(rng, mod, 0, max_terms=2)]
        rep = ch.d_alpha_transgression_check(mod, 2, 0.5, 1.5, chains)
        ok = all(r["slope"] is not None and abs(r["slope"] - 2.0) <= 0.4
                 for r in rep["rows"])
        _check(checks, "alpha transgression (slow)", ok,
               slopes=[r["slope"] for r in rep["rows"]])
        # flat spectrum: ln|D| scalar, so dD_a is proportional to D_a and the
        # antisymmetrized u-integrand cancels exactly; the slope-2 part of
        # the identity continues to hold
        from .context import Grading as Gr, TraceContext as TC, Operator as Op2
        ctx = TC([(2, 1.0)])
        chi = Gr(ctx, [1, -1])
        dflat = 1.7 * np.array([[0, 1], [1, 0]], dtype=complex)
        mflat = type(mod)(ctx, Op2(ctx, dflat, "odd"),
                          [Op2(ctx, np.diag([1.0, 0.0]).astype(complex), "even")],
                          chi)
        chains = [module_chain(rng, mflat, 2, max_terms=2)]
        rep = ch.d_alpha_transgression_check(mflat, 2, 0.5, 1.5, chains)
        anti = max(r["antisym_integral"] / r["scale"] for r in rep["rows"])
        ok = anti <= 1e-8 and all(
            r["slope"] is not None and abs(r["slope"] - 2.0) <= 0.4
            for r in rep["rows"])
        _check(checks, "alpha transgression flat spectrum", ok,
               antisym_integral=anti,
               slopes=[r["slope"] for r in rep["rows"]])
    return {"suite": "transgressions", "seed": seed, "checks": checks,
            "pass": all(c["pass"] for c in checks)}


def suite_reduction(seed: int = 0, slow: bool = False) -> dict:
    rng = np.random.default_rng(seed)
    checks = []
    from scipy.special import gamma

    worst = 0.0
    for n in range(4):
        q = ch.scalar_reduction_integral(n)
        worst = max(worst, abs(q - float(gamma(n / 2.0 + 1.0)) / 2.0))
    _check(checks, "scalar quadrature = Gamma(n/2+1)/2", worst <= 1e-10,
           worst_deviation=worst)

    t1 = library.type1_worked()
    from .chains import Chain

    rep = ch.reduction_check(t1["unbounded"], 0,
                             [Chain.elementary(t1["ctx"], [t1["projection"]])])
    _check(checks, "reduction on worked example", rep["pass"]
           and abs(rep["rows"][0]["lhs"].real - 1.0) <= 1e-8,
           lhs=rep["rows"][0]["lhs"].real)

    mod = random_graded_module(rng, dim=4, invertible=True)
    rep = ch.reduction_check(mod, 2,
                             [module_chain(rng, mod, 2, max_terms=2)
                              for _ in range(3)])
    _check(checks, "reduction random even n=2", rep["pass"],
           residuals=[r["residual"] for r in rep["rows"]])
    modo = random_ungraded_module(rng, dim=3, invertible=True)
    rep = ch.reduction_check(modo, 1,
                             [module_chain(rng, modo, 1, max_terms=2)
                              for _ in range(3)])
    _check(checks, "reduction random odd n=1", rep["pass"],
           residuals=[r["residual"] for r in rep["rows"]])

    # scalar-slot chains pair to zero on both sides
    one = np.eye(4, dtype=complex)
    c_scalar = Chain(mod.ctx, 2, [(1.0, [random_even(rng, mod.ctx, mod.grading),
                                         one, one])])
    rep = ch.reduction_check(mod, 2, [c_scalar])
    both_zero = abs(rep["rows"][0]["lhs"]) <= 1e-10 and \
        abs(rep["rows"][0]["rhs"]) <= 1e-10
    _check(checks, "reduction scalar-slot chains vanish", both_zero)

    rep = ch.scaling_limit_decay(mod, [module_chain(rng, mod, 2, max_terms=1)])
    _check(checks, "scaling limit decay", rep["pass"],
           values=rep["rows"][0]["values"])

    # retracted family pairs like the full character on closed chains
    t2 = library.type2_fractional()
    dbl = double(t2["unbounded"])
    pprime = double_generator(t2["unbounded"], t2["projection"])
    cherns = ch.chern_plus(dbl.ctx, pprime, 1)
    fam = ch.retracted_jlo(dbl, 2, 2.0)
    val = sum(fam.pair(cherns[m]).real for m in fam.levels() if m in cherns)
    _check(checks, "retracted family reproduces the pairing",
           abs(val - t2["expected"]) <= 1e-8, value=val)
    return {"suite": "reduction", "seed": seed, "checks": checks,
            "pass": all(c["pass"] for c in checks)}


def suite_appendix(seed: int = 0, slow: bool = False) -> dict:
    rng = np.random.default_rng(seed)
    checks = []

    # Hoelder on fixed exponent triples
    ok, worst = True, 0.0
    for _ in range(50):
        ctx = random_context(rng, max_blocks=2, max_dim=4)
        t = random_matrix(rng, ctx)
        s = random_matrix(rng, ctx)
        for (pp, qq, rr) in ((2, 2, 1), (3, 6, 2), (4, 4, 2)):
            rep = holder_check(ctx, t, s, pp, qq, rr)
            ok &= rep["pass"]
            if rep["rhs"] > 0:
                worst = max(worst, rep["lhs"] / rep["rhs"])
    _check(checks, "hoelder inequality", ok, worst_ratio=worst)

    # ||STR||_p <= ||S|| ||R|| ||T||_p
    ok = True
    for _ in range(20):
        ctx = random_context(rng, max_blocks=2, max_dim=4)
        s, t, r = (random_matrix(rng, ctx) for _ in range(3))
        lhs = p_norm(ctx, s @ t @ r, 2.0)
        rhs = op_norm(s) * op_norm(r) * p_norm(ctx, t, 2.0)
        ok &= lhs <= rhs * (1 + 1e-10)
    _check(checks, "||STR||_p bound", ok)

    # singular number properties (2), (3), (5) and tau(|T|) = int mu
    ok2 = ok3 = ok5 = ok_int = True
    for _ in range(20):
        ctx = random_context(rng, max_blocks=2, max_dim=4)
        t = random_matrix(rng, ctx)
        z = complex(rng.normal(), rng.normal())
        prof_t = singular_profile(ctx, t)
        prof_zt = singular_profile(ctx, z * t)
        prof_tstar = singular_profile(ctx, t.conj().T)
        xs = np.linspace(0, ctx.trace_of_identity() * 0.999, 23)
        ok2 &= all(abs(prof_zt.value_at(x) - abs(z) * prof_t.value_at(x)) <= 1e-9
                   for x in xs)
        ok2 &= all(abs(prof_tstar.value_at(x) - prof_t.value_at(x)) <= 1e-10
                   for x in xs)
        # (3): 0 <= T <= S implies mu(T) <= mu(S)
        a = random_matrix(rng, ctx)
        tpos = a @ a.conj().T
        bmat = random_matrix(rng, ctx)
        spos = tpos + bmat @ bmat.conj().T
        pt, ps = singular_profile(ctx, tpos), singular_profile(ctx, spos)
        ok3 &= all(pt.value_at(x) <= ps.value_at(x) * (1 + 1e-9) + 1e-12
                   for x in xs)
        # (5): mu(STR) <= ||S|| ||R|| mu(T)
        s, r = random_matrix(rng, ctx), random_matrix(rng, ctx)
        pstr = singular_profile(ctx, s @ t @ r)
        bound = op_norm(s) * op_norm(r)
        ok5 &= all(pstr.value_at(x) <= bound * prof_t.value_at(x) * (1 + 1e-9)
                   + 1e-12 for x in xs)
        # tau(|T|) = int mu and the p = 1 norm
        tau_abs = p_norm(ctx, t, 1.0)
        integral = singular_profile(ctx, t).integral()
        ok_int &= abs(tau_abs - integral) <= 1e-10 * max(1.0, abs(integral))
    _check(checks, "mu scaling and adjoint invariance", ok2)
    _check(checks, "mu monotone in operator order", ok3)
    _check(checks, "mu(STR) bound", ok5)
    _check(checks, "tau(|T|) = integral of mu", ok_int)

    # mu(f(|T|)) = f(mu(|T|)) for f(x) = x^2
    ok_f = True
    for _ in range(10):
        ctx = random_context(rng, max_blocks=2, max_dim=4)
        t = random_matrix(rng, ctx)
        abs_t = _abs_matrix(ctx, t)
        p1 = singular_profile(ctx, abs_t @ abs_t)
        p2 = singular_profile(ctx, abs_t)
        xs = np.linspace(0, ctx.trace_of_identity() * 0.999, 17)
        ok_f &= all(abs(p1.value_at(x) - p2.value_at(x) ** 2) <= 1e-8
                    for x in xs)
    _check(checks, "mu(f(|T|)) = f(mu(|T|)) for f = square", ok_f)

    # theta-summability bound
    ok = True
    for _ in range(5):
        mod = random_graded_module(rng, dim=8 // 2)
        rep = summability_report(mod.ctx, mod.D, 2.0)
        ok &= rep["ptheta_bound_pass"]
    _check(checks, "p implies theta bound", ok)

    # perturbation stability (Theorem C shape)
    ok = True
    for _ in range(50 if slow else 25):
        m = random_graded_module(rng, dim=4)
        v = random_odd_hermitian(rng, m.ctx, m.grading)
        eps = float(rng.uniform(0.05, 0.95))
        rep = perturbation_bound_check(m, v, eps)
        ok &= rep["pass"]
    _check(checks, "perturbation heat bound", ok)

    # interpolation bound across the alpha grid
    ok = True
    reps = []
    for _ in range(5):
        m = random_graded_module(rng, dim=4, invertible=True)
        a = random_even(rng, m.ctx, m.grading, hermitian=True)
        for alpha in (0.25, 0.5, 0.75, 1.0):
            rep = interpolation_bound_check(m, a, alpha, 2.0)
            reps.append(rep)
            ok &= rep["pass"]
    _check(checks, "interpolation commutator bound", ok,
           instances=len(reps))

    # log-commutator constants and strict bound
    m = random_graded_module(rng, dim=4, invertible=True)
    a = random_even(rng, m.ctx, m.grading, hermitian=True)
    rep = log_commutator_check(m, a)
    _check(checks, "log-commutator C1 = pi",
           abs(rep["C1"] - math.pi) <= 1e-8, C1=rep["C1"])
    _check(checks, "log-commutator C1' = 0",
           abs(rep["C1prime"]) <= 1e-8, C1prime=rep["C1prime"])
    ok = True
    for _ in range(10):
        m = random_graded_module(rng, dim=4, invertible=True)
        a = random_even(rng, m.ctx, m.grading, hermitian=True)
        rep = log_commutator_check(m, a)
        ok &= rep["pass_strict"]
    _check(checks, "log-commutator strict bound", ok)
    return {"suite": "appendix", "seed": seed, "checks": checks,
            "pass": all(c["pass"] for c in checks)}


def _abs_matrix(ctx, t):
    out = np.zeros_like(np.asarray(t, dtype=np.complex128))
    for s in ctx.slices:
        block = np.asarray(t, dtype=np.complex128)[s, s]
        u, sv, vh = np.linalg.svd(block)
        out[s, s] = (vh.conj().T * sv[None, :]) @ vh
    return out


_SUITE_FNS = {
    "complex": suite_complex,
    "cocycles": suite_cocycles,
    "indices": suite_indices,
    "transgressions": suite_transgressions,
    "reduction": suite_reduction,
    "appendix": suite_appendix,
}


def run_suite(name: str, seed: int = 0, slow: bool = False) -> dict:
    """Run one named suite, or all of them."""
    if name == "all":
        subs = [fn(seed=seed, slow=slow) for fn in _SUITE_FNS.values()]
        return {"suite": "all", "seed": seed, "suites": subs,
                "pass": all(s["pass"] for s in subs)}
    fn = _SUITE_FNS.get(name)
    if fn is None:
        raise IndexbenchError(
            f"unknown suite {name!r}; valid suites: {', '.join(SUITES)}"
        )
    return fn(seed=seed, slow=slow)
