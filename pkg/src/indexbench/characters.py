"""Character constructions on top of heat brackets.

Cochains produced here evaluate elementary tensors (a_0, ..., a_n) through
lists of "bracket jobs" (coefficient, factor list); contractions and V/W
insertions are plain list surgery on those jobs.  Everything vanishes on
terms with a scalar entry in a slot >= 1 because such entries only ever enter
through commutators.

Conventions, for a module with operator D and optional grading chi:

    JLO:      (Ch^n(D), a) = < a_0, [D,a_1], ..., [D,a_n] >^n_D
    Connes:   (ch^n(F), a) = Gamma(n/2+1)/(2 n!) tau(chi F [F,a_0]...[F,a_n])
    psi:      (psi^{n+1}(F), a) = Gamma(n/2+2)/(n+2)! tau(chi a_0 F [F,a_1]...)
    Ch^n(D,V): V swept through the n+1 insertion gaps with sign (-1)^j
    alpha^n(D,V): one [D,a_j] at a time replaced by [V,a_j]
    iota(X): X inserted into every gap after a factor.

Scaled operators always enter explicitly: for Ch^n(tD) the commutator factors
are t[D,a_j] and the heat weight uses (tD)^2; for Ch^{n+1}(uD, D) the
inserted operator stays D itself.
"""

from __future__ import annotations

import math

from dataclasses import dataclass

import numpy as np
from scipy.special import gamma, gammaincc

from .chains import Chain, Cochain, boundary_B, boundary_b, pair
from .context import Operator, TraceContext, _matrix_of, op_norm, trace
from .errors import InvertibilityError, ParameterError, ValidationError
from .fredholm import BoundedModule, UnboundedModule, d_alpha, log_abs, to_bounded
from .heatbracket import PreparedBracket, commutator

# -- bracket-job plumbing -----------------------------------------------------


def _prep(module: UnboundedModule) -> PreparedBracket:
    return PreparedBracket(module.ctx, module.D, module.grading)


def _jlo_jobs(dm, n, scale):
    """Jobs for Ch^n(scale*D): [a_0, scale[D,a_1], ..., scale[D,a_n]]."""

    def jobs(entries):
        if len(entries) != n + 1:
            raise ParameterError("entry count does not match cochain level")
        factors = [np.asarray(entries[0], dtype=np.complex128)]
        factors += [scale * commutator(dm, e) for e in entries[1:]]
        return [(1.0, factors)]

    return jobs


def _v_jobs(dm, vm, n, scale):
    """Jobs for Ch^n(scale*D, V)."""
    base = _jlo_jobs(dm, n, scale)

    def jobs(entries):
        out = []
        for coeff, factors in base(entries):
            for j in range(1, n + 2):
                out.append((coeff * (-1) ** j, factors[:j] + [vm] + factors[j:]))
        return out

    return jobs


def _alpha_jobs(dm, vm, n, scale):
    """Jobs for alpha^n(scale*D, V)."""

    def jobs(entries):
        comms = [scale * commutator(dm, e) for e in entries[1:]]
        out = []
        for j in range(1, len(entries)):
            factors = [np.asarray(entries[0], dtype=np.complex128)]
            factors += comms[: j - 1] + [commutator(vm, entries[j])] + comms[j:]
            out.append((1.0, factors))
        return out

    return jobs


def _insert(jobs_fn, x):
    """iota(x): insert x after every factor position."""

    def new(entries):
        out = []
        for coeff, factors in jobs_fn(entries):
            for k in range(len(factors)):
                out.append((coeff, factors[: k + 1] + [x] + factors[k + 1:]))
        return out

    return new


def _jobs_to_cochain(pb, jobs_fn, level, name, scale,
                     method="divided_difference", allow_large=False,
                     norm_bound=None) -> Cochain:
    def eval_term(entries):
        total = 0.0 + 0.0j
        for coeff, factors in jobs_fn(entries):
            total += coeff * pb.value(factors, scale=scale, method=method,
                                      allow_large=allow_large)
        return total

    return Cochain(eval_term, frozenset({level}), name, scale_hint=norm_bound)


def module_parity(module) -> int:
    """0 when graded (characters at even levels), 1 when not."""
    return 0 if module.grading is not None else 1


def _check_level_parity(module, n):
    if n % 2 != module_parity(module):
        kind = "even (graded)" if module.grading is not None else "odd (ungraded)"
        raise ParameterError(f"{kind} module characters live at levels of that parity, got {n}")


def _require_same_parity(module, v, name):
    if module.grading is None:
        return
    vm = _matrix_of(v)
    res = module.grading.parity_residual(vm, "odd")
    if res > 1e-8:
        raise ValidationError(
            f"{name} must carry the same (odd) parity as D, residual {res:.2e}"
        )


# -- JLO family ---------------------------------------------------------------


def jlo_cochain(module: UnboundedModule, n: int, scale: float = 1.0,
                method: str = "divided_difference", allow_large: bool = False,
                strict_parity: bool = True) -> Cochain:
    """The level-n JLO character of scale*D."""
    if strict_parity:
        _check_level_parity(module, n)
    pb = _prep(module)
    dm = _matrix_of(module.D)
    cnorm = 2.0 * op_norm(dm)

    def bound(level):
        ht = float(np.sum(pb.w * np.exp(-(scale * pb.vals) ** 2)))
        return ht * max(1.0, (scale * cnorm) ** level) / math.factorial(level)

    return _jobs_to_cochain(pb, _jlo_jobs(dm, n, scale), n,
                            f"Ch^{n}({scale}*D)", scale, method, allow_large,
                            bound)


def jlo_v_cochain(module: UnboundedModule, v, n: int, scale: float = 1.0,
                  method: str = "divided_difference",
                  allow_large: bool = False) -> Cochain:
    """Ch^n(scale*D, V); V enters exactly as given."""
    _require_same_parity(module, v, "V")
    pb = _prep(module)
    dm, vm = _matrix_of(module.D), _matrix_of(v)
    return _jobs_to_cochain(pb, _v_jobs(dm, vm, n, scale), n,
                            f"Ch^{n}(D,V)", scale, method, allow_large)


def alpha_cochain(module: UnboundedModule, v, n: int, scale: float = 1.0,
                  method: str = "divided_difference",
                  allow_large: bool = False) -> Cochain:
    """alpha^n(scale*D, V)."""
    _require_same_parity(module, v, "V")
    pb = _prep(module)
    dm, vm = _matrix_of(module.D), _matrix_of(v)
    return _jobs_to_cochain(pb, _alpha_jobs(dm, vm, n, scale), n,
                            f"alpha^{n}(D,V)", scale, method, allow_large)


def _variation_jobs(dm, n, ins, direction, scale, heat_direction=None):
    """Jobs for the mixed second-variation cochain

        d/ds Ch^n(scale*(D + s*direction), ins)|_{s=0}

    (without the slot-derivative term Ch^n(D, d ins/ds), which callers add
    themselves when their ``ins`` also varies).  Three ingredients per
    insertion gap j (sign (-1)^j as in Ch^n(D,V)):

      * commutator variation: one scale*[D,a_k] replaced by
        scale*[direction,a_k] at a time;
      * heat variation: -iota(X) swept through the bracket, with
        X = scale^2 (D*direction + direction*D) by Duhamel (or an explicit
        ``heat_direction`` for families whose base scaling also varies).
    """
    x = heat_direction if heat_direction is not None else \
        scale * scale * (dm @ direction + direction @ dm)

    def jobs(entries):
        a0 = np.asarray(entries[0], dtype=np.complex128)
        comms = [scale * commutator(dm, e) for e in entries[1:]]
        out = []
        for j in range(1, n + 2):
            base = [a0] + comms[: j - 1] + [ins] + comms[j - 1:]
            for k in range(1, n + 1):
                slot = k if k < j else k + 1
                f = base.copy()
                f[slot] = scale * commutator(direction, entries[k])
                out.append(((-1.0) ** j, f))
            for g in range(len(base)):
                out.append((-((-1.0) ** j), base[: g + 1] + [x] + base[g + 1:]))
        return out

    return jobs


def jlo_variation_cochain(module: UnboundedModule, ins, direction, n: int,
                          scale: float = 1.0, heat_direction=None,
                          method: str = "divided_difference",
                          allow_large: bool = False) -> Cochain:
    """d/ds Ch^n(scale*(D + s*direction), ins)|_0 as exact bracket sums."""
    pb = _prep(module)
    dm = _matrix_of(module.D)
    jobs = _variation_jobs(dm, n, _matrix_of(ins), _matrix_of(direction),
                           scale, heat_direction)
    return _jobs_to_cochain(pb, jobs, n, f"dCh^{n}", scale, method, allow_large)


def jlo_vw_cochain(module: UnboundedModule, v, w, n: int, scale: float = 1.0,
                   method: str = "divided_difference",
                   allow_large: bool = False) -> Cochain:
    """Ch^n(D,V,W): the V-inserted variation of the JLO character in the
    direction W, as exact sums of heat brackets.

    Equal to d/ds Ch^n(D + sW, V)|_0; the W-slot enters through one
    commutator replacement [W,a_k] or one heat contraction of DW + WD per
    term, the V-slot through the signed gap insertions of Ch^n(D,V).  The
    identity certified by level2_aux_check is the V <-> W symmetry of its
    (b+B)-coboundary.
    """
    _require_same_parity(module, v, "V")
    _require_same_parity(module, w, "W")
    return jlo_variation_cochain(module, v, w, n, scale, method=method,
                                 allow_large=allow_large)


def iota_jlo_cochain(module: UnboundedModule, x, n: int, scale: float = 1.0,
                     nested=(), method: str = "divided_difference",
                     allow_large: bool = False) -> Cochain:
    """iota(X) Ch^n(scale*D); ``nested`` stacks further insertions outside."""
    pb = _prep(module)
    dm = _matrix_of(module.D)
    jobs = _insert(_jlo_jobs(dm, n, scale), _matrix_of(x))
    for y in nested:
        jobs = _insert(jobs, _matrix_of(y))
    return _jobs_to_cochain(pb, jobs, n, f"iota Ch^{n}", scale, method,
                            allow_large)


def iota_alpha_cochain(module: UnboundedModule, x, v, n: int,
                       scale: float = 1.0, method: str = "divided_difference",
                       allow_large: bool = False) -> Cochain:
    """iota(X) alpha^n(scale*D, V)."""
    pb = _prep(module)
    dm, vm = _matrix_of(module.D), _matrix_of(v)
    jobs = _insert(_alpha_jobs(dm, vm, n, scale), _matrix_of(x))
    return _jobs_to_cochain(pb, jobs, n, f"iota alpha^{n}", scale, method,
                            allow_large)


# -- identity checks ----------------------------------------------------------


def jlo_cocycle_check(module: UnboundedModule, n: int, chains,
                      allow_large: bool = False) -> dict:
    """(Ch^n, b c) + (Ch^{n+2}, B c) = 0 over level-(n+1) chains."""
    ch_n = jlo_cochain(module, n, strict_parity=False, allow_large=allow_large)
    ch_n2 = jlo_cochain(module, n + 2, strict_parity=False, allow_large=allow_large)
    rows = []
    for c in chains:
        if c.level != n + 1:
            raise ParameterError(f"need level-{n + 1} chains for the n={n} check")
        val = pair(ch_n, boundary_b(c)) + pair(ch_n2, boundary_B(c))
        scale = max(1.0, c.surrogate_norm())
        rows.append({"residual": abs(val), "scale": scale,
                     "pass": abs(val) <= 1e-8 * scale})
    return {"n": n, "rows": rows, "pass": all(r["pass"] for r in rows)}


def theorem_transgression_check(module: UnboundedModule, v, n: int, chains,
                                allow_large: bool = False) -> dict:
    """Residual of  b Ch^{n-1}(D,V) + B Ch^{n+1}(D,V)
                    + iota(DV+VD) Ch^n(D) - alpha^n(D,V)  on level-n chains."""
    dm, vm = _matrix_of(module.D), _matrix_of(v)
    x = dm @ vm + vm @ dm
    ch_m1 = jlo_v_cochain(module, v, n - 1, allow_large=allow_large) if n >= 1 else None
    ch_p1 = jlo_v_cochain(module, v, n + 1, allow_large=allow_large)
    iota_ch = iota_jlo_cochain(module, x, n, allow_large=allow_large)
    alp = alpha_cochain(module, v, n, allow_large=allow_large)
    rows = []
    for c in chains:
        val = 0.0 + 0.0j
        bc = boundary_b(c)
        if ch_m1 is not None and not bc.is_zero():
            val += pair(ch_m1, bc)
        val += pair(ch_p1, boundary_B(c))
        val += pair(iota_ch, c) - pair(alp, c)
        scale = max(1.0, c.surrogate_norm())
        rows.append({"residual": abs(val), "scale": scale,
                     "pass": abs(val) <= 1e-8 * scale})
    return {"n": n, "rows": rows, "pass": all(r["pass"] for r in rows)}


def level2_aux_check(module: UnboundedModule, v, w, n: int, chains,
                     allow_large: bool = False) -> dict:
    """The two-insertion coboundary identity on level-n chains:

        b Ch^{n-1}(D,V,W) + B Ch^{n+1}(D,V,W)
            = b Ch^{n-1}(D,W,V) + B Ch^{n+1}(D,W,V).

    Both sides expand the same mixed second variation of the JLO character
    (equality of d/ds d/dt Ch(D + sV + tW) in either order), which is how
    the insertion/contraction terms of the V- and W-transgressions exchange
    up to the stated coboundary.  Like the single-insertion coboundary
    identity, it holds at n of the module's parity (the B-chain signs
    (-1)^{nj} flip at the opposite parity).
    """
    vw_m1 = jlo_vw_cochain(module, v, w, n - 1, allow_large=allow_large) if n >= 1 else None
    wv_m1 = jlo_vw_cochain(module, w, v, n - 1, allow_large=allow_large) if n >= 1 else None
    vw_p1 = jlo_vw_cochain(module, v, w, n + 1, allow_large=allow_large)
    wv_p1 = jlo_vw_cochain(module, w, v, n + 1, allow_large=allow_large)
    rows = []
    for c in chains:
        lhs = rhs = 0.0 + 0.0j
        bc = boundary_b(c)
        if vw_m1 is not None and not bc.is_zero():
            lhs += pair(vw_m1, bc)
            rhs += pair(wv_m1, bc)
        bB = boundary_B(c)
        lhs += pair(vw_p1, bB)
        rhs += pair(wv_p1, bB)
        scale = max(1.0, abs(lhs), abs(rhs), c.surrogate_norm())
        rows.append({"residual": abs(lhs - rhs), "scale": scale,
                     "pass": abs(lhs - rhs) <= 1e-8 * scale})
    return {"n": n, "rows": rows, "pass": all(r["pass"] for r in rows)}


def _slope(res, h_values):
    if len(res) < 2 or res[0] <= 1e-14 or res[1] <= 1e-14:
        return None
    return math.log(res[0] / res[1]) / math.log(h_values[0] / h_values[1])


def duhamel_check(module: UnboundedModule, v, factors, h_values=(1e-2, 1e-3),
                  t0: float = 0.0) -> dict:
    """d/dt <F_0,...,F_n>_{D+tV} vs -iota(D_t V + V D_t)<...> at t = t0."""
    ctx = module.ctx
    dm, vm = _matrix_of(module.D), _matrix_of(v)
    mats = [_matrix_of(f) for f in factors]

    def bracket_at(t):
        pb = PreparedBracket(ctx, dm + t * vm, module.grading)
        return pb.value(mats)

    d0 = dm + t0 * vm
    x = d0 @ vm + vm @ d0
    pb0 = PreparedBracket(ctx, d0, module.grading)
    rhs = -sum(
        (pb0.value(mats[: k + 1] + [x] + mats[k + 1:]) for k in range(len(mats))),
        start=0.0 + 0.0j,
    )
    rows = []
    for h in h_values:
        lhs = (bracket_at(t0 + h) - bracket_at(t0 - h)) / (2 * h)
        rows.append({"h": h, "lhs": lhs, "rhs": rhs, "residual": abs(lhs - rhs)})
    return {"rows": rows, "rhs": rhs,
            "slope": _slope([r["residual"] for r in rows], list(h_values))}


def jlo_transgression_check(module: UnboundedModule, v, n: int, chains,
                            h_values=(1e-2, 1e-3), t0: float = 0.0,
                            allow_large: bool = False) -> dict:
    """d Ch^n(D_t)/dt = b Ch^{n-1}(D_t,V) + B Ch^{n+1}(D_t,V) at D_t = D + tV."""
    ctx = module.ctx
    dm, vm = _matrix_of(module.D), _matrix_of(v)

    def module_at(t):
        return UnboundedModule(ctx, Operator(ctx, dm + t * vm, module.D.parity),
                               module.generators, module.grading)

    m0 = module_at(t0)
    ch_m1 = jlo_v_cochain(m0, vm, n - 1, allow_large=allow_large) if n >= 1 else None
    ch_p1 = jlo_v_cochain(m0, vm, n + 1, allow_large=allow_large)
    rows = []
    for c in chains:
        rhs = 0.0 + 0.0j
        bc = boundary_b(c)
        if ch_m1 is not None and not bc.is_zero():
            rhs += pair(ch_m1, bc)
        rhs += pair(ch_p1, boundary_B(c))
        res = []
        for h in h_values:
            lhs = (
                pair(jlo_cochain(module_at(t0 + h), n, strict_parity=False,
                                 allow_large=allow_large), c)
                - pair(jlo_cochain(module_at(t0 - h), n, strict_parity=False,
                                   allow_large=allow_large), c)
            ) / (2 * h)
            res.append(abs(lhs - rhs))
        rows.append({"residuals": res, "slope": _slope(res, list(h_values))})
    return {"n": n, "rows": rows}


# -- Connes character family --------------------------------------------------


def _require_involution(module):
    fm = _matrix_of(module.F)
    res = op_norm(fm @ fm - np.eye(fm.shape[0]))
    if res > 1e-8:
        raise ValidationError(f"F^2 = 1 fails (residual {res:.2e})")
    return fm


def connes_cochain(module: BoundedModule, n: int) -> Cochain:
    """ch^n(F) = Gamma(n/2+1)/(2 n!) tau(chi F [F,a_0] ... [F,a_n])."""
    _check_level_parity(module, n)
    ctx = module.ctx
    fm = _require_involution(module)
    chi = module.grading.matrix if module.grading is not None else None
    coeff = float(gamma(n / 2.0 + 1.0)) / (2.0 * math.factorial(n))

    def eval_term(entries):
        prod = chi @ fm if chi is not None else fm
        for e in entries:
            prod = prod @ commutator(fm, e)
        return coeff * trace(ctx, prod)

    return Cochain(eval_term, frozenset({n}), f"ch^{n}(F)",
                   scale_hint=lambda lvl: coeff * ctx.trace_of_identity()
                   * (2.0 * op_norm(fm)) ** (lvl + 1))


def psi_cochain(module: BoundedModule, n: int) -> Cochain:
    """psi^{n+1}(F); satisfies ch^n = B psi^{n+1} and -ch^{n+2} = b psi^{n+1}."""
    _check_level_parity(module, n)
    ctx = module.ctx
    fm = _require_involution(module)
    chi = module.grading.matrix if module.grading is not None else None
    coeff = float(gamma(n / 2.0 + 2.0)) / math.factorial(n + 2)

    def eval_term(entries):
        prod = chi @ entries[0] if chi is not None else np.asarray(entries[0])
        prod = prod @ fm
        for e in entries[1:]:
            prod = prod @ commutator(fm, e)
        return coeff * trace(ctx, prod)

    return Cochain(eval_term, frozenset({n + 1}), f"psi^{n + 1}(F)",
                   scale_hint=lambda lvl: coeff * ctx.trace_of_identity()
                   * (2.0 * op_norm(fm)) ** (lvl + 1))


def connes_psi_check(module: BoundedModule, n: int, chains_n, chains_n2) -> dict:
    """ch^n = B psi^{n+1} on level-n chains; -ch^{n+2} = b psi^{n+1} on
    level-(n+2) chains."""
    ch_n = connes_cochain(module, n)
    ch_n2 = connes_cochain(module, n + 2)
    psi = psi_cochain(module, n)
    rows = []
    for c in chains_n:
        lhs = pair(ch_n, c)
        rhs = pair(psi, boundary_B(c))
        rows.append({"identity": "ch = B psi", "residual": abs(lhs - rhs),
                     "scale": max(1.0, abs(lhs), c.surrogate_norm())})
    for c in chains_n2:
        lhs = pair(ch_n2, c)
        rhs = -pair(psi, boundary_b(c))
        rows.append({"identity": "-ch = b psi", "residual": abs(lhs - rhs),
                     "scale": max(1.0, abs(lhs), c.surrogate_norm())})
    ok = all(r["residual"] <= 1e-10 * r["scale"] for r in rows)
    return {"n": n, "rows": rows, "pass": ok}


def iota_connes_cochain(module: BoundedModule, fdot, n: int) -> Cochain:
    """iota(Fdot) ch^{n-1}(F), the explicit Connes transgression cochain:

        Gamma(n/2+1)/(2 n!) sum_{k=0}^{n-1} (-1)^{k+1}
            tau(chi F [F,b_0] ... [F,b_k] Fdot ... [F,b_{n-1}]).

    The 1/2 matches ch^n's own normalization; the coboundary of this cochain
    reproduces d/dt ch^n(F_t) exactly (pinned against the term-by-term
    derivative of the character, which the tests rederive independently).
    """
    ctx = module.ctx
    fm = _matrix_of(module.F)
    fd = _matrix_of(fdot)
    chi = module.grading.matrix if module.grading is not None else None
    coeff = float(gamma(n / 2.0 + 1.0)) / (2.0 * math.factorial(n))

    def eval_term(entries):
        comms = [commutator(fm, e) for e in entries]
        total = 0.0 + 0.0j
        for k in range(len(entries)):
            prod = chi @ fm if chi is not None else fm
            for c in comms[: k + 1]:
                prod = prod @ c
            prod = prod @ fd
            for c in comms[k + 1:]:
                prod = prod @ c
            total += (-1) ** (k + 1) * trace(ctx, prod)
        return coeff * total

    return Cochain(eval_term, frozenset({n - 1}), f"iota(Fdot) ch^{n - 1}",
                   scale_hint=lambda lvl: coeff * (lvl + 1)
                   * ctx.trace_of_identity() * max(1.0, op_norm(fd))
                   * (2.0 * op_norm(fm)) ** (lvl + 2))


def connes_transgression_check(module: BoundedModule, rotation, n: int, chains,
                               h_values=(1e-2, 1e-3), t0: float = 0.0) -> dict:
    """d/dt ch^n(F_t) = b( iota(Fdot) ch^{n-1}(F_t) ) along F_t = R_t F R_t*.

    ``rotation`` is an anti-Hermitian even matrix A, R_t = exp(tA); then
    F_t^2 = 1 exactly along the path and Fdot = [A, F_t].  The B-part of the
    coboundary vanishes; it is spot-checked on B-transposes.
    """
    ctx = module.ctx
    fm = _matrix_of(module.F)
    am = _matrix_of(rotation)
    if op_norm(am + am.conj().T) > 1e-10 * max(1.0, op_norm(am)):
        raise ValidationError("rotation generator must be anti-Hermitian")
    if module.grading is not None:
        if module.grading.parity_residual(am, "even") > 1e-10:
            raise ValidationError("rotation generator must be even")

    from scipy.linalg import expm as _expm

    def module_at(t):
        r = _expm(t * am)
        ft = r @ fm @ r.conj().T
        return BoundedModule(ctx, Operator(ctx, ft, module.F.parity),
                             module.generators, module.grading)

    m0 = module_at(t0)
    f0 = _matrix_of(m0.F)
    fdot = am @ f0 - f0 @ am
    transgression = iota_connes_cochain(m0, fdot, n)
    rows = []
    for c in chains:
        rhs = pair(transgression, boundary_b(c)) if n >= 1 else 0.0 + 0.0j
        res = []
        for h in h_values:
            lhs = (pair(connes_cochain(module_at(t0 + h), n), c)
                   - pair(connes_cochain(module_at(t0 - h), n), c)) / (2 * h)
            res.append(abs(lhs - rhs))
        rows.append({"residuals": res, "slope": _slope(res, list(h_values))})
    b_part = []
    if n + 2 <= 6:
        trans_up = iota_connes_cochain(m0, fdot, n + 2)
        for c in chains:
            b_part.append(abs(pair(trans_up, boundary_B(c))))
    return {"n": n, "rows": rows, "b_part_residuals": b_part}


# -- K-theory Chern chains ------------------------------------------------------


def chern_plus(ctx: TraceContext, p, max_k: int) -> dict[int, Chain]:
    """ch_0 = (p);  ch_{2k} = (-1)^k (2k)!/(2 k!) (2p-1, p, ..., p)."""
    from .chains import canonicalize

    pm = ctx.check_matrix(_matrix_of(p), what="projection")
    _require_projection(pm)
    one = np.eye(ctx.total_dim, dtype=np.complex128)
    out = {0: canonicalize(Chain.elementary(ctx, [pm]))}
    for k in range(1, max_k + 1):
        coeff = (-1) ** k * math.factorial(2 * k) / (2.0 * math.factorial(k))
        entries = [2 * pm - one] + [pm] * (2 * k)
        out[2 * k] = canonicalize(Chain.elementary(ctx, entries, coeff))
    return out


def chern_minus(ctx: TraceContext, u, max_k: int) -> dict[int, Chain]:
    """ch_{2k+1} = Gamma(1/2)^{-1} (-1)^{k+1} k! (u^{-1}, u, ..., u^{-1}, u)."""
    from .chains import canonicalize

    um = ctx.check_matrix(_matrix_of(u), what="unitary")
    _require_unitary(um)
    uinv = um.conj().T
    out = {}
    for k in range(0, max_k + 1):
        coeff = (-1) ** (k + 1) * math.factorial(k) / math.sqrt(math.pi)
        entries = [uinv, um] * (k + 1)
        out[2 * k + 1] = canonicalize(Chain.elementary(ctx, entries, coeff))
    return out


def _require_projection(pm):
    r = max(op_norm(pm @ pm - pm), op_norm(pm - pm.conj().T))
    if r > 1e-8 * max(1.0, op_norm(pm)):
        raise ValidationError(f"not a projection (residual {r:.2e})")


def _require_unitary(um):
    r = op_norm(um.conj().T @ um - np.eye(um.shape[0]))
    if r > 1e-8:
        raise ValidationError(f"not a unitary (residual {r:.2e})")


# -- Getzler bound --------------------------------------------------------------


def getzler_bound(module: UnboundedModule, n: int, k: int, f_norms, r_norms,
                  delta: float, eps: float) -> float:
    """(2/((1-eps) delta e))^k tau(e^{-(1-delta)D^2})/(n-k)! prod(|F_j|+|R_j|).

    Bounds |<F_0|D|^{1+eps}+R_0, ..., F_n|D|^{1+eps}+R_n>| when at most k of
    the F_j differ from zero; needs 0 < delta < 1/(2e), 0 <= eps < 1, k <= n.
    """
    if not 0 < delta < 1.0 / (2.0 * math.e):
        raise ParameterError("need 0 < delta < 1/(2e)")
    if not 0 <= eps < 1:
        raise ParameterError("need 0 <= eps < 1")
    if not 0 <= k <= n:
        raise ParameterError("need 0 <= k <= n")
    if len(f_norms) != n + 1 or len(r_norms) != n + 1:
        raise ParameterError("need n+1 factor norms")
    from .context import heat_trace

    ht = heat_trace(module.ctx, module.D, 1.0 - delta)
    prod = math.prod(f + r for f, r in zip(f_norms, r_norms))
    return (2.0 / ((1.0 - eps) * delta * math.e)) ** k * ht \
        / math.factorial(n - k) * prod


# -- u-integrals, retracted JLO, reduction ---------------------------------------


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Gauss-Legendre panels for u-integrals.  cutoff='auto'
    derives a finite upper limit from the envelope u^{n+1} e^{-lam_min u^2}
    with tail certified below tail_rtol of the full envelope integral."""

    panels: int = 24
    order: int = 16
    cutoff: float | str = "auto"
    tail_rtol: float = 1e-12


def _gauss_nodes(a: float, b: float, spec: QuadratureSpec):
    x, w = np.polynomial.legendre.leggauss(spec.order)
    edges = np.linspace(a, b, spec.panels + 1)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = (lo + hi) / 2.0, (hi - lo) / 2.0
        nodes.append(mid + half * x)
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _envelope_tail(m: int, lam: float, u: float) -> float:
    """int_u^inf s^m e^{-lam s^2} ds = Gamma((m+1)/2, lam u^2)/(2 lam^((m+1)/2))."""
    s = (m + 1) / 2.0
    return float(gammaincc(s, lam * u * u)) * float(gamma(s)) / (2.0 * lam ** s)


def _auto_cutoff(n: int, lam_min: float, tail_rtol: float) -> float:
    if lam_min <= 0:
        raise InvertibilityError(
            "an infinite u-integral needs invertible D; double() the module"
        )
    m = n + 1
    full = _envelope_tail(m, lam_min, 0.0)
    u = 1.0
    while _envelope_tail(m, lam_min, u) > tail_rtol * full and u < 1e4:
        u *= 1.25
    return u


def u_integral(f, upper: float, n_env: int, lam_min: float,
               spec: QuadratureSpec = QuadratureSpec()) -> complex:
    """int_0^upper f(u) du; upper = inf resolves through the auto cutoff."""
    if upper == math.inf:
        if spec.cutoff == "auto":
            upper = _auto_cutoff(n_env, lam_min, spec.tail_rtol)
        else:
            upper = float(spec.cutoff)
    nodes, weights = _gauss_nodes(0.0, float(upper), spec)
    return sum((w * f(float(u)) for u, w in zip(nodes, weights)),
               start=0.0 + 0.0j)


class CochainFamily:
    """Level -> chain-evaluator map; pairs with whole chains so components
    may involve boundary transposes internally."""

    def __init__(self, evaluators: dict[int, object], name: str = ""):
        self.evaluators = dict(evaluators)
        self.name = name

    def levels(self):
        return sorted(self.evaluators)

    def pair(self, c: Chain) -> complex:
        f = self.evaluators.get(c.level)
        if f is None:
            return 0.0 + 0.0j
        if isinstance(f, Cochain):
            return pair(f, c)
        return complex(f(c))


def _min_sq_eigenvalue(module: UnboundedModule) -> float:
    vals = np.linalg.eigvalsh(_matrix_of(module.D))
    return float(np.min(np.abs(vals))) ** 2


def retracted_jlo(module: UnboundedModule, n: int, t: float,
                  spec: QuadratureSpec = QuadratureSpec(),
                  allow_large: bool = False) -> CochainFamily:
    """Ch^{<=n}(tD) with the level-n correction -B int_0^t Ch^{n+1}(uD, D) du.

    The u-integral enters with the sign that makes the family agree with the
    full JLO character on (b+B)-closed chains for every t; that invariant
    (exactness of the index pairing) pins it against the transgression
    theorem's orientation.  At t = inf (invertible D only) the truncated part
    has decayed away and the family reduces to the integral term alone.
    """
    parity = module_parity(module)
    if n % 2 != parity:
        raise ParameterError("n must match the module parity")
    lam_min = _min_sq_eigenvalue(module)
    if t == math.inf and lam_min <= 1e-16:
        raise InvertibilityError("t = inf needs invertible D; double() first")

    evaluators: dict[int, object] = {}
    if t != math.inf:
        for m in range(parity, n + 1, 2):
            evaluators[m] = jlo_cochain(module, m, scale=float(t),
                                        strict_parity=False,
                                        allow_large=allow_large)

    base_at_n = evaluators.get(n)
    dm = module.D

    def level_n(c: Chain) -> complex:
        bc = boundary_B(c)

        def f(u):
            phi = jlo_v_cochain(module, dm, n + 1, scale=u,
                                allow_large=allow_large)
            return pair(phi, bc) if not bc.is_zero() else 0.0 + 0.0j

        val = -u_integral(f, t, n + 1, lam_min, spec)
        if base_at_n is not None:
            val += pair(base_at_n, c)
        return val

    evaluators[n] = level_n
    return CochainFamily(evaluators, name=f"retracted JLO (n={n}, t={t})")


def scalar_reduction_integral(n: int,
                              spec: QuadratureSpec = QuadratureSpec()) -> float:
    """int_0^inf u^{n+1} e^{-u^2} du via the package quadrature; closed form
    Gamma(n/2 + 1)/2."""
    val = u_integral(lambda u: u ** (n + 1) * math.exp(-u * u),
                     math.inf, n, 1.0, spec)
    return float(val.real)


def reduction_check(module: UnboundedModule, n: int, chains,
                    spec: QuadratureSpec = QuadratureSpec(),
                    allow_large: bool = False) -> dict:
    """The t = inf retracted family of F against the Connes character:

        ( -B int_0^inf Ch^{n+1}(uF, F) du )(c)  =  (ch^n(F))(c)

    for the bounded transform F of the module (sign as in retracted_jlo);
    F^2 = 1 collapses the heat factor, so the quadrature side is exact up to
    the u-integral error."""
    bounded = to_bounded(module)
    fmod = UnboundedModule(module.ctx, bounded.F, module.generators,
                           module.grading)
    ch = connes_cochain(bounded, n)
    rows = []
    for c in chains:
        bc = boundary_B(c)

        def f(u):
            phi = jlo_v_cochain(fmod, bounded.F, n + 1, scale=u,
                                allow_large=allow_large)
            return pair(phi, bc) if not bc.is_zero() else 0.0 + 0.0j

        lhs = -u_integral(f, math.inf, n + 1, 1.0, spec)
        rhs = pair(ch, c)
        scale = max(1.0, abs(rhs), c.surrogate_norm())
        rows.append({"lhs": lhs, "rhs": rhs, "residual": abs(lhs - rhs),
                     "scale": scale, "pass": abs(lhs - rhs) <= 1e-8 * scale})
    return {"n": n, "rows": rows, "pass": all(r["pass"] for r in rows)}


def scaling_limit_decay(module: UnboundedModule, chains,
                        t_values=(1.0, 2.0, 4.0, 8.0, 16.0),
                        allow_large: bool = False) -> dict:
    """|Ch^n(tD)(c)| along growing t; decays for invertible D, monotone in
    the tail."""
    rows = []
    for c in chains:
        vals = []
        for t in t_values:
            phi = jlo_cochain(module, c.level, scale=t, strict_parity=False,
                              allow_large=allow_large)
            vals.append(abs(pair(phi, c)))
        tail = vals[len(vals) // 2:]
        tail_monotone = all(tail[i + 1] <= tail[i] * (1 + 1e-12)
                            for i in range(len(tail) - 1))
        rows.append({"level": c.level, "values": vals,
                     "decays": vals[-1] <= vals[0] or vals[-1] < 1e-12,
                     "tail_monotone": tail_monotone})
    return {"t_values": list(t_values), "rows": rows,
            "pass": all(r["decays"] and r["tail_monotone"] for r in rows)}


def d_alpha_transgression_check(module: UnboundedModule, n: int, alpha: float,
                                t: float, chains, h_values=(1e-2, 5e-3),
                                spec: QuadratureSpec = QuadratureSpec(),
                                allow_large: bool = False) -> dict:
    """alpha-derivative of the retracted family against its exact coboundary.

    With dD_a = -D_a ln|D|, the derivative of the family along alpha is the
    explicit transgression cochain, evaluated here on a level-m chain of the
    module's parity as

        (Ch^{m-1}(tD_a, t dD_a))(b c) + (Ch^{m+1}(tD_a, t dD_a))(B c)   [m+1 <= n-1]
        - [m = n]  int_0^t ( dCh^{n+1}_u(D_a; dD_a)
                             - dCh^{n+1}_u(u dD_a; D_a/u) )(B c) du,

    where dCh^{n+1}_u(ins; dir) is the mixed variation of Ch^{n+1}(u D_a)
    with ins inserted; the u-integrand is the same V <-> W exchange that
    level2_aux_check certifies.  The central alpha-difference of the family
    must then converge at Richardson slope 2.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ParameterError("alpha must lie in [0, 1]")
    if t == math.inf:
        raise ParameterError("use finite t for the finite-difference check")
    ctx = module.ctx
    parity = module_parity(module)
    if n % 2 != parity:
        raise ParameterError("n must match the module parity")
    ln_abs = _matrix_of(log_abs(module))

    def module_at(a):
        return UnboundedModule(ctx, d_alpha(module, a), module.generators,
                               module.grading)

    m0 = module_at(alpha)
    d0 = _matrix_of(m0.D)
    dd0 = -(d0 @ ln_abs)
    lam_min = _min_sq_eigenvalue(m0)
    tf = float(t)

    def rhs_on(c: Chain) -> tuple[complex, complex]:
        m = c.level
        val = 0.0 + 0.0j
        integral_term = 0.0 + 0.0j
        bc = boundary_b(c)
        if 0 <= m - 1 <= n - 1 and not bc.is_zero():
            val += pair(jlo_v_cochain(m0, tf * dd0, m - 1, scale=tf,
                                      allow_large=allow_large), bc)
        bB = boundary_B(c)
        if m + 1 <= n - 1:
            val += pair(jlo_v_cochain(m0, tf * dd0, m + 1, scale=tf,
                                      allow_large=allow_large), bB)
        if m == n:
            def f(u):
                c1 = jlo_variation_cochain(m0, d0, dd0, n + 1, scale=u,
                                           allow_large=allow_large)
                c2 = jlo_variation_cochain(m0, u * dd0, d0 / u, n + 1,
                                           scale=u, allow_large=allow_large)
                return pair(c1, bB) - pair(c2, bB)

            integral_term = -u_integral(f, t, n + 1, lam_min, spec)
            val += integral_term
        return val, integral_term

    def family_value(a, c: Chain) -> complex:
        return retracted_jlo(module_at(a), n, t, spec,
                             allow_large=allow_large).pair(c)

    rows = []
    for c in chains:
        rhs, integral_term = rhs_on(c)
        res = []
        for h in h_values:
            lhs = (family_value(alpha + h, c) - family_value(alpha - h, c)) / (2 * h)
            res.append(abs(lhs - rhs))
        rows.append({"level": c.level, "residuals": res,
                     "slope": _slope(res, list(h_values)),
                     "antisym_integral": abs(integral_term),
                     "scale": max(1.0, c.surrogate_norm())})
    return {"n": n, "alpha": alpha, "t": t, "rows": rows}
