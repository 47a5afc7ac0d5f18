"""Seeded random instances: contexts, graded/ungraded modules, chains, and
the multilinear test cochains used by the bicomplex identity suites."""

from __future__ import annotations

import math

import numpy as np

from .chains import Chain, Cochain, canonicalize
from .context import Grading, Operator, TraceContext, trace
from .fredholm import BoundedModule, UnboundedModule, to_bounded


def random_context(rng, max_blocks=2, max_dim=4) -> TraceContext:
    nb = int(rng.integers(1, max_blocks + 1))
    blocks = [(int(rng.integers(1, max_dim + 1)), float(rng.uniform(0.2, 2.0)))
              for _ in range(nb)]
    return TraceContext(blocks)


def random_matrix(rng, ctx: TraceContext, scale=1.0) -> np.ndarray:
    n = ctx.total_dim
    m = np.zeros((n, n), dtype=np.complex128)
    for s in ctx.slices:
        d = s.stop - s.start
        m[s, s] = scale * (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return m


def random_hermitian(rng, ctx: TraceContext, scale=1.0) -> np.ndarray:
    m = random_matrix(rng, ctx, scale)
    return (m + m.conj().T) / 2.0


def balanced_grading(ctx: TraceContext, rng=None) -> Grading:
    """Alternating +1/-1 within each block (as balanced as dimensions allow)."""
    signs = []
    for d, _ in ctx.blocks:
        signs.extend(1 if i % 2 == 0 else -1 for i in range(d))
    return Grading(ctx, np.array(signs, dtype=float))


def project_parity(ctx, grading: Grading, m: np.ndarray, parity: str) -> np.ndarray:
    chi = grading.signs
    conj = chi[:, None] * m * chi[None, :]
    sign = 1.0 if parity == "even" else -1.0
    return (m + sign * conj) / 2.0


def random_even(rng, ctx, grading, hermitian=False, scale=1.0) -> np.ndarray:
    m = random_hermitian(rng, ctx, scale) if hermitian else random_matrix(rng, ctx, scale)
    return project_parity(ctx, grading, m, "even")


def random_odd_hermitian(rng, ctx, grading, scale=1.0) -> np.ndarray:
    return project_parity(ctx, grading, random_hermitian(rng, ctx, scale), "odd")


def random_unitary(rng, ctx) -> np.ndarray:
    from scipy.linalg import expm

    h = random_hermitian(rng, ctx)
    return expm(1j * h)


def random_projection(rng, ctx, grading=None) -> np.ndarray:
    """Spectral projection of a random (even) Hermitian onto its top half."""
    h = random_hermitian(rng, ctx)
    if grading is not None:
        h = project_parity(ctx, grading, h, "even")
    p = np.zeros_like(h)
    for s in ctx.slices:
        vals, vecs = np.linalg.eigh(h[s, s])
        k = max(1, (s.stop - s.start) // 2)
        top = vecs[:, -k:]
        p[s, s] = top @ top.conj().T
    return p


def random_graded_module(rng, dim=4, weight=None, n_generators=2,
                         invertible=False) -> UnboundedModule:
    ctx = TraceContext([(dim, weight if weight is not None else float(rng.uniform(0.3, 1.5)))])
    grading = balanced_grading(ctx)
    d = random_odd_hermitian(rng, ctx, grading)
    if invertible:
        # push eigenvalues away from zero, keeping D odd: D odd means
        # D = [[0, T], [T*, 0]] in the chi eigenbasis; rescale via |D|
        vals, u = np.linalg.eigh(d)
        lift = np.sign(vals) * (np.abs(vals) + 0.5)
        lift[vals == 0] = 0.5
        d = (u * lift[None, :]) @ u.conj().T
        d = project_parity(ctx, grading, (d + d.conj().T) / 2, "odd")
        if np.min(np.abs(np.linalg.eigvalsh(d))) < 1e-6:
            d = d + 0.0  # graded lift can reintroduce small eigenvalues
    gens = [Operator(ctx, random_even(rng, ctx, grading, hermitian=True), "even")
            for _ in range(n_generators)]
    return UnboundedModule(ctx, Operator(ctx, d, "odd"), gens, grading)


def random_ungraded_module(rng, dim=3, weight=None, n_generators=2,
                           invertible=False) -> UnboundedModule:
    ctx = TraceContext([(dim, weight if weight is not None else float(rng.uniform(0.3, 1.5)))])
    d = random_hermitian(rng, ctx)
    if invertible:
        vals, u = np.linalg.eigh(d)
        lift = np.sign(vals) * (np.abs(vals) + 0.5)
        lift[vals == 0] = 0.5
        d = (u * lift[None, :]) @ u.conj().T
    gens = [Operator(ctx, random_hermitian(rng, ctx)) for _ in range(n_generators)]
    return UnboundedModule(ctx, Operator(ctx, d), gens, None)


def random_bounded_module(rng, dim=4, graded=True) -> BoundedModule:
    if graded:
        return to_bounded(random_graded_module(rng, dim=dim, invertible=True))
    return to_bounded(random_ungraded_module(rng, dim=dim, invertible=True))


def random_chain(rng, ctx, level, max_terms=3, grading=None, parity=None,
                 scale=1.0) -> Chain:
    """A canonicalized random chain; entries optionally parity-projected."""
    terms = []
    for _ in range(int(rng.integers(1, max_terms + 1))):
        coeff = complex(rng.normal(), rng.normal())
        entries = []
        for _ in range(level + 1):
            m = random_matrix(rng, ctx, scale)
            if grading is not None and parity is not None:
                m = project_parity(ctx, grading, m, parity)
            entries.append(m)
        terms.append((coeff, entries))
    return canonicalize(Chain(ctx, level, terms))


def module_chain(rng, module, level, max_terms=3, scale=1.0) -> Chain:
    """Random chain with entries of the parity the module's characters expect
    (even when graded, arbitrary otherwise)."""
    parity = "even" if module.grading is not None else None
    return random_chain(rng, module.ctx, level, max_terms, module.grading,
                        parity, scale)


def random_test_cochain(rng, ctx, levels, scale=1.0, reduced=False) -> Cochain:
    """A fixed multilinear functional (a_0,...,a_n) -> prod_j tau(R_j a_j)
    with seeded random R_j per level; independent of every character
    implementation, which is the point of using it in bicomplex checks.

    With reduced=True the slot->value maps for j >= 1 subtract the scalar
    part first (tau(R (a - tau(a)/tau(1)))), making the functional a genuine
    cochain on the quotient: it vanishes on scalar entries in slots >= 1,
    which closedness checks of K-theory chains require.
    """
    rs = {n: [random_matrix(rng, ctx, scale) for _ in range(n + 1)]
          for n in levels}
    tau_one = ctx.trace_of_identity()

    def eval_term(entries):
        r = rs.get(len(entries) - 1)
        if r is None:
            return 0.0
        val = 1.0 + 0.0j
        for j, (rj, aj) in enumerate(zip(r, entries)):
            a = np.asarray(aj)
            factor = trace(ctx, rj @ a)
            if reduced and j >= 1:
                factor -= (trace(ctx, a) / tau_one) * trace(ctx, rj)
            val *= factor
        return val

    tau1 = ctx.trace_of_identity()

    def hint(level):
        r = rs.get(level)
        if r is None:
            return 0.0
        return math.prod(
            float(np.linalg.norm(rj, 2)) * tau1 for rj in r
        )

    return Cochain(eval_term, frozenset(levels), "test cochain", scale_hint=hint)
