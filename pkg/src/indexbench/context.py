"""Weighted-trace matrix algebras.

The ambient algebra is a finite direct sum of matrix factors
``N = M_{n_1} + ... + M_{n_B}`` carrying the trace

    tau(T) = sum_b  w_b * Tr(T_b),       w_b > 0,

so projections can have non-integral trace (the desk-scale realization of a
Type II trace).  Every operator handled here is block-diagonal with respect
to the context's blocks; that is the finite-dimensional form of affiliation.

All summations over blocks and indices run in a fixed order (block-major,
index-ascending) through ``math.fsum`` so results are bit-stable no matter
how callers parallelize around them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContextError, ParameterError, ValidationError

SELF_ADJOINT_RTOL = 1e-10
AFFILIATION_RTOL = 1e-12


def _as_complex_matrix(m) -> np.ndarray:
    a = np.array(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContextError(f"expected a square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class TraceContext:
    """An ordered list of (dimension, weight) blocks defining tau."""

    blocks: tuple[tuple[int, float], ...]

    def __init__(self, blocks):
        blocks = tuple((int(d), float(w)) for d, w in blocks)
        for d, w in blocks:
            if d < 1:
                raise ContextError(f"block dimension must be >= 1, got {d}")
            if not w > 0:
                raise ContextError(f"block weight must be > 0, got {w}")
        if not blocks:
            raise ContextError("a context needs at least one block")
        object.__setattr__(self, "blocks", blocks)

    @property
    def total_dim(self) -> int:
        return sum(d for d, _ in self.blocks)

    @property
    def slices(self) -> tuple[slice, ...]:
        out, start = [], 0
        for d, _ in self.blocks:
            out.append(slice(start, start + d))
            start += d
        return tuple(out)

    def weight_vector(self) -> np.ndarray:
        """Per-index weights: w_b repeated dim_b times, block-major."""
        return np.concatenate([np.full(d, w) for d, w in self.blocks])

    def trace_of_identity(self) -> float:
        return math.fsum(w * d for d, w in self.blocks)

    def check_matrix(self, m: np.ndarray, what: str = "operator") -> np.ndarray:
        m = _as_complex_matrix(m)
        n = self.total_dim
        if m.shape != (n, n):
            raise ContextError(
                f"{what} has shape {m.shape}, context expects {(n, n)}"
            )
        scale = max(1.0, float(np.max(np.abs(m))) if m.size else 0.0)
        mask = np.zeros((n, n), dtype=bool)
        for s in self.slices:
            mask[s, s] = True
        off = m[~mask]
        if off.size and np.max(np.abs(off)) > AFFILIATION_RTOL * scale:
            raise ContextError(
                f"{what} is not block-diagonal for this context "
                f"(max off-block entry {np.max(np.abs(off)):.3e})"
            )
        return m

    def inflate(self, n_copies: int) -> "TraceContext":
        """Context of M_N(N) with trace tau (x) Tr; blocks grow by a factor N."""
        if n_copies < 1:
            raise ParameterError("inflation factor must be >= 1")
        return TraceContext([(d * n_copies, w) for d, w in self.blocks])


def inflate_operator(m: np.ndarray, n_copies: int) -> np.ndarray:
    """T (x) 1_N in the index convention (hilbert index, copy index)."""
    return np.kron(np.asarray(m, dtype=np.complex128), np.eye(n_copies))


@dataclass(frozen=True)
class Operator:
    """A dense matrix affiliated with a context, with optional parity."""

    ctx: TraceContext
    matrix: np.ndarray = field(repr=False)
    parity: str | None = None  # 'even' | 'odd' | None

    def __init__(self, ctx, matrix, parity=None):
        if parity not in (None, "even", "odd"):
            raise ParameterError(f"parity must be 'even', 'odd' or None, got {parity!r}")
        m = ctx.check_matrix(matrix)
        m.setflags(write=False)
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "parity", parity)


@dataclass(frozen=True)
class Grading:
    """A diagonal self-adjoint unitary chi with chi^2 = 1."""

    ctx: TraceContext
    signs: np.ndarray = field(repr=False)

    def __init__(self, ctx, signs):
        s = np.asarray(signs, dtype=np.float64).reshape(-1)
        if s.shape[0] != ctx.total_dim:
            raise ContextError(
                f"grading has {s.shape[0]} signs, context dimension is {ctx.total_dim}"
            )
        if not np.all(np.abs(np.abs(s) - 1.0) < 1e-12):
            raise ValidationError("grading entries must be +1 or -1")
        s = np.sign(s)
        s.setflags(write=False)
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "signs", s)

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.signs).astype(np.complex128)

    def parity_residual(self, m: np.ndarray, parity: str) -> float:
        """|| chi m chi -+ m || relative to max(1, ||m||)."""
        sign = 1.0 if parity == "even" else -1.0
        conj = self.signs[:, None] * np.asarray(m) * self.signs[None, :]
        return float(np.linalg.norm(conj - sign * np.asarray(m), 2)) / max(
            1.0, op_norm(m)
        )


def _matrix_of(t) -> np.ndarray:
    return t.matrix if isinstance(t, Operator) else np.asarray(t, dtype=np.complex128)


def op_norm(m) -> float:
    """Operator (spectral) norm."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def is_self_adjoint(m, rtol: float = SELF_ADJOINT_RTOL) -> bool:
    m = _matrix_of(m)
    return op_norm(m - m.conj().T) <= rtol * max(1.0, op_norm(m))


def require_self_adjoint(m, what: str = "operator") -> np.ndarray:
    m = _matrix_of(m)
    if not is_self_adjoint(m):
        raise ValidationError(f"{what} is not self-adjoint within tolerance")
    return m


def trace(ctx: TraceContext, t) -> complex:
    """tau(T) = sum_b w_b * (diagonal sum of block b), compensated."""
    m = ctx.check_matrix(_matrix_of(t))
    re, im = [], []
    for (d, w), s in zip(ctx.blocks, ctx.slices):
        diag = np.diagonal(m[s, s])
        re.append(w * math.fsum(diag.real))
        im.append(w * math.fsum(diag.imag))
    return complex(math.fsum(re), math.fsum(im))


def block_eigh(ctx: TraceContext, m) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition per block, assembled block-major.

    This is the single spectral backend: heat semigroups, |D|^a, ln|D| and
    D|D|^-1 are all evaluated through it, so they share eigenvectors exactly.
    """
    m = ctx.check_matrix(_matrix_of(m))
    require_self_adjoint(m)
    vals = np.empty(ctx.total_dim)
    vecs = np.zeros((ctx.total_dim, ctx.total_dim), dtype=np.complex128)
    for s in ctx.slices:
        v, u = np.linalg.eigh(m[s, s])
        vals[s] = v
        vecs[s, s] = u
    return vals, vecs


def spectral_map(ctx: TraceContext, m, f) -> np.ndarray:
    """f(M) for self-adjoint block-diagonal M via block_eigh."""
    vals, u = block_eigh(ctx, m)
    return (u * f(vals)[None, :]) @ u.conj().T


def block_svdvals(ctx: TraceContext, m) -> list[np.ndarray]:
    """Singular values per block, each descending."""
    m = ctx.check_matrix(_matrix_of(m))
    return [np.linalg.svd(m[s, s], compute_uv=False) for s in ctx.slices]


def p_norm(ctx: TraceContext, t, p: float) -> float:
    """||T||_p = tau(|T|^p)^(1/p) from per-block singular values."""
    if not p > 0:
        raise ParameterError(f"p must be > 0, got {p}")
    parts = []
    for (d, w), sv in zip(ctx.blocks, block_svdvals(ctx, t)):
        parts.append(w * math.fsum(float(s) ** p for s in sv))
    total = math.fsum(parts)
    return float(total ** (1.0 / p))


@dataclass(frozen=True)
class SingularProfile:
    """The step function x -> mu_x(T), stored as descending (value, weight) steps.

    mu_x holds each value for a stretch of measure equal to its weight, so the
    weights add up to tau(1).  Zero singular values are kept: they carry the
    measure of the kernel.
    """

    steps: tuple[tuple[float, float], ...]

    def integral(self) -> float:
        """int_0^inf mu_x dx = weighted sum of singular values."""
        return math.fsum(v * w for v, w in self.steps)

    def sup(self) -> float:
        """lim_{x->0} mu_x, the operator norm."""
        return self.steps[0][0] if self.steps else 0.0

    def value_at(self, x: float) -> float:
        if x < 0:
            raise ParameterError("mu_x is defined for x >= 0")
        acc = 0.0
        for v, w in self.steps:
            acc += w
            if x < acc:
                return v
        return 0.0

    def total_weight(self) -> float:
        return math.fsum(w for _, w in self.steps)


def singular_profile(ctx: TraceContext, t) -> SingularProfile:
    """Generalized singular numbers: each singular value of block b weighs w_b.

    Equal values (within 1e-12 * ||T||) are merged across blocks by summing
    their weights, which keeps profiles canonical for comparisons.
    """
    pairs: list[tuple[float, float]] = []
    for (d, w), sv in zip(ctx.blocks, block_svdvals(ctx, t)):
        pairs.extend((float(s), w) for s in sv)
    pairs.sort(key=lambda vw: -vw[0])
    tol = 1e-12 * (pairs[0][0] if pairs else 0.0)
    merged: list[list[float]] = []
    for v, w in pairs:
        if merged and merged[-1][0] - v <= tol:
            merged[-1][1] += w
        else:
            merged.append([v, w])
    return SingularProfile(tuple((v, w) for v, w in merged))


def holder_check(ctx: TraceContext, t, s, p: float, q: float, r: float) -> dict:
    """Both sides of ||TS||_r <= ||T||_p ||S||_q for 1/p + 1/q = 1/r."""
    if min(p, q, r) <= 0:
        raise ParameterError("exponents must be positive")
    if abs(1.0 / p + 1.0 / q - 1.0 / r) > 1e-12:
        raise ParameterError(
            f"exponent mismatch: 1/{p} + 1/{q} != 1/{r}"
        )
    tm, sm = _matrix_of(t), _matrix_of(s)
    lhs = p_norm(ctx, tm @ sm, r)
    rhs = p_norm(ctx, tm, p) * p_norm(ctx, sm, q)
    return {"lhs": lhs, "rhs": rhs, "pass": lhs <= rhs * (1.0 + 1e-10)}


def heat_trace(ctx: TraceContext, d, t: float) -> float:
    """tau(e^{-t D^2}) by Hermitian eigendecomposition."""
    if not t > 0:
        raise ParameterError(f"t must be > 0, got {t}")
    vals, _ = block_eigh(ctx, d)
    w = ctx.weight_vector()
    return math.fsum(float(wi) * math.exp(-t * float(v) ** 2) for wi, v in zip(w, vals))


def theta_bound_constant(p: float, t: float) -> float:
    """sup_x (1+x^2)^{p/2} e^{-t x^2} = (p/(2e))^{p/2} t^{-p/2} e^t for t <= p/2."""
    return (p / (2 * math.e)) ** (p / 2) * t ** (-p / 2) * math.exp(t)


def summability_report(ctx: TraceContext, d, p: float, t_samples=None) -> dict:
    """tau((1+D^2)^{-p/2}) plus heat traces and the theta-summability bound.

    The bound checked at each sample t is
    tau(e^{-tD^2}) <= (p/(2e))^{p/2} t^{-p/2} e^t * tau((1+D^2)^{-p/2}).
    """
    if not p > 0:
        raise ParameterError(f"p must be > 0, got {p}")
    if t_samples is None:
        t_samples = [0.1 * k for k in range(1, 11)]
    vals, _ = block_eigh(ctx, d)
    w = ctx.weight_vector()
    p_value = math.fsum(
        float(wi) * (1.0 + float(v) ** 2) ** (-p / 2) for wi, v in zip(w, vals)
    )
    samples = []
    all_pass = True
    for t in t_samples:
        ht = heat_trace(ctx, d, t)
        bound = theta_bound_constant(p, t) * p_value
        ok = ht <= bound * (1.0 + 1e-10)
        all_pass = all_pass and ok
        samples.append({"t": t, "heat_trace": ht, "bound": bound, "pass": ok})
    return {
        "p": p,
        "p_value": p_value,
        "theta_samples": samples,
        "ptheta_bound_pass": all_pass,
        # tau-compactness is vacuous here: the whole algebra is the compact
        # ideal in finite dimension, so there is nothing to test.
        "tau_compactness": "vacuous (finite dimension)",
    }
