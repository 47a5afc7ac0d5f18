"""Chains, the (b, B) boundary operators, and the cochain pairing.

A level-n chain is a linear combination of elementary tensors
(a_0, ..., a_n) of block-diagonal matrices over one shared context.  Slots
j >= 1 live in the quotient by scalars, realized numerically by
``canonicalize``: terms with a scalar entry in a slot >= 1 are dropped.

The boundary formulas, acting on one elementary tensor:

    b(a_0,...,a_n) = sum_{j=0}^{n-1} (-1)^j (a_0,...,a_j a_{j+1},...,a_n)
                     + (-1)^n (a_n a_0, a_1, ..., a_{n-1})
    B(a_0,...,a_n) = sum_{j=0}^{n}   (-1)^{nj} (1, a_j,...,a_n,a_0,...,a_{j-1})

together with b^2 = B^2 = bB + Bb = 0 on canonicalized chains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma

from .context import TraceContext, op_norm, trace
from .errors import LevelError, StructuralError

MERGE_ATOL = 1e-12
SCALAR_SLOT_RTOL = 1e-12
COEFF_DROP_RTOL = 1e-15


def _entries_tuple(ctx: TraceContext, entries):
    out = []
    for e in entries:
        m = ctx.check_matrix(np.asarray(getattr(e, "matrix", e), dtype=np.complex128),
                             what="chain entry")
        m = m.copy()
        m.setflags(write=False)
        out.append(m)
    return tuple(out)


@dataclass(frozen=True)
class Chain:
    """A formal complex combination of elementary tensors of one level."""

    ctx: TraceContext
    level: int
    terms: tuple[tuple[complex, tuple[np.ndarray, ...]], ...] = field(repr=False)

    def __init__(self, ctx, level, terms=()):
        level = int(level)
        if level < 0:
            raise StructuralError("chain level must be >= 0")
        packed = []
        for coeff, entries in terms:
            entries = _entries_tuple(ctx, entries)
            if len(entries) != level + 1:
                raise StructuralError(
                    f"level-{level} term needs {level + 1} entries, got {len(entries)}"
                )
            packed.append((complex(coeff), entries))
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "level", level)
        object.__setattr__(self, "terms", tuple(packed))

    @classmethod
    def zero(cls, ctx, level) -> "Chain":
        return cls(ctx, level, ())

    @classmethod
    def elementary(cls, ctx, entries, coeff=1.0) -> "Chain":
        entries = tuple(entries)
        return cls(ctx, len(entries) - 1, [(coeff, entries)])

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "Chain") -> "Chain":
        if self.ctx is not other.ctx and self.ctx != other.ctx:
            raise StructuralError("cannot add chains over different contexts")
        if self.level != other.level:
            raise StructuralError("cannot add chains of different levels")
        return Chain(self.ctx, self.level, self.terms + other.terms)

    def scaled(self, z) -> "Chain":
        return Chain(self.ctx, self.level,
                     [(complex(z) * c, e) for c, e in self.terms])

    def surrogate_norm(self) -> float:
        """sum |coeff| * prod ||a_j||, the computable stand-in for ||.||_pi."""
        return math.fsum(
            abs(c) * math.prod(op_norm(e) for e in entries)
            for c, entries in self.terms
        )


def _is_scalar_entry(ctx: TraceContext, m: np.ndarray) -> bool:
    lam = trace(ctx, m) / ctx.trace_of_identity()
    diff = m - lam * np.eye(ctx.total_dim)
    # Frobenius pre-check: it dominates the operator norm, so a large value
    # rules "not scalar" without an SVD
    fro = float(np.linalg.norm(diff))
    if fro > SCALAR_SLOT_RTOL * max(1.0, float(np.linalg.norm(m))) * \
            math.sqrt(m.shape[0]):
        return False
    return op_norm(diff) <= SCALAR_SLOT_RTOL * max(1.0, op_norm(m))


def canonicalize(c: Chain) -> Chain:
    """Quotient by scalars in slots >= 1, merge equal terms, drop dust.

    Merging keys on entries rounded at the 1e-12 scale, so bitwise-equal and
    near-equal duplicates combine; borderline pairs that round apart simply
    stay separate, which only costs term count, never correctness.
    """
    kept = []
    for coeff, entries in c.terms:
        if coeff == 0:
            continue
        if any(_is_scalar_entry(c.ctx, e) for e in entries[1:]):
            continue
        kept.append((coeff, entries))
    # merge: coarse hash buckets (1e-6 grid) refined by exact 1e-12 comparison,
    # so equal-entry terms combine while boundary-straddling keys stay cheap
    buckets: dict = {}
    order: list = []
    for coeff, entries in kept:
        # + 0.0 normalizes -0.0 so signed zeros hash identically
        key = tuple((np.round(e, 6) + 0.0).tobytes() for e in entries)
        hit = None
        for slot in buckets.setdefault(key, []):
            if all(np.allclose(a, b, rtol=0.0, atol=MERGE_ATOL)
                   for a, b in zip(slot[1], entries)):
                hit = slot
                break
        if hit is None:
            slot = [coeff, entries]
            buckets[key].append(slot)
            order.append(slot)
        else:
            hit[0] += coeff
    if kept:
        # drop scale from the pre-merge coefficients: full cancellations must
        # not rescue themselves by shrinking the maximum
        cmax = max(abs(co) for co, _ in kept)
        order = [t for t in order if abs(t[0]) > COEFF_DROP_RTOL * cmax]
    return Chain(c.ctx, c.level, [(co, en) for co, en in order])


def boundary_b(c: Chain) -> Chain:
    """Hochschild boundary; level 0 maps to the zero chain by convention."""
    if c.level == 0:
        return Chain.zero(c.ctx, 0)
    n = c.level
    out = []
    for coeff, a in c.terms:
        for j in range(n):
            merged = a[:j] + (a[j] @ a[j + 1],) + a[j + 2:]
            out.append((coeff * (-1) ** j, merged))
        out.append((coeff * (-1) ** n, (a[n] @ a[0],) + a[1:n]))
    return canonicalize(Chain(c.ctx, n - 1, out))


def boundary_B(c: Chain) -> Chain:
    """Connes boundary; output is canonicalized."""
    n = c.level
    one = np.eye(c.ctx.total_dim, dtype=np.complex128)
    out = []
    for coeff, a in c.terms:
        for j in range(n + 1):
            rotated = a[j:] + a[:j]
            out.append((coeff * (-1) ** (n * j), (one,) + rotated))
    return canonicalize(Chain(c.ctx, n + 1, out))


class Cochain:
    """A level-indexed linear functional on chains.

    ``eval_term(entries)`` evaluates the functional on one elementary tensor;
    linearity over terms is supplied by ``pair``.  ``supported_levels`` is a
    set of levels, or 'even' / 'odd' / 'all'.
    """

    def __init__(self, eval_term, supported_levels="all", name="", scale_hint=None):
        self._eval_term = eval_term
        self.supported_levels = (
            frozenset(supported_levels)
            if not isinstance(supported_levels, str)
            else supported_levels
        )
        self.name = name
        # scale_hint(level) bounds |eval_term| / prod ||a_j||; used for
        # residual normalization in identity checks.
        self.scale_hint = scale_hint

    def supports(self, level: int) -> bool:
        s = self.supported_levels
        if isinstance(s, str):
            return s == "all" or (s == "even") == (level % 2 == 0)
        return level in s

    def eval_term(self, entries):
        return complex(self._eval_term(entries))

    @classmethod
    def zero(cls, supported_levels="all", name="zero"):
        return cls(lambda entries: 0.0, supported_levels, name, scale_hint=lambda n: 0.0)


def pair(phi: Cochain, c: Chain) -> complex:
    """(phi, c) = sum_terms coeff * phi(entries)."""
    if not phi.supports(c.level):
        raise LevelError(
            f"cochain {phi.name or '<anonymous>'} does not support level {c.level}"
        )
    total = complex(0.0)
    for coeff, entries in c.terms:
        total += coeff * phi.eval_term(entries)
    return total


def pair_scale(phi: Cochain, c: Chain) -> float:
    """A stable magnitude against which pairing residuals are measured."""
    hint = phi.scale_hint(c.level) if phi.scale_hint is not None else 1.0
    return max(1.0, hint) * max(1.0, c.surrogate_norm())


def growth_report(chains, lam: float) -> dict:
    """Entire-growth diagnostic sup_n ( sigma_n * lam^n / Gamma(n/2) ).

    sigma_n is the projective-norm surrogate of the level-n chain; 1/Gamma(0)
    is taken as 0, so level 0 never dominates.
    """
    if isinstance(chains, dict):
        items = sorted(chains.items())
    else:
        items = [(c.level, c) for c in chains]
    per_level = []
    for n, c in items:
        sigma = c.surrogate_norm()
        if n == 0:
            value = 0.0
        else:
            value = sigma * lam ** n / float(gamma(n / 2.0))
        per_level.append({"level": n, "surrogate_norm": sigma, "value": value})
    sup = max((row["value"] for row in per_level), default=0.0)
    return {"lambda": lam, "sup": sup, "per_level": per_level}
