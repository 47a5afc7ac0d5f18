"""Heat-kernel simplex brackets.

The central object is

    <F_0,...,F_n>^n_D = int_{Delta_n} tau( chi F_0 e^{-t_1 D^2} F_1
                          e^{-(t_2-t_1) D^2} ... F_n e^{-(1-t_n) D^2} ) d^n t

over the ordered simplex 0 <= t_1 <= ... <= t_n <= 1, with chi the grading
when one is attached and absent otherwise.  Three independent evaluation
methods are provided:

* divided_difference -- diagonalize D, rotate the factors, and sum over index
  tuples (i_0,...,i_n):

      w_{i_0} * prod_j (F~_j)_{i_j i_{j+1}} * Dexp(l_{i_0},...,l_{i_n}),

  where l_i are the eigenvalues of (scale*D)^2 and Dexp is the simplex
  integral int_{Delta_n} exp(-sum_j s_j l_{i_j}) d^n s.  By Hermite-Genocchi
  this equals the divided difference of exp at the negated nodes, which is
  evaluated through the Opitz formula: the top-right entry of expm of the
  bidiagonal node matrix.  That route is tolerance-free and handles confluent
  nodes automatically.  Cost is O(d^(n+1)) index tuples; a flat-spectrum
  shortcut avoids the tuple sum when all eigenvalues of D^2 coincide.

* nested_quadrature -- adaptive 1-D quadrature nested over the simplex
  variables (practical for n <= 3); the independent oracle for the above.

* monte_carlo -- sorted-uniform sampling of the simplex, vectorized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm

from . import kernels
from .context import (
    Grading,
    Operator,
    TraceContext,
    _matrix_of,
    block_eigh,
    require_self_adjoint,
)
from .errors import CapError, ParameterError, ValidationError

DEFAULT_LEVEL_CAP = 6
DEFAULT_DIM_CAP = 64
CONFLUENT_RTOL = 1e-12


def binomial_table(rows: int, cols: int) -> np.ndarray:
    """Pascal table C(i, j) as int64, used for multiset ranking."""
    t = np.zeros((rows, cols), dtype=np.int64)
    t[:, 0] = 1
    for i in range(1, rows):
        for j in range(1, cols):
            t[i, j] = t[i - 1, j - 1] + t[i - 1, j]
    return t


def divided_diff_exp(nodes) -> complex:
    """int_{Delta_n} exp(-sum s_j x_j) d^n s for the given nodes x_0..x_n.

    Equals the divided difference of exp at (-x_0, ..., -x_n); computed as
    expm(Z)[0, n] with Z bidiagonal (Opitz), which is stable for confluent
    and nearly-confluent nodes.
    """
    x = np.asarray(nodes, dtype=np.float64)
    m = x.shape[0]
    if m == 1:
        return complex(math.exp(-x[0]))
    z = np.diag(-x) + np.diag(np.ones(m - 1), 1)
    return complex(expm(z)[0, m - 1])


@dataclass(frozen=True)
class HeatBracketRequest:
    """Inputs for one bracket evaluation; ``scale`` replaces D by scale*D."""

    D: Operator
    factors: tuple
    grading: Grading | None = None
    scale: float = 1.0
    method: str = "divided_difference"
    mc_samples: int = 100_000
    mc_seed: int = 0
    allow_large: bool = False


class PreparedBracket:
    """Eigendata of one D, reused across many bracket evaluations."""

    def __init__(self, ctx: TraceContext, D, grading: Grading | None = None,
                 level_cap: int = DEFAULT_LEVEL_CAP, dim_cap: int = DEFAULT_DIM_CAP):
        self.ctx = ctx
        m = ctx.check_matrix(_matrix_of(D), what="D")
        require_self_adjoint(m, "D")
        self.D = m
        self.grading = grading
        self.vals, self.U = block_eigh(ctx, m)
        self.w = ctx.weight_vector()
        self.d = ctx.total_dim
        self.level_cap = level_cap
        self.dim_cap = dim_cap
        self.chi = grading.matrix if grading is not None else None
        self._dd_cache: dict = {}

    # -- evaluation --------------------------------------------------------

    def value(self, factors, scale: float = 1.0, method: str = "divided_difference",
              mc_samples: int = 100_000, mc_seed: int = 0,
              allow_large: bool = False) -> complex:
        mats = [self.ctx.check_matrix(_matrix_of(f), what="bracket factor")
                for f in factors]
        n = len(mats) - 1
        if n < 0:
            raise ParameterError("a bracket needs at least one factor")
        if not allow_large and (n > self.level_cap or self.d > self.dim_cap):
            raise CapError(
                f"bracket level {n} / dimension {self.d} exceeds caps "
                f"({self.level_cap}, {self.dim_cap}); the tuple sum costs "
                f"O(d^(n+1)) -- pass allow_large=True to accept"
            )
        lam = (scale * self.vals) ** 2
        g0 = self.chi @ mats[0] if self.chi is not None else mats[0]
        if method == "divided_difference":
            return self._divided_difference(g0, mats[1:], lam, n)
        if method == "nested_quadrature":
            if n > 3:
                raise CapError("nested_quadrature is practical only for n <= 3")
            return self._nested_quadrature(g0, mats[1:], lam, n)
        if method == "monte_carlo":
            return self._monte_carlo(g0, mats[1:], lam, n, mc_samples, mc_seed)
        raise ParameterError(f"unknown method {method!r}")

    # -- divided differences -----------------------------------------------

    def _divided_difference(self, g0, rest, lam, n) -> complex:
        spread = float(lam.max() - lam.min()) if lam.size else 0.0
        if spread <= CONFLUENT_RTOL * max(1.0, float(lam.max()) if lam.size else 0.0):
            # flat spectrum of D^2: the simplex factor is scalar
            prod = g0
            for f in rest:
                prod = prod @ f
            tr = complex(np.sum(self.w * np.diagonal(prod)))
            return tr * math.exp(-float(lam[0])) / math.factorial(n)
        uc = self.U.conj().T
        gt = np.empty((n + 1, self.d, self.d), dtype=np.complex128)
        gt[0] = uc @ g0 @ self.U
        for j, f in enumerate(rest, start=1):
            gt[j] = uc @ f @ self.U
        dd, binom = self._dd_table(lam, n)
        return kernels.bracket_sum(self.w, gt, dd, binom)

    def _dd_table(self, lam, n):
        key = (n, lam.tobytes())
        hit = self._dd_cache.get(key)
        if hit is not None:
            return hit
        m = n + 1
        binom = binomial_table(self.d + m + 1, m + 2)
        size = int(binom[self.d + m - 1, m])  # C(d+n, n+1)
        dd = np.empty(size, dtype=np.complex128)
        for combo in combinations_with_replacement(range(self.d), m):
            r = sum(int(binom[combo[k] + k, k + 1]) for k in range(m))
            dd[r] = divided_diff_exp(lam[list(combo)])
        if len(self._dd_cache) > 32:
            self._dd_cache.clear()
        self._dd_cache[key] = (dd, binom)
        return dd, binom

    # -- quadrature oracle ---------------------------------------------------

    def _chain_value(self, gt, exps, n) -> complex:
        """tr(W G~_0 E(s_0) G~_1 ... G~_n E(s_n)) with diagonal exponentials."""
        v = gt[0] * exps[0][None, :]
        for j in range(1, n + 1):
            v = (v @ gt[j]) * exps[j][None, :]
        return complex(np.sum(self.w * np.diagonal(v)))

    def _nested_quadrature(self, g0, rest, lam, n) -> complex:
        uc = self.U.conj().T
        gt = [uc @ g0 @ self.U] + [uc @ f @ self.U for f in rest]

        def f_of_t(ts):
            segs = np.diff([0.0, *ts, 1.0])
            exps = [np.exp(-s * lam) for s in segs]
            return self._chain_value(gt, exps, n)

        if n == 0:
            return f_of_t([])

        # real and imaginary parts integrate separately through scipy.quad
        def rec_part(part):
            def f1(ts):
                val = f_of_t(ts)
                return val.real if part == "re" else val.imag

            def go(j, upper, ts):
                if j == 0:
                    return quad(lambda t: f1([t, *ts]), 0.0, upper,
                                epsabs=1e-12, epsrel=1e-10, limit=80)[0]
                return quad(lambda t: go(j - 1, t, [t, *ts]), 0.0, upper,
                            epsabs=1e-11, epsrel=1e-9, limit=60)[0]

            return go(n - 1, 1.0, [])

        return complex(rec_part("re"), rec_part("im"))

    # -- Monte Carlo ---------------------------------------------------------

    def _monte_carlo(self, g0, rest, lam, n, samples, seed) -> complex:
        uc = self.U.conj().T
        gt = [uc @ g0 @ self.U] + [uc @ f @ self.U for f in rest]
        if n == 0:
            exps = [np.exp(-lam)]
            return self._chain_value(gt, exps, 0)
        rng = np.random.default_rng(seed)
        total = 0.0 + 0.0j
        done = 0
        chunk = max(1, min(samples, 20_000))
        d = self.d
        while done < samples:
            k = min(chunk, samples - done)
            ts = np.sort(rng.random((k, n)), axis=1)
            segs = np.diff(np.concatenate(
                [np.zeros((k, 1)), ts, np.ones((k, 1))], axis=1), axis=1)
            e = np.exp(-segs[:, :, None] * lam[None, None, :])  # (k, n+1, d)
            v = gt[0][None, :, :] * e[:, 0, None, :]
            for j in range(1, n + 1):
                v = (v @ gt[j]) * e[:, j, None, :]
            vals = np.einsum("i,kii->k", self.w, v)
            total += vals.sum()
            done += k
        return complex(total / samples / math.factorial(n))


def heat_bracket(req: HeatBracketRequest) -> complex:
    """One-shot evaluation; reuse a PreparedBracket for families."""
    pb = PreparedBracket(req.D.ctx, req.D, req.grading)
    return pb.value(req.factors, scale=req.scale, method=req.method,
                    mc_samples=req.mc_samples, mc_seed=req.mc_seed,
                    allow_large=req.allow_large)


# -- graded commutators and the bracket identities ---------------------------


def commutator(x, y) -> np.ndarray:
    xm, ym = _matrix_of(x), _matrix_of(y)
    return xm @ ym - ym @ xm


def graded_commutator(d, f, parity_f: str) -> np.ndarray:
    """[D, F] = DF - (-1)^{|F|} FD for odd D."""
    dm, fm = _matrix_of(d), _matrix_of(f)
    sign = 1.0 if parity_f == "even" else -1.0
    return dm @ fm - sign * (fm @ dm)


def _parities(factors, parities) -> list[str]:
    if parities is not None:
        out = list(parities)
    else:
        out = [getattr(f, "parity", None) for f in factors]
    if any(p not in ("even", "odd") for p in out):
        raise ValidationError(
            "this identity needs a declared parity for every factor"
        )
    return out


def lemma_misc_check(ctx, D, factors, variant: str, grading=None,
                     parities=None, j: int | None = None,
                     method: str = "divided_difference") -> dict:
    """Evaluate both sides of one of the four elementary bracket identities.

    variant:
      'cyclic'      graded cyclic permutation by j positions (default 1)
      'insert_ones' <F_0..F_n> = sum_j <F_0..F_j, 1, F_{j+1}..F_n>
      'bracket_D'   signed sum over [D, F_j] insertions vanishes
      'bracket_D2'  [D^2, F_j] contracts to a difference of merged brackets
                    (interior slots 1 <= j <= n-1)
    """
    pb = PreparedBracket(ctx, D, grading)
    mats = [_matrix_of(f) for f in factors]
    n = len(mats) - 1
    val = lambda fs: pb.value(fs, method=method)
    lhs = rhs = 0.0 + 0.0j

    if variant == "cyclic":
        degs = _parities(factors, parities) if grading is not None else ["even"] * (n + 1)
        jj = 1 if j is None else int(j)
        if not 0 <= jj <= n:
            raise ParameterError(f"cyclic shift must be in 0..{n}")
        odd = [1 if p == "odd" else 0 for p in degs]
        sign = (-1) ** (sum(odd[:jj]) * sum(odd[jj:]))
        lhs = val(mats)
        rhs = sign * val(mats[jj:] + mats[:jj])
    elif variant == "insert_ones":
        one = np.eye(ctx.total_dim, dtype=np.complex128)
        lhs = val(mats)
        rhs = sum(
            (val(mats[: k + 1] + [one] + mats[k + 1:]) for k in range(n + 1)),
            start=0.0 + 0.0j,
        )
    elif variant == "bracket_D":
        degs = _parities(factors, parities) if grading is not None else ["even"] * (n + 1)
        odd = [1 if p == "odd" else 0 for p in degs]
        acc = 0.0 + 0.0j
        for k in range(n + 1):
            sign = (-1) ** sum(odd[:k])
            repl = mats[:k] + [graded_commutator(pb.D, mats[k], degs[k])] + mats[k + 1:]
            acc += sign * val(repl)
        lhs, rhs = acc, 0.0 + 0.0j
    elif variant == "bracket_D2":
        if j is None or not 1 <= j <= n - 1:
            raise ParameterError("bracket_D2 needs an interior slot 1 <= j <= n-1")
        d2 = pb.D @ pb.D
        lhs = val(mats[:j] + [commutator(d2, mats[j])] + mats[j + 1:])
        rhs = val(mats[: j - 1] + [mats[j - 1] @ mats[j]] + mats[j + 1:]) - val(
            mats[:j] + [mats[j] @ mats[j + 1]] + mats[j + 2:]
        )
    else:
        raise ParameterError(f"unknown variant {variant!r}")

    scale = max(1.0, abs(lhs), abs(rhs))
    return {
        "variant": variant,
        "lhs": lhs,
        "rhs": rhs,
        "residual": abs(lhs - rhs),
        "scale": scale,
        "pass": abs(lhs - rhs) <= 1e-9 * scale,
    }
