"""Pure-numpy fallback for the heat-bracket contraction kernel.

Same contract as the compiled ``indexbench._kernels``: given per-index
weights w, the cyclic factor stack G_0..G_n (already rotated into the
eigenbasis of D), and the divided-difference table indexed by multiset rank,
return

    sum over (i_0,...,i_n) of
        w[i_0] * G_0[i_0,i_1] * ... * G_n[i_n,i_0] * dd[rank(sorted tuple)].

The fallback materializes d^(n+1)-sized tensors, chunking over the leading
index when that would get large.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

_CHUNK_LIMIT = 2_000_000  # complex entries per materialized tensor


def _ranks(idx: np.ndarray, binom: np.ndarray) -> np.ndarray:
    """Multiset ranks for an (m, K) array of index tuples (columns)."""
    s = np.sort(idx, axis=0)
    m = idx.shape[0]
    r = np.zeros(idx.shape[1], dtype=np.int64)
    for k in range(m):
        r += binom[s[k] + k, k + 1]
    return r


def bracket_sum(w, mats, dd, binom):
    w = np.asarray(w, dtype=np.float64)
    mats = np.asarray(mats, dtype=np.complex128)
    dd = np.asarray(dd, dtype=np.complex128)
    binom = np.asarray(binom, dtype=np.int64)
    m = mats.shape[0]  # number of factors = n + 1
    d = mats.shape[1]
    if m == 1:
        # single factor: sum_i w_i G[i, i] * dd[rank(i)]
        r = _ranks(np.arange(d, dtype=np.int64)[None, :], binom)
        return complex(np.sum(w * np.diagonal(mats[0]) * dd[r]))

    if d ** m <= _CHUNK_LIMIT:
        # full tensor: P[i0,...,i_{m-1}] = w G0 G1 ... G_{m-2}; then close.
        prod = w[:, None] * mats[0]
        for j in range(1, m - 1):
            prod = prod[..., :, None] * mats[j]
        # prod axes: (i0, i1, ..., i_{m-1}); multiply G_{m-1}[i_{m-1}, i0]
        closer = np.moveaxis(
            np.broadcast_to(mats[m - 1].T, (1,) * (m - 2) + (d, d)), -2, 0
        )  # (i0, 1...1, i_{m-1})
        prod = prod * closer
        idx = np.indices((d,) * m).reshape(m, -1)
        vals = dd[_ranks(idx, binom)]
        return complex(np.sum(prod.reshape(-1) * vals))

    # chunk over i0 to bound memory
    total = 0.0 + 0.0j
    tail_idx = np.indices((d,) * (m - 1)).reshape(m - 1, -1)
    for i0 in range(d):
        prod = w[i0] * mats[0][i0]  # (i1,)
        for j in range(1, m - 1):
            prod = prod[..., :, None] * mats[j]
        prod = prod * np.broadcast_to(
            mats[m - 1][:, i0], (1,) * (m - 2) + (d,)
        )
        idx = np.vstack([np.full(tail_idx.shape[1], i0, dtype=np.int64), tail_idx])
        vals = dd[_ranks(idx, binom)]
        total += np.sum(prod.reshape(-1) * vals)
    return complex(total)
