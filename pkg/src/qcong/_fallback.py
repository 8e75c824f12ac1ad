"""Pure numpy implementations of the compiled kernels.

Signatures and results match ``qcong._kernels`` exactly; only speed differs.
"""

from __future__ import annotations

import numpy as np

from qcong._bigmul import kron_mul

# np.convolve on int64 is safe while every partial sum stays below 2**63.
_INT64_ROOM = (1 << 63) - 1


def mul_trunc(a, b, p, L):
    a = np.asarray(a[:L], dtype=np.int64)
    b = np.asarray(b[:L], dtype=np.int64)
    out = np.zeros(L, dtype=np.int64)
    if a.size == 0 or b.size == 0:
        return out
    if min(a.size, b.size) * (p - 1) ** 2 < _INT64_ROOM:
        full = np.convolve(a, b)[:L] % p
        out[: full.size] = full
        return out
    return kron_mul(a, b, p, L)


def sparse_mul(a, idx, val, p, L):
    a = np.asarray(a[:L], dtype=np.int64)
    out = np.zeros(L, dtype=np.int64)
    for i, v in zip(idx.tolist(), val.tolist()):
        if i >= L:
            break
        n = min(a.size, L - i)
        out[i : i + n] += v * a[:n]
        out[i : i + n] %= p
    return out


def sparse_div(a, idx, val, p, L, inv0):
    # Dense inverse of the sparse divisor by Newton iteration, then one product.
    s = np.zeros(L, dtype=np.int64)
    for i, v in zip(idx.tolist(), val.tolist()):
        if i >= L:
            break
        s[i] = v
    inv = newton_inverse(s, p, L, inv0)
    a = np.asarray(a[:L], dtype=np.int64)
    if a.size < L:
        a = np.concatenate([a, np.zeros(L - a.size, dtype=np.int64)])
    return kron_mul(a, inv, p, L)


def newton_inverse(s, p, L, inv0):
    g = np.array([inv0 % p], dtype=np.int64)
    n = 1
    while n < L:
        n = min(2 * n, L)
        sg = kron_mul(s[:n], g, p, n)
        # g <- g * (2 - s g)
        corr = (-sg) % p
        corr[0] = (corr[0] + 2) % p
        g = kron_mul(g, corr, p, n)
    return g[:L]
