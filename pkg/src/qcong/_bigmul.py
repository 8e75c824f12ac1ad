"""Kronecker-substitution products mod p.

Both operands are packed into a single big integer with fixed-width byte
slots wide enough that no slot ever carries into its neighbour, multiplied
once, and unpacked. Exact integer arithmetic throughout; GMP does the heavy
lifting when gmpy2 is importable.
"""

from __future__ import annotations

import numpy as np

try:
    import gmpy2

    _to_big = gmpy2.mpz
except ImportError:  # pragma: no cover - exercised only without gmpy2
    gmpy2 = None
    _to_big = int


def _slot_bytes(n_terms: int, p: int) -> int:
    bound = n_terms * (p - 1) ** 2
    return max(1, (bound.bit_length() + 7) // 8)


def _pack(a: np.ndarray, width: int):
    n = a.shape[0]
    raw = np.ascontiguousarray(a, dtype="<u8").view(np.uint8).reshape(n, 8)
    if width == 8:
        buf = raw
    else:
        buf = np.zeros((n, width), dtype=np.uint8)
        k = min(width, 8)
        buf[:, :k] = raw[:, :k]
    return _to_big(int.from_bytes(buf.tobytes(), "little"))


def _unpack(x, n: int, width: int, p: int) -> np.ndarray:
    nbytes = n * width
    data = int(x).to_bytes(max(nbytes, (int(x).bit_length() + 7) // 8), "little")
    buf = np.frombuffer(data[:nbytes], dtype=np.uint8).reshape(n, width)
    if width <= 8:
        wide = np.zeros((n, 8), dtype=np.uint8)
        wide[:, :width] = buf
        vals = wide.view("<u8").reshape(n)
        return (vals % np.uint64(p)).astype(np.int64)
    lo = np.ascontiguousarray(buf[:, :8]).view("<u8").reshape(n) % np.uint64(p)
    out = lo.astype(object)
    scale = 1
    for start in range(8, width, 8):
        scale = scale * (1 << 64) % p
        chunk = np.zeros((n, 8), dtype=np.uint8)
        stop = min(start + 8, width)
        chunk[:, : stop - start] = buf[:, start:stop]
        part = chunk.view("<u8").reshape(n) % np.uint64(p)
        out = out + part.astype(object) * scale
    return np.array([int(v) % p for v in out], dtype=np.int64)


def kron_mul(a: np.ndarray, b: np.ndarray, p: int, L: int) -> np.ndarray:
    """Truncated product of two reduced int64 arrays, first L coefficients."""
    a = a[:L]
    b = b[:L]
    width = _slot_bytes(min(a.shape[0], b.shape[0]), p)
    A = _pack(a, width)
    if b is a:
        C = A * A
    else:
        C = A * _pack(b, width)
    return _unpack(C, L, width, p)


def kron_square(a: np.ndarray, p: int, L: int) -> np.ndarray:
    a = a[:L]
    width = _slot_bytes(a.shape[0], p)
    A = _pack(a, width)
    return _unpack(A * A, L, width, p)
