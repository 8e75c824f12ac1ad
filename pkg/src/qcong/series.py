"""Truncated power series over F_p and over the integers.

``ModSeries`` stores reduced coefficients in an int64 numpy array;
``IntSeries`` stores exact Python integers. Both are immutable and every
binary operation truncates to the shorter operand.
"""

from __future__ import annotations

import json
from functools import lru_cache
from math import comb, isqrt
from typing import Iterable, Sequence

import numpy as np

from qcong import kernels
from qcong._bigmul import kron_mul, kron_square

# Above this length products go through Kronecker substitution.
KRONECKER_CUTOFF = 192
# Sparse factors with at most this many repeats are applied term by term.
SPARSE_REPEAT_MAX = 8

MAX_MODULUS = 1 << 31


class ModulusMismatch(ValueError):
    pass


class NonUnitError(ValueError):
    """Raised when inverting a series whose constant term is not a unit."""


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for d in range(3, isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


class PrimeModulus:
    __slots__ = ("ell",)

    def __init__(self, ell: int):
        ell = int(ell)
        if not is_prime(ell):
            raise ValueError(f"modulus {ell} is not prime")
        if ell >= MAX_MODULUS:
            raise ValueError(f"modulus {ell} exceeds the supported range (< 2**31)")
        object.__setattr__(self, "ell", ell)

    def __setattr__(self, name, value):
        raise AttributeError("PrimeModulus is immutable")

    def __eq__(self, other):
        if isinstance(other, PrimeModulus):
            return self.ell == other.ell
        return NotImplemented

    def __hash__(self):
        return hash(("PrimeModulus", self.ell))

    def __int__(self):
        return self.ell

    def __repr__(self):
        return f"PrimeModulus({self.ell})"

    def inv(self, x: int) -> int:
        x %= self.ell
        if x == 0:
            raise ZeroDivisionError(f"0 has no inverse mod {self.ell}")
        return pow(x, -1, self.ell)


def as_modulus(m) -> PrimeModulus:
    return m if isinstance(m, PrimeModulus) else PrimeModulus(m)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class ModSeries:
    """Dense truncated series a(0) + a(1) q + ... + a(L-1) q^(L-1) over F_ell."""

    __slots__ = ("modulus", "coeffs")

    def __init__(self, coeffs, modulus):
        mod = as_modulus(modulus)
        p = mod.ell
        if isinstance(coeffs, np.ndarray) and coeffs.dtype.kind in "iu":
            arr = np.mod(coeffs.astype(np.int64, copy=True), p)
        else:
            arr = np.fromiter((int(c) % p for c in coeffs), dtype=np.int64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("a series needs at least one coefficient")
        object.__setattr__(self, "modulus", mod)
        object.__setattr__(self, "coeffs", _frozen(arr))

    @classmethod
    def _wrap(cls, arr: np.ndarray, modulus: PrimeModulus) -> "ModSeries":
        # arr is trusted: int64, reduced, owned by the new series.
        obj = cls.__new__(cls)
        object.__setattr__(obj, "modulus", modulus)
        object.__setattr__(obj, "coeffs", _frozen(arr))
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("ModSeries is immutable")

    @classmethod
    def one(cls, L: int, modulus) -> "ModSeries":
        arr = np.zeros(L, dtype=np.int64)
        arr[0] = 1
        return cls._wrap(arr, as_modulus(modulus))

    @classmethod
    def zero(cls, L: int, modulus) -> "ModSeries":
        return cls._wrap(np.zeros(L, dtype=np.int64), as_modulus(modulus))

    @property
    def ell(self) -> int:
        return self.modulus.ell

    @property
    def trunc(self) -> int:
        return self.coeffs.shape[0]

    def __len__(self):
        return self.trunc

    def __getitem__(self, n):
        if isinstance(n, slice):
            return self.coeffs[n].tolist()
        return int(self.coeffs[n])

    def tolist(self) -> list[int]:
        return self.coeffs.tolist()

    def truncate(self, L: int) -> "ModSeries":
        if L > self.trunc:
            raise ValueError(f"cannot extend a series of {self.trunc} terms to {L}")
        return ModSeries._wrap(self.coeffs[:L].copy(), self.modulus)

    def shift(self, k: int) -> "ModSeries":
        """Multiply by q^k (k >= 0); the known range grows by k."""
        arr = np.zeros(self.trunc + k, dtype=np.int64)
        arr[k:] = self.coeffs
        return ModSeries._wrap(arr, self.modulus)

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def valuation(self):
        nz = np.flatnonzero(self.coeffs)
        return int(nz[0]) if nz.size else None

    def scale(self, c: int) -> "ModSeries":
        return ModSeries._wrap((self.coeffs * (c % self.ell)) % self.ell, self.modulus)

    def __eq__(self, other):
        if not isinstance(other, ModSeries):
            return NotImplemented
        return (
            self.modulus == other.modulus
            and self.trunc == other.trunc
            and bool(np.array_equal(self.coeffs, other.coeffs))
        )

    __hash__ = None

    def __repr__(self):
        head = ", ".join(str(c) for c in self.coeffs[:8].tolist())
        more = ", ..." if self.trunc > 8 else ""
        return f"ModSeries([{head}{more}], ell={self.ell}, trunc={self.trunc})"

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __neg__(self):
        return ModSeries._wrap((-self.coeffs) % self.ell, self.modulus)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        return mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, e):
        return power(self, e)


class IntSeries:
    """Dense truncated series with exact integer coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[int]):
        c = tuple(int(x) for x in coeffs)
        if not c:
            raise ValueError("a series needs at least one coefficient")
        object.__setattr__(self, "coeffs", c)

    def __setattr__(self, name, value):
        raise AttributeError("IntSeries is immutable")

    @classmethod
    def one(cls, L: int) -> "IntSeries":
        return cls([1] + [0] * (L - 1))

    @property
    def trunc(self) -> int:
        return len(self.coeffs)

    def __len__(self):
        return self.trunc

    def __getitem__(self, n):
        if isinstance(n, slice):
            return list(self.coeffs[n])
        return self.coeffs[n]

    def tolist(self) -> list[int]:
        return list(self.coeffs)

    def truncate(self, L: int) -> "IntSeries":
        if L > self.trunc:
            raise ValueError(f"cannot extend a series of {self.trunc} terms to {L}")
        return IntSeries(self.coeffs[:L])

    def shift(self, k: int) -> "IntSeries":
        return IntSeries((0,) * k + self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def reduce(self, modulus) -> ModSeries:
        return ModSeries(self.coeffs, modulus)

    def __eq__(self, other):
        if not isinstance(other, IntSeries):
            return NotImplemented
        return self.coeffs == other.coeffs

    __hash__ = None

    def __repr__(self):
        head = ", ".join(str(c) for c in self.coeffs[:8])
        more = ", ..." if self.trunc > 8 else ""
        return f"IntSeries([{head}{more}], trunc={self.trunc})"

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __neg__(self):
        return IntSeries(-c for c in self.coeffs)

    def __mul__(self, other):
        if isinstance(other, int):
            return IntSeries(other * c for c in self.coeffs)
        return mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, int):
            return IntSeries(other * c for c in self.coeffs)
        return NotImplemented

    def __pow__(self, e):
        return power(self, e)


Series = ModSeries | IntSeries


def _check_pair(f, g):
    if isinstance(f, ModSeries) and isinstance(g, ModSeries):
        if f.modulus != g.modulus:
            raise ModulusMismatch(f"moduli differ: {f.ell} vs {g.ell}")
        return
    if isinstance(f, IntSeries) and isinstance(g, IntSeries):
        return
    raise TypeError(f"cannot combine {type(f).__name__} with {type(g).__name__}")


def add(f, g):
    _check_pair(f, g)
    L = min(f.trunc, g.trunc)
    if isinstance(f, ModSeries):
        return ModSeries._wrap((f.coeffs[:L] + g.coeffs[:L]) % f.ell, f.modulus)
    return IntSeries(a + b for a, b in zip(f.coeffs[:L], g.coeffs[:L]))


def sub(f, g):
    _check_pair(f, g)
    L = min(f.trunc, g.trunc)
    if isinstance(f, ModSeries):
        return ModSeries._wrap((f.coeffs[:L] - g.coeffs[:L]) % f.ell, f.modulus)
    return IntSeries(a - b for a, b in zip(f.coeffs[:L], g.coeffs[:L]))


def _mul_arrays(a: np.ndarray, b: np.ndarray, p: int, L: int) -> np.ndarray:
    if min(a.shape[0], b.shape[0], L) > KRONECKER_CUTOFF:
        if a is b:
            return kron_square(a, p, L)
        return kron_mul(a, b, p, L)
    return kernels.mul_trunc(a, b, p, L)


def mul(f, g):
    """Truncated product; the result has min(trunc_f, trunc_g) terms."""
    _check_pair(f, g)
    L = min(f.trunc, g.trunc)
    if isinstance(f, ModSeries):
        a = f.coeffs[:L]
        b = a if g is f else g.coeffs[:L]
        return ModSeries._wrap(_mul_arrays(a, b, f.ell, L), f.modulus)
    return IntSeries(_int_schoolbook(f.coeffs, g.coeffs, L))


def _int_schoolbook(a: Sequence[int], b: Sequence[int], L: int) -> list[int]:
    out = [0] * L
    for i in range(min(len(a), L)):
        ai = a[i]
        if ai:
            for j in range(min(len(b), L - i)):
                out[i + j] += ai * b[j]
    return out


def invert(f):
    """Multiplicative inverse up to truncation; needs a unit constant term."""
    if isinstance(f, ModSeries):
        p = f.ell
        if f.coeffs[0] % p == 0:
            raise NonUnitError("constant term is zero mod ell")
        inv0 = f.modulus.inv(int(f.coeffs[0]))
        L = f.trunc
        nz = np.flatnonzero(f.coeffs)
        if nz.size * 8 < L:
            # sparse divisor: run the division recurrence on 1
            one = np.zeros(L, dtype=np.int64)
            one[0] = 1
            idx = nz.astype(np.int64)
            return ModSeries._wrap(
                kernels.sparse_div(one, idx, f.coeffs[nz].copy(), p, L, inv0), f.modulus
            )
        return ModSeries._wrap(_newton_inverse(f.coeffs, p, L, inv0), f.modulus)
    c0 = f.coeffs[0]
    if c0 not in (1, -1):
        raise NonUnitError("constant term must be +-1 for an integral inverse")
    L = f.trunc
    a = f.coeffs
    g = [0] * L
    g[0] = c0
    for n in range(1, L):
        s = 0
        for k in range(1, n + 1):
            if a[k]:
                s += a[k] * g[n - k]
        g[n] = -s * c0
    return IntSeries(g)


def _newton_inverse(a: np.ndarray, p: int, L: int, inv0: int) -> np.ndarray:
    g = np.array([inv0], dtype=np.int64)
    n = 1
    while n < L:
        n = min(2 * n, L)
        sg = _mul_arrays(a[:n], g, p, n)
        corr = (-sg) % p
        corr[0] = (corr[0] + 2) % p
        g = _mul_arrays(g, corr, p, n)
    return g


def power(f, e: int):
    """f**e by binary exponentiation; f**0 is the constant 1."""
    if e < 0:
        raise ValueError("negative exponent; use invert(power(f, -e))")
    L = f.trunc
    result = ModSeries.one(L, f.modulus) if isinstance(f, ModSeries) else IntSeries.one(L)
    base = f
    first = True
    while e:
        if e & 1:
            result = base if first else mul(result, base)
            first = False
        e >>= 1
        if e:
            base = mul(base, base)
    return result


def binomial_factor(m: int, e: int, L: int) -> list[int]:
    """Exact coefficients of (1 - q^m)^e for e >= 0, truncated to L."""
    out = [0] * L
    for k in range(0, min(e, (L - 1) // m) + 1):
        out[k * m] = (-1) ** k * comb(e, k)
    return out


def sparse_factor_pow(m: int, e: int, L: int, modulus=None):
    """(1 - q^m)^e to L terms; negative e inverts the positive power."""
    if m < 1:
        raise ValueError("m must be positive")
    pos = binomial_factor(m, abs(e), L)
    if modulus is None:
        s = IntSeries(pos)
        return s if e >= 0 else invert(s)
    s = ModSeries(pos, modulus)
    return s if e >= 0 else invert(s)


# -- sparse helpers used by the eta expansion ------------------------------


def sparse_terms(coeffs: dict[int, int], p: int, L: int):
    """Sorted (idx, val) int64 arrays of a sparse series, zero terms dropped."""
    items = sorted((i, v % p) for i, v in coeffs.items() if i < L and v % p)
    idx = np.array([i for i, _ in items], dtype=np.int64)
    val = np.array([v for _, v in items], dtype=np.int64)
    return idx, val


def mul_sparse(f: ModSeries, idx: np.ndarray, val: np.ndarray) -> ModSeries:
    return ModSeries._wrap(kernels.sparse_mul(f.coeffs, idx, val, f.ell, f.trunc), f.modulus)


def div_sparse(f: ModSeries, idx: np.ndarray, val: np.ndarray) -> ModSeries:
    if idx.size == 0 or idx[0] != 0:
        raise NonUnitError("sparse divisor has no constant term")
    inv0 = f.modulus.inv(int(val[0]))
    return ModSeries._wrap(
        kernels.sparse_div(f.coeffs, idx, val, f.ell, f.trunc, inv0), f.modulus
    )


def int_mul_sparse(a: list[int], terms: dict[int, int], L: int) -> list[int]:
    out = [0] * L
    for i, v in sorted(terms.items()):
        if i >= L:
            break
        for n in range(i, L):
            out[n] += v * a[n - i]
    return out


def int_div_sparse(a: list[int], terms: dict[int, int], L: int) -> list[int]:
    c0 = terms.get(0)
    if c0 not in (1, -1):
        raise NonUnitError("sparse divisor must have constant term +-1")
    rest = sorted((i, v) for i, v in terms.items() if 0 < i < L)
    g = [0] * L
    for n in range(L):
        s = a[n] if n < len(a) else 0
        for i, v in rest:
            if i > n:
                break
            s -= v * g[n - i]
        g[n] = s * c0
    return g


# -- dump format -----------------------------------------------------------


def dump_text(f, offset24: int | None = None) -> str:
    """Tab-separated "n<TAB>a(n)" lines, optionally preceded by an offset header."""
    lines = []
    if offset24 is not None:
        lines.append(f"# offset24={offset24}")
    if isinstance(f, ModSeries):
        lines.append(f"# modulus={f.ell}")
    lines.extend(f"{n}\t{c}" for n, c in enumerate(f.tolist()))
    return "\n".join(lines) + "\n"


def dump_json(f) -> str:
    return json.dumps(f.tolist())


def load_text(text: str, modulus=None):
    coeffs: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            if modulus is None and line.startswith("# modulus="):
                modulus = int(line.split("=", 1)[1])
            continue
        n, c = line.split("\t")
        if int(n) != len(coeffs):
            raise ValueError(f"expected index {len(coeffs)}, got {n}")
        coeffs.append(int(c))
    return ModSeries(coeffs, modulus) if modulus is not None else IntSeries(coeffs)


def load_json(text: str, modulus=None):
    coeffs = json.loads(text)
    if not isinstance(coeffs, list) or not all(isinstance(c, int) for c in coeffs):
        raise ValueError("series JSON must be an array of integers")
    return ModSeries(coeffs, modulus) if modulus is not None else IntSeries(coeffs)
