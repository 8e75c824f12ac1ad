"""Eta-quotients: descriptors, q-expansions, cusp orders and Sturm bounds."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Mapping

import numpy as np

from qcong.series import (
    SPARSE_REPEAT_MAX,
    IntSeries,
    ModSeries,
    PrimeModulus,
    as_modulus,
    div_sparse,
    int_div_sparse,
    int_mul_sparse,
    invert,
    mul,
    mul_sparse,
    power,
    sparse_terms,
)


class EtaQuotient:
    """Formal product prod_d eta(d z)^{r_d} with nonzero integer exponents."""

    __slots__ = ("_factors",)

    def __init__(self, factors: Mapping[int, int] | None = None):
        clean: dict[int, int] = {}
        for d, r in (factors or {}).items():
            d, r = int(d), int(r)
            if d < 1:
                raise ValueError(f"eta scale must be positive, got {d}")
            clean[d] = clean.get(d, 0) + r
        object.__setattr__(self, "_factors", {d: r for d, r in sorted(clean.items()) if r})

    def __setattr__(self, name, value):
        raise AttributeError("EtaQuotient is immutable")

    @classmethod
    def from_pairs(cls, pairs) -> "EtaQuotient":
        acc: dict[int, int] = {}
        for d, r in pairs:
            acc[int(d)] = acc.get(int(d), 0) + int(r)
        return cls(acc)

    @property
    def factors(self) -> dict[int, int]:
        return dict(self._factors)

    def items(self):
        return self._factors.items()

    def __mul__(self, other: "EtaQuotient") -> "EtaQuotient":
        merged = dict(self._factors)
        for d, r in other.items():
            merged[d] = merged.get(d, 0) + r
        return EtaQuotient(merged)

    def __pow__(self, e: int) -> "EtaQuotient":
        return EtaQuotient({d: r * e for d, r in self.items()})

    def __truediv__(self, other: "EtaQuotient") -> "EtaQuotient":
        return self * other ** -1

    def __eq__(self, other):
        if not isinstance(other, EtaQuotient):
            return NotImplemented
        return self._factors == other._factors

    def __hash__(self):
        return hash(tuple(self._factors.items()))

    def __repr__(self):
        return f"EtaQuotient({self._factors})"

    def __str__(self):
        if not self._factors:
            return "1"
        return " * ".join(f"{d}^{r}" for d, r in sorted(self.items(), reverse=True))

    @property
    def offset24(self) -> int:
        return sum(d * r for d, r in self.items())

    def to_json(self) -> dict:
        return {"factors": [[d, r] for d, r in self.items()]}


def delta_power(e: int, d: int = 1) -> EtaQuotient:
    """Delta(d z)^e as an eta-quotient."""
    return EtaQuotient({d: 24 * e})


_FACTOR = re.compile(r"^(\d+)\^([+-]?\d+)$|^(\d+)$")


class EtaSyntaxError(ValueError):
    pass


def parse_eta(text: str) -> EtaQuotient:
    """Parse "3^1 * 2^-1 * 1^-1" (or the JSON form) into an EtaQuotient."""
    s = text.strip()
    if s.startswith("{"):
        try:
            data = json.loads(s)
            return EtaQuotient.from_pairs(data["factors"])
        except (ValueError, KeyError, TypeError) as exc:
            raise EtaSyntaxError(f"bad eta JSON: {exc}") from None
    if s in ("", "1"):
        return EtaQuotient()
    pairs = []
    for tok in s.replace("*", " ").split():
        m = _FACTOR.match(tok)
        if not m:
            raise EtaSyntaxError(f"cannot parse eta factor {tok!r} (expected scale^exponent)")
        if m.group(3) is not None:
            pairs.append((int(m.group(3)), 1))
        else:
            d, r = int(m.group(1)), int(m.group(2))
            if d < 1:
                raise EtaSyntaxError(f"eta scale must be positive in {tok!r}")
            pairs.append((d, r))
    return EtaQuotient.from_pairs(pairs)


class FractionalPowerError(ValueError):
    pass


@dataclass(frozen=True)
class QExpansion:
    """q^(offset24/24) * series."""

    offset24: int
    series: ModSeries | IntSeries

    @property
    def trunc(self) -> int:
        return self.series.trunc

    def is_integral(self) -> bool:
        return self.offset24 % 24 == 0 and self.offset24 >= 0

    def to_series(self):
        """Plain q-series; known through index trunc + offset - 1."""
        if self.offset24 % 24:
            raise FractionalPowerError(
                f"q^({self.offset24}/24) is not an integral power of q"
            )
        if self.offset24 < 0:
            raise FractionalPowerError(f"negative leading power q^{self.offset24 // 24}")
        return self.series.shift(self.offset24 // 24)

    def __mul__(self, other: "QExpansion") -> "QExpansion":
        return QExpansion(self.offset24 + other.offset24, mul(self.series, other.series))


@dataclass(frozen=True)
class ModularMeta:
    weight2: int
    level: int
    holo_at_cusps: bool


# -- expansions ------------------------------------------------------------


def pentagonal_terms(d: int, L: int) -> dict[int, int]:
    """Nonzero coefficients of prod_{n>=1} (1 - q^{d n}) below q^L."""
    terms = {0: 1}
    k = 1
    while True:
        a = d * k * (3 * k - 1) // 2
        if a >= L:
            break
        sign = -1 if k % 2 else 1
        terms[a] = sign
        b = d * k * (3 * k + 1) // 2
        if b < L:
            terms[b] = sign
        k += 1
    return terms


def eta_series(d: int, L: int, modulus=None) -> QExpansion:
    terms = pentagonal_terms(d, L)
    coeffs = [0] * L
    for i, v in terms.items():
        coeffs[i] = v
    s = IntSeries(coeffs) if modulus is None else ModSeries(coeffs, modulus)
    return QExpansion(d, s)


def _base_digits(e: int, p: int) -> list[int]:
    digits = []
    while e:
        e, r = divmod(e, p)
        digits.append(r)
    return digits


def _apply_factor_mod(acc: ModSeries, d: int, r: int) -> ModSeries:
    # prod(1 - q^{dn})^{ell^i} == prod(1 - q^{d ell^i n}) over F_ell, so the
    # exponent is split into base-ell digits and each digit applied at its scale.
    p = acc.ell
    L = acc.trunc
    scale = d
    for digit in _base_digits(abs(r), p):
        if scale >= L:
            break
        if digit:
            idx, val = sparse_terms(pentagonal_terms(scale, L), p, L)
            if digit <= SPARSE_REPEAT_MAX or idx.size <= 2:
                for _ in range(digit):
                    acc = mul_sparse(acc, idx, val) if r > 0 else div_sparse(acc, idx, val)
            else:
                base = ModSeries._wrap(_dense(idx, val, L), acc.modulus)
                block = power(base, digit)
                acc = mul(acc, block if r > 0 else invert(block))
        scale *= p
    return acc


def _dense(idx, val, L):
    arr = np.zeros(L, dtype=np.int64)
    arr[idx] = val
    return arr


def _apply_factor_int(acc: list[int], d: int, r: int, L: int) -> list[int]:
    terms = pentagonal_terms(d, L)
    for _ in range(abs(r)):
        acc = int_mul_sparse(acc, terms, L) if r > 0 else int_div_sparse(acc, terms, L)
    return acc


def expand(eq: EtaQuotient, L: int, modulus=None) -> QExpansion:
    """q-expansion of an eta-quotient to L terms (after the q^(offset24/24) prefactor)."""
    if L < 1:
        raise ValueError("truncation must be positive")
    if modulus is None:
        acc = [1] + [0] * (L - 1)
        for d, r in eq.items():
            acc = _apply_factor_int(acc, d, r, L)
        return QExpansion(eq.offset24, IntSeries(acc))
    mod = as_modulus(modulus)
    series = ModSeries.one(L, mod)
    for d, r in eq.items():
        series = _apply_factor_mod(series, d, r)
    return QExpansion(eq.offset24, series)


# -- modular metadata ------------------------------------------------------


def weight2(eq: EtaQuotient) -> int:
    return sum(r for _, r in eq.items())


def level_lcm(eq: EtaQuotient) -> int:
    n = 1
    for d, _ in eq.items():
        n = lcm(n, d)
    return n


def divisors(n: int) -> list[int]:
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i * i != n:
                large.append(n // i)
        i += 1
    return small + large[::-1]


def cusp_order(eq: EtaQuotient, N: int, c: int) -> Fraction:
    """Ligozat order of vanishing at cusps of Gamma0(N) with denominator c."""
    if N % c:
        raise ValueError(f"cusp denominator {c} does not divide level {N}")
    total = Fraction(0)
    for d, r in eq.items():
        total += Fraction(gcd(c, d) ** 2 * r, d)
    return Fraction(N, 24) * total / (gcd(c, N // c) * c)


def is_holo_at_cusps(eq: EtaQuotient, N: int) -> bool:
    if N % level_lcm(eq):
        raise ValueError(f"level {N} is not a multiple of the eta scales' lcm")
    return all(cusp_order(eq, N, c) >= 0 for c in divisors(N))


def meta(eq: EtaQuotient, N: int | None = None) -> ModularMeta:
    N = level_lcm(eq) if N is None else N
    return ModularMeta(weight2(eq), N, is_holo_at_cusps(eq, N))


def prime_factors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def index_gamma0(N: int) -> int:
    if N < 1:
        raise ValueError("level must be positive")
    idx = Fraction(N)
    for p in prime_factors(N):
        idx *= Fraction(p + 1, p)
    return int(idx)


def index_gamma1(N: int) -> int:
    """Index of Gamma1(N) in SL2(Z): N^2 prod_{p | N} (1 - 1/p^2)."""
    if N < 1:
        raise ValueError("level must be positive")
    idx = Fraction(N * N)
    for p in prime_factors(N):
        idx *= Fraction(p * p - 1, p * p)
    return int(idx)


def sturm_bound(weight2: int, N: int) -> int:
    """floor((weight2 / 24) * [SL2(Z) : Gamma0(N)]) + 1."""
    if weight2 <= 0:
        raise ValueError("Sturm bound needs a positive weight")
    return (weight2 * index_gamma0(N)) // 24 + 1


__all__ = [
    "EtaQuotient",
    "EtaSyntaxError",
    "FractionalPowerError",
    "ModularMeta",
    "PrimeModulus",
    "QExpansion",
    "cusp_order",
    "delta_power",
    "eta_series",
    "expand",
    "index_gamma0",
    "index_gamma1",
    "is_holo_at_cusps",
    "level_lcm",
    "meta",
    "parse_eta",
    "pentagonal_terms",
    "sturm_bound",
    "weight2",
]
