"""theta and U_m operators, Eisenstein series, and the level-one filtration engine."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

from qcong.eta import FractionalPowerError, QExpansion, sturm_bound
from qcong.series import IntSeries, ModSeries, PrimeModulus, as_modulus, mul


def theta(f):
    """q d/dq: a(n) -> n a(n). QExpansions must carry an integral q-power."""
    if isinstance(f, QExpansion):
        if f.offset24 % 24:
            raise FractionalPowerError("theta needs integral powers of q")
        shift = f.offset24 // 24
        return QExpansion(f.offset24, _theta_series(f.series, shift))
    return _theta_series(f, 0)


def _theta_series(f, shift: int):
    if isinstance(f, ModSeries):
        p = f.ell
        n = (np.arange(f.trunc, dtype=np.int64) + shift) % p
        return ModSeries._wrap((n * f.coeffs) % p, f.modulus)
    return IntSeries((n + shift) * c for n, c in enumerate(f.coeffs))


def u_op(f, m: int):
    """Sum a(n) q^n  ->  sum a(m n) q^n, keeping every known coefficient."""
    if m < 1:
        raise ValueError("U_m needs m >= 1")
    if isinstance(f, QExpansion):
        if f.offset24 % 24 or f.offset24 < 0:
            raise FractionalPowerError("U_m needs a plain q-series")
        f = f.to_series()
    if isinstance(f, ModSeries):
        return ModSeries._wrap(f.coeffs[::m].copy(), f.modulus)
    return IntSeries(f.coeffs[::m])


def theta_power(f, i: int):
    """theta^i f computed coefficientwise (n^i a(n))."""
    if isinstance(f, ModSeries):
        p = f.ell
        n = np.arange(f.trunc, dtype=np.int64) % p
        factor = np.array([pow(int(x), i, p) for x in range(p)], dtype=np.int64)[n]
        return ModSeries._wrap((factor * f.coeffs) % p, f.modulus)
    return IntSeries(n**i * c for n, c in enumerate(f.coeffs))


# -- Bernoulli numbers and Eisenstein series --------------------------------


@lru_cache(maxsize=None)
def _bernoulli_upto(k: int) -> tuple[Fraction, ...]:
    table = [Fraction(1)]
    for m in range(1, k + 1):
        s = sum(comb(m + 1, j) * table[j] for j in range(m))
        table.append(-s / (m + 1))
    return tuple(table)


def bernoulli(k: int) -> Fraction:
    """B_k from sum_{j=0}^{k} C(k+1, j) B_j = 0, B_0 = 1 (so B_1 = -1/2)."""
    if k < 0:
        raise ValueError("Bernoulli index must be non-negative")
    return _bernoulli_upto(k)[k]


@dataclass(frozen=True)
class EisensteinSeries:
    k: int
    series: QExpansion

    def __post_init__(self):
        if self.series.offset24 != 0 or self.series.series[0] != 1:
            raise ValueError("Eisenstein series must be a plain series with constant term 1")


class ReductionError(ValueError):
    """The normalising constant of E_k is not integral at ell."""


def eisenstein_constant(k: int) -> Fraction:
    """-2k / B_k, the factor in front of sum sigma_{k-1}(n) q^n."""
    return Fraction(-2 * k) / bernoulli(k)


def _sigma_int(k1: int, L: int) -> list[int]:
    sig = [0] * L
    for d in range(1, L):
        dk = d**k1
        for n in range(d, L, d):
            sig[n] += dk
    return sig


def _sigma_mod(k1: int, L: int, p: int) -> np.ndarray:
    sig = np.zeros(L, dtype=np.int64)
    for d in range(1, L):
        sig[d::d] += pow(d, k1, p)
        if d % 1024 == 0:
            sig %= p
    return sig % p


def eisenstein(k: int, L: int, modulus=None) -> EisensteinSeries:
    """E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n; k = 2 gives the quasi-modular E_2."""
    if k < 2 or k % 2:
        raise ValueError("Eisenstein weight must be even and >= 2")
    c = eisenstein_constant(k)
    if modulus is None:
        if c.denominator != 1:
            raise ReductionError(f"E_{k} does not have integral coefficients")
        sig = _sigma_int(k - 1, L)
        coeffs = [1] + [int(c) * s for s in sig[1:]]
        return EisensteinSeries(k, QExpansion(0, IntSeries(coeffs)))
    mod = as_modulus(modulus)
    p = mod.ell
    if c.denominator % p == 0:
        raise ReductionError(f"2k/B_k for k={k} is not {p}-integral")
    c_mod = c.numerator % p * pow(c.denominator % p, -1, p) % p
    arr = (_sigma_mod(k - 1, L, p) * c_mod) % p
    arr[0] = 1
    return EisensteinSeries(k, QExpansion(0, ModSeries._wrap(arr, mod)))


def eisenstein_series(k: int, L: int, modulus=None):
    return eisenstein(k, L, modulus).series.series


def r_form(f: ModSeries, k: int, ell: int | None = None, L: int | None = None) -> ModSeries:
    """(theta f - (k/12) E2 f) E_{ell-1} + (k/12) E_{ell+1} f, evaluated in F_ell."""
    ell = f.ell if ell is None else int(ell)
    if ell != f.ell:
        raise ValueError(f"series is mod {f.ell}, asked for ell={ell}")
    if ell < 5:
        raise ValueError("r_form needs ell >= 5 so that 12 is invertible")
    L = f.trunc if L is None else L
    f = f.truncate(L)
    c = (k % ell) * pow(12, -1, ell) % ell
    e2 = eisenstein_series(2, L, ell)
    e_lo = eisenstein_series(ell - 1, L, ell)
    e_hi = eisenstein_series(ell + 1, L, ell)
    inner = theta(f) - mul(e2, f).scale(c)
    return mul(inner, e_lo) + mul(e_hi, f).scale(c)


# -- level one forms mod ell -------------------------------------------------


def level1_dim(k: int) -> int:
    if k < 0 or k % 2:
        return 0
    if k % 12 == 2:
        return k // 12
    return k // 12 + 1


def _monomial_exponents(k: int) -> list[tuple[int, int]]:
    out = []
    if k < 0 or k % 2:
        return out
    for b in range(k // 6 + 1):
        rest = k - 6 * b
        if rest % 4 == 0:
            out.append((rest // 4, b))
    return out


def level1_basis(k: int, ell, L: int) -> list[ModSeries]:
    """E4^a E6^b with 4a + 6b = k, reduced mod ell, ordered by increasing b."""
    mod = as_modulus(ell)
    exps = _monomial_exponents(k)
    if not exps:
        return []
    e4 = eisenstein_series(4, L, mod)
    e6 = eisenstein_series(6, L, mod)
    out = []
    for a, b in exps:
        m = ModSeries.one(L, mod)
        for _ in range(a):
            m = mul(m, e4)
        for _ in range(b):
            m = mul(m, e6)
        out.append(m)
    return out


def solve_mod(rows: list[list[int]], rhs: list[int], p: int):
    """Solve rows . x = rhs over F_p; returns one solution or None."""
    n_eq = len(rows)
    n_var = len(rows[0]) if rows else 0
    aug = [[x % p for x in row] + [r % p] for row, r in zip(rows, rhs)]
    pivots = []
    r = 0
    for col in range(n_var):
        piv = next((i for i in range(r, n_eq) if aug[i][col]), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = pow(aug[r][col], -1, p)
        aug[r] = [x * inv % p for x in aug[r]]
        for i in range(n_eq):
            if i != r and aug[i][col]:
                fac = aug[i][col]
                aug[i] = [(x - fac * y) % p for x, y in zip(aug[i], aug[r])]
        pivots.append(col)
        r += 1
        if r == n_eq:
            break
    if any(aug[i][n_var] for i in range(r, n_eq)):
        return None
    x = [0] * n_var
    for i, col in enumerate(pivots):
        x[col] = aug[i][n_var]
    return x


@dataclass(frozen=True)
class FiltrationResult:
    w: int
    witness_weight_chain: list[int] = field(default_factory=list)
    certified_up_to: int = 0
    coefficients: list[int] = field(default_factory=list)


class FiltrationError(ValueError):
    pass


def _member(f: ModSeries, k: int, n: int) -> list[int] | None:
    p = f.ell
    basis = level1_basis(k, p, n)
    target = f.coeffs[:n].tolist()
    if not basis:
        return [] if not any(target) else None
    rows = [[b.coeffs[i] for b in basis] for i in range(n)]
    return solve_mod([[int(x) for x in row] for row in rows], target, p)


def filtration_level1(f: ModSeries, k: int, ell=None) -> FiltrationResult:
    """Least weight k' = k - j(ell-1) >= 0 with f in the mod-ell reduction of M_{k'}(SL2(Z)).

    f must be the reduction of a weight-k level-one form. Under that premise
    the Sturm bound at weight k certifies every membership test; the check
    that f lies in weight k at all only sees those first coefficients.
    """
    p = f.ell if ell is None else as_modulus(ell).ell
    if p != f.ell:
        raise ValueError(f"series is mod {f.ell}, asked for ell={p}")
    if k < 0 or k % 2:
        raise FiltrationError(f"no nonzero level-one forms of weight {k}")
    if f.is_zero():
        raise FiltrationError("filtration of the zero form is undefined")
    need = sturm_bound(2 * k, 1) if k > 0 else 1
    if f.trunc < need:
        raise FiltrationError(f"need {need} coefficients, series has {f.trunc}")
    chain = list(range(k, -1, -(p - 1)))
    sols = {kk: _member(f, kk, need) for kk in chain}
    if sols[k] is None:
        raise FiltrationError(f"series is not a weight-{k} level-one form mod {p}")
    best = min(kk for kk, sol in sols.items() if sol is not None)
    best_coeffs = sols[best]
    return FiltrationResult(best, chain, need, best_coeffs)


@dataclass(frozen=True)
class ThetaCycle:
    ell: int
    weight: int
    filtrations: list[int]
    drop_indices: list[int]
    drop_values: list[int]


def theta_cycle(f: ModSeries, k: int, ell=None) -> ThetaCycle:
    """Filtrations of theta^i f for i = 0..ell-1 plus the drop data (i_j, s_j)."""
    p = f.ell if ell is None else as_modulus(ell).ell
    need = sturm_bound(2 * (k + (p + 1) * (p - 1)), 1)
    if f.trunc < need:
        raise FiltrationError(f"theta cycle needs {need} coefficients, series has {f.trunc}")
    ws = []
    g, kg = f, k
    for _ in range(p):
        ws.append(filtration_level1(g, kg).w)
        g = r_form(g, kg, p)
        kg += p + 1
    # theta^ell f == theta f mod ell
    ws_ext = ws + [ws[1]]
    drops = [i for i in range(p) if ws[i] % p == 0]
    s_vals = []
    for i in drops:
        num = ws_ext[i] + (p + 1) - ws_ext[i + 1]
        if num % (p - 1):
            raise FiltrationError("filtration jump is not a multiple of ell-1")
        s_vals.append(num // (p - 1))
    return ThetaCycle(p, k, ws, drops, s_vals)


__all__ = [
    "EisensteinSeries",
    "FiltrationError",
    "FiltrationResult",
    "PrimeModulus",
    "ReductionError",
    "ThetaCycle",
    "bernoulli",
    "eisenstein",
    "eisenstein_series",
    "filtration_level1",
    "level1_basis",
    "level1_dim",
    "r_form",
    "solve_mod",
    "theta",
    "theta_cycle",
    "theta_power",
    "u_op",
]
