"""Prime exclusion for Ramanujan congruences of prod (1-q^{lambda n}) / prod (1-q^{mu n}).

Builds the companion form F_ell = Delta^{ell^t} (prod Delta(mu z) / prod Delta(lambda z))^{delta},
checks theta F_ell is nonzero mod ell, transfers residues a -> b, and runs
the modular case arithmetic that rules out a congruence for large ell.
"""

from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from math import gcd, lcm

import numpy as np

from qcong.eta import EtaQuotient, QExpansion, expand, is_holo_at_cusps
from qcong.series import ModSeries, is_prime

T_CAP = 12

ASSUMPTIONS = (
    "w(F) not 0 mod ell, theta F nonzero mod ell and w(theta^m F) >= w(F) are taken "
    "from the theorems on filtrations of zero-free forms; they are not computed here"
)


@dataclass(frozen=True)
class QuotientProfile:
    lam: tuple[int, ...]
    mu: tuple[int, ...]
    r: int
    s: int
    u: int
    v: int
    N: int
    gamma: int

    @property
    def m(self) -> int:
        """Smallest part among lambda and mu."""
        return min(self.lam + self.mu)

    def eta_quotient(self) -> EtaQuotient:
        """prod eta(lambda z) / prod eta(mu z); its series part is f."""
        acc: Counter[int] = Counter()
        for d in self.lam:
            acc[d] += 1
        for d in self.mu:
            acc[d] -= 1
        return EtaQuotient(acc)

    def c_series(self, L: int, modulus=None):
        """c(0..L-1) of f = prod (1 - q^{lambda n}) / prod (1 - q^{mu n})."""
        return expand(self.eta_quotient(), L, modulus).series

    def to_json(self) -> dict:
        d = asdict(self)
        d["lambda"] = list(d.pop("lam"))
        d["mu"] = list(d["mu"])
        return d


def profile(lam, mu) -> QuotientProfile:
    lam = tuple(sorted((int(x) for x in lam), reverse=True))
    mu = tuple(sorted((int(x) for x in mu), reverse=True))
    if any(x < 1 for x in lam + mu):
        raise ValueError("parts must be positive integers")
    if not lam and not mu:
        raise ValueError("at least one part is required")
    common = set(lam) & set(mu)
    if common:
        raise ValueError(f"lambda and mu share parts {sorted(common)}; cancel them first")
    parts = lam + mu
    N = 1
    for x in parts:
        N = lcm(N, x)
    smallest = min(parts)
    return QuotientProfile(
        lam, mu, len(lam), len(mu), sum(lam), sum(mu), N, parts.count(smallest)
    )


def delta_ell(ell: int) -> int:
    num = ell * ell - 1
    if num % 24:
        raise ValueError(f"(ell^2 - 1)/24 is not integral for ell={ell}")
    return num // 24


def f_ell_quotient(prof: QuotientProfile, ell: int, t: int) -> EtaQuotient:
    d = delta_ell(ell)
    acc: Counter[int] = Counter({1: 24 * ell**t})
    for x in prof.mu:
        acc[x] += 24 * d
    for x in prof.lam:
        acc[x] -= 24 * d
    return EtaQuotient(acc)


def _check_ell(prof: QuotientProfile, ell: int):
    if ell < 5 or not is_prime(ell):
        raise ValueError(f"ell must be a prime >= 5, got {ell}")
    if prof.N % ell == 0:
        raise ValueError(f"ell={ell} divides the level N={prof.N}")


def minimal_t(prof: QuotientProfile, ell: int) -> int:
    """Least t >= 2 making F_ell holomorphic at every cusp of level N."""
    _check_ell(prof, ell)
    for t in range(2, T_CAP + 1):
        if is_holo_at_cusps(f_ell_quotient(prof, ell, t), prof.N):
            return t
    raise RuntimeError(f"no t <= {T_CAP} makes F_{ell} holomorphic; this is a bug")


@dataclass(frozen=True)
class FEllForm:
    ell: int
    t: int
    delta_ell: int
    weight2: int
    level: int
    expansion: QExpansion
    profile: QuotientProfile
    eta: EtaQuotient

    @property
    def weight(self) -> int:
        return self.weight2 // 2

    @property
    def leading_exponent(self) -> int:
        return self.expansion.offset24 // 24

    @property
    def series(self) -> ModSeries:
        """D(0), D(1), ... as a plain series."""
        return self.expansion.to_series()

    def meta(self) -> dict:
        return {
            "ell": self.ell,
            "t": self.t,
            "delta_ell": self.delta_ell,
            "weight2": self.weight2,
            "weight": self.weight,
            "level": self.level,
            "leading_exponent": self.leading_exponent,
            "eta": str(self.eta),
            "terms": self.series.trunc,
        }


def build_F_ell(prof: QuotientProfile, ell: int, L: int, t: int | None = None) -> FEllForm:
    """F_ell mod ell with D(n) known for 0 <= n < L (at least)."""
    t = minimal_t(prof, ell) if t is None else t
    eq = f_ell_quotient(prof, ell, t)
    d = delta_ell(ell)
    w2 = (ell * ell - 1) * (prof.s - prof.r) + 24 * ell**t
    if w2 != sum(r for _, r in eq.items()):
        raise AssertionError("weight of F_ell disagrees with its eta exponents")
    lead = eq.offset24 // 24
    exp = expand(eq, max(L - lead, 1), ell)
    return FEllForm(ell, t, d, w2, prof.N, exp, prof, eq)


class NoWitnessError(RuntimeError):
    pass


def theta_nonvanishing(F: FEllForm) -> int:
    """Least n with n D(n) != 0 mod ell, i.e. a coefficient witnessing theta F != 0."""
    D = F.series
    n = np.arange(D.trunc, dtype=np.int64) % F.ell
    hits = np.flatnonzero((n * D.coeffs) % F.ell)
    if not hits.size:
        raise NoWitnessError(f"theta F_{F.ell} vanishes through q^{D.trunc - 1}")
    return int(hits[0])


def transfer_residue(prof: QuotientProfile, ell: int, a: int) -> int:
    """b with 24 a == 24 b + (u - v) mod ell, in [0, ell)."""
    if ell in (2, 3):
        raise ValueError("24 is not invertible mod 2 or 3")
    return (a - pow(24, -1, ell) * (prof.u - prof.v)) % ell


def shifted_residue(prof: QuotientProfile, ell: int, a: int) -> int:
    """b = a - delta_ell (u - v) mod ell, the index shift produced by applying U_ell.

    Equivalent to 24 b == 24 a + (u - v); it agrees with transfer_residue
    exactly when u == v mod ell.
    """
    return (a - delta_ell(ell) * (prof.u - prof.v)) % ell


@dataclass(frozen=True)
class ResidueCheck:
    ell: int
    a: int
    b: int
    T: int
    c_vanishes: bool
    D_vanishes: bool
    c_counterexample: int | None
    D_counterexample: int | None
    b_shift: int
    D_shift_vanishes: bool
    D_shift_counterexample: int | None

    @property
    def agree(self) -> bool:
        return self.c_vanishes == self.D_vanishes

    @property
    def agree_shift(self) -> bool:
        return self.c_vanishes == self.D_shift_vanishes

    def to_json(self) -> dict:
        d = asdict(self)
        d["agree"] = self.agree
        d["agree_shift"] = self.agree_shift
        return d


def _first_nonzero(coeffs: np.ndarray, start: int, step: int, count: int) -> int | None:
    sub = coeffs[start : start + step * count : step]
    if sub.size < count:
        raise ValueError("series too short for the requested range")
    nz = np.flatnonzero(sub)
    return int(nz[0]) if nz.size else None


def cong_reduce_check(
    prof: QuotientProfile, ell: int, a: int, T: int, F: FEllForm | None = None, c=None
) -> ResidueCheck:
    """Compare c(ell n + a) == 0 and D(ell n + b) == 0 over 0 <= n <= T (empirical)."""
    a %= ell
    b = transfer_residue(prof, ell, a)
    need = ell * T + ell
    if F is None or F.series.trunc < need:
        F = build_F_ell(prof, ell, need)
    if c is None or c.trunc < need:
        c = prof.c_series(need, ell)
    b2 = shifted_residue(prof, ell, a)
    c_bad = _first_nonzero(c.coeffs, a, ell, T + 1)
    d_bad = _first_nonzero(F.series.coeffs, b, ell, T + 1)
    d2_bad = _first_nonzero(F.series.coeffs, b2, ell, T + 1)
    return ResidueCheck(
        ell, a, b, T, c_bad is None, d_bad is None, c_bad, d_bad, b2, d2_bad is None, d2_bad
    )


@dataclass(frozen=True)
class CaseTrace:
    ell: int
    t: int
    k_mod_ell: int
    k0: int | None
    alpha_ok: bool
    caseII_blocked: bool
    caseIV_drop: int
    caseIV_drop_negative: bool
    route: str
    leading_exponent_mod_ell: int
    assumptions: str = ASSUMPTIONS

    @property
    def passes(self) -> bool:
        """The trace rules out a congruence mod ell along its route."""
        if not self.alpha_ok:
            return False
        if self.route == "u==v":
            # F = q^{ell M}(1 + ...) so D(ell n) is not identically 0: b = 0 is impossible
            return self.leading_exponent_mod_ell == 0
        return self.caseII_blocked and self.caseIV_drop_negative

    def to_json(self) -> dict:
        d = asdict(self)
        d["passes"] = self.passes
        return d


def case_analysis(prof: QuotientProfile, ell: int, t: int = 2) -> CaseTrace:
    """Pure modular arithmetic on w(F_ell) = (ell^2-1)(s-r)/2 + 12 ell^t."""
    if ell < 5 or not is_prime(ell):
        raise ValueError(f"ell must be a prime >= 5, got {ell}")
    sr = prof.s - prof.r
    k = (ell * ell - 1) * sr // 2 + 12 * ell**t
    k_mod = k % ell
    k0 = (-k) % ell or None
    alpha_ok = k_mod not in ((ell + 1) // 2, (ell + 3) // 2)
    blocked = (prof.r - prof.s) % ell != 4
    drop = sr + 3 - ell
    if sr >= 0 and sr % 2 == 0:
        route = "s-r even"
    elif (prof.u - prof.v) % ell == 0:
        route = "u==v"
    else:
        route = "none"
    lead = ell**t + (prof.v - prof.u) * delta_ell(ell)
    return CaseTrace(ell, t, k_mod, k0, alpha_ok, blocked, drop, drop < 0, route, lead % ell)


def hypothesis_at(prof: QuotientProfile, ell: int) -> bool:
    sr = prof.s - prof.r
    if sr >= 0 and sr % 2 == 0:
        return True
    return (prof.u - prof.v) % ell == 0 and (prof.r - prof.s) not in (1, 3)


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve).tolist()


@dataclass
class ExclusionReport:
    profile: QuotientProfile
    bound_B: int
    hypothesis_ok: bool
    reason: str
    excluded: str
    excluded_primes: list[int]
    residual: list[int]
    residual_cofinite: bool
    ell_max: int
    traces: list[CaseTrace] = field(default_factory=list)

    @property
    def all_traces_pass(self) -> bool:
        return all(tr.passes for tr in self.traces)

    def to_json(self) -> dict:
        return {
            "profile": self.profile.to_json(),
            "bound_B": self.bound_B,
            "hypothesis_ok": self.hypothesis_ok,
            "reason": self.reason,
            "excluded": self.excluded,
            "excluded_primes": self.excluded_primes,
            "residual": self.residual,
            "residual_cofinite": self.residual_cofinite,
            "ell_max": self.ell_max,
            "traces": [tr.to_json() for tr in self.traces],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    def human(self) -> str:
        p = self.profile
        lines = [
            f"lambda={list(p.lam)} mu={list(p.mu)}: r={p.r} s={p.s} u={p.u} v={p.v} "
            f"N={p.N} gamma={p.gamma}",
            f"bound B = max(5, |s-r|+4) = {self.bound_B}",
            f"hypothesis: {'holds' if self.hypothesis_ok else 'fails'} ({self.reason})",
            f"excluded: {self.excluded}",
        ]
        if self.excluded_primes:
            lines.append(f"  explicitly checked <= {self.ell_max}: {self.excluded_primes}")
        tail = " and all larger primes" if self.residual_cofinite else ""
        lines.append(f"residual (scan or citation): {self.residual}{tail}")
        for tr in self.traces:
            mark = "ok " if tr.passes else "BAD"
            lines.append(
                f"  [{mark}] ell={tr.ell} t={tr.t} k=={tr.k_mod_ell} k0={tr.k0} "
                f"alpha={tr.alpha_ok} caseII_blocked={tr.caseII_blocked} "
                f"caseIV_drop={tr.caseIV_drop} route={tr.route}"
            )
        return "\n".join(lines)


def _trace_for(prof: QuotientProfile, ell: int) -> CaseTrace:
    return case_analysis(prof, ell, minimal_t(prof, ell))


def exclusion_report(lam, mu, ell_max: int = 97, threads: int = 1) -> ExclusionReport:
    prof = profile(lam, mu)
    sr = prof.s - prof.r
    B = max(5, abs(sr) + 4)
    gN = prof.gamma * prof.N
    if sr >= 0 and sr % 2 == 0:
        ok, reason, cofinite = True, f"s-r = {sr} is a non-negative even integer", False
    elif prof.r - prof.s in (1, 3):
        ok, reason, cofinite = False, f"r-s = {prof.r - prof.s} is excluded and s-r is odd or negative", True
    elif prof.u == prof.v:
        ok, reason, cofinite = True, "u = v, so u == v mod every ell", False
    else:
        diff = abs(prof.u - prof.v)
        ok = any(q > B and gN % q for q in primes_upto(diff) if diff % q == 0)
        reason = f"u == v mod ell only for primes dividing u - v = {prof.u - prof.v}"
        cofinite = True
    excluded_primes, residual = [], []
    for q in primes_upto(ell_max):
        if q > B and gN % q and hypothesis_at(prof, q):
            excluded_primes.append(q)
        else:
            residual.append(q)
    if not ok:
        rule = "none: the theorem does not apply"
    elif not cofinite:
        rule = f"every prime ell > {B} with ell not dividing gamma*N = {gN}"
    else:
        rule = f"primes ell > {B}, ell not dividing {gN}, ell dividing u - v"
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            traces = list(pool.map(lambda q: _trace_for(prof, q), excluded_primes))
    else:
        traces = [_trace_for(prof, q) for q in excluded_primes]
    return ExclusionReport(
        prof, B, ok, reason, rule, excluded_primes, residual, cofinite, ell_max, traces
    )


# -- coset representatives of Gamma1(N) --------------------------------------


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a - (a // b) * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def _coprime_lift(c: int, d: int, N: int) -> tuple[int, int]:
    # try d, d-N, d+N, d-2N, ... first (e.g. (5,5) -> (5,-1) mod 6), then shift c
    for j in range(N + 2):
        cc = c + j * N
        for k in range(2 * N + 4):
            step = (k + 1) // 2
            dd = d - step * N if k % 2 else d + step * N
            if gcd(cc, dd) == 1:
                return cc, dd
    raise RuntimeError(f"no coprime lift of ({c}, {d}) mod {N}")


Matrix = tuple[tuple[int, int], tuple[int, int]]


def coset_reps(N: int) -> list[Matrix]:
    """One SL2(Z) matrix per right coset Gamma1(N) g, indexed by (c, d) mod N of order N."""
    if N < 1:
        raise ValueError("N must be positive")
    if N == 1:
        return [((1, 0), (0, 1))]
    out = []
    for c in range(N):
        for d in range(N):
            if gcd(gcd(c, d), N) != 1:
                continue
            cc, dd = _coprime_lift(c, d, N)
            g, x, y = _egcd(dd, cc)
            # x dd + y cc = g = +-1 ; a = x g, b = -y g gives a dd - b cc = 1
            a, b = x * g, -y * g
            out.append(((a, b), (cc, dd)))
    return out


def sign_classes(N: int) -> list[tuple[tuple[int, int], ...]]:
    """Cosets grouped under (c, d) ~ (-c, -d) mod N."""
    seen: dict[tuple[int, int], tuple[tuple[int, int], ...]] = {}
    for _, (c, d) in coset_reps(N):
        key = (c % N, d % N)
        neg = ((-c) % N, (-d) % N)
        if neg in seen:
            continue
        seen[key] = tuple(sorted({key, neg}))
    return list(seen.values())


__all__ = [
    "CaseTrace",
    "ExclusionReport",
    "FEllForm",
    "NoWitnessError",
    "QuotientProfile",
    "ResidueCheck",
    "build_F_ell",
    "case_analysis",
    "cong_reduce_check",
    "coset_reps",
    "delta_ell",
    "exclusion_report",
    "f_ell_quotient",
    "minimal_t",
    "profile",
    "sign_classes",
    "theta_nonvanishing",
    "shifted_residue",
    "transfer_residue",
]
