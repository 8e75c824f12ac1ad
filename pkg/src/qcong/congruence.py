"""The restricted-odd-difference overpartition function tbar(n).

Series expansion, a brute-force combinatorial oracle, Ramanujan-congruence
scans, checks of the known mod 2/3/5 results and the two Sturm-certified
congruences tbar(80n+40) == tbar(80n+60) == 0 (mod 5).
"""

from __future__ import annotations

import enum
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import product
from math import isqrt

import numpy as np

from qcong import __version__
from qcong.eta import EtaQuotient, expand, sturm_bound, weight2
from qcong.operators import u_op
from qcong.series import ModSeries

TBAR = EtaQuotient({3: 1, 2: -1, 1: -1})


def tbar_series(L: int, modulus=None):
    """tbar(0..L-1), exact or reduced mod a prime."""
    return expand(TBAR, L, modulus).to_series()


# -- combinatorial oracle ----------------------------------------------------


def partitions(n: int):
    """Partitions of n as non-increasing tuples (ascending-composition algorithm)."""
    if n == 0:
        yield ()
        return
    a = [0] * (n + 1)
    k = 1
    y = n - 1
    while k:
        x = a[k - 1] + 1
        k -= 1
        while 2 * x <= y:
            a[k] = x
            y -= x
            k += 1
        m = k + 1
        while x <= y:
            a[k] = x
            a[m] = y
            yield tuple(reversed(a[: k + 2]))
            x += 1
            y -= 1
        a[k] = x + y
        y = x + y - 1
        yield tuple(reversed(a[: k + 1]))


def _forced_overlines(values: list[int]) -> list[bool]:
    """Per distinct value (descending): must it be overlined under rules (i), (ii)?"""
    forced = []
    for i, v in enumerate(values):
        if i + 1 < len(values):
            forced.append((v - values[i + 1]) % 2 == 1)
        else:
            forced.append(v % 2 == 1)
    return forced


def tbar_overpartitions(n: int) -> list[str]:
    """Every overpartition of n obeying both rules, rendered like "2' + 1 + 1'".

    A trailing apostrophe marks the overlined final occurrence of a value.
    Enumerates all overline subsets explicitly; meant for small n.
    """
    out = []
    for parts in partitions(n):
        values = sorted(set(parts), reverse=True)
        for mask in product((False, True), repeat=len(values)):
            over = dict(zip(values, mask))
            if not _valid(values, over):
                continue
            out.append(_render(parts, over))
    return out


def _valid(values: list[int], over: dict[int, bool]) -> bool:
    for big, small in zip(values, values[1:]):
        if (big - small) % 2 and not over[big]:
            return False
    if values and values[-1] % 2 and not over[values[-1]]:
        return False
    return True


def _render(parts: tuple[int, ...], over: dict[int, bool]) -> str:
    if not parts:
        return "()"
    labels = []
    for i, v in enumerate(parts):
        last = i + 1 == len(parts) or parts[i + 1] != v
        labels.append(f"{v}'" if last and over[v] else str(v))
    return " + ".join(labels)


def tbar_bruteforce(n: int) -> int:
    """Count overpartitions of n obeying rules (i) and (ii) by enumerating partitions.

    For each partition the rules fix some overlines and leave the rest free,
    so each partition contributes 2**(free values).
    """
    if n < 0:
        return 0
    total = 0
    for parts in partitions(n):
        values = sorted(set(parts), reverse=True)
        free = len(values) - sum(_forced_overlines(values))
        total += 1 << free
    return total


def overpartition_count(n: int) -> int:
    """Unrestricted overpartitions: each distinct value may be overlined or not."""
    if n < 0:
        return 0
    return sum(1 << len(set(parts)) for parts in partitions(n))


# -- Ramanujan congruence scans ----------------------------------------------


class Status(enum.Enum):
    EMPIRICAL = "empirical"
    REFUTED = "refuted"
    CERTIFIED = "certified"


@dataclass(frozen=True)
class CongruenceCandidate:
    ell: int
    a: int
    checked_up_to: int
    status: Status
    counterexample: int | None = None
    reference: str | None = None

    def __post_init__(self):
        if self.status is Status.REFUTED and self.counterexample is None:
            raise ValueError("refuted candidates need a counterexample")

    def to_json(self) -> dict:
        d = asdict(self)
        d["status"] = self.status.value
        return d

    def describe(self) -> str:
        if self.status is Status.REFUTED:
            n = self.counterexample
            return (
                f"a={self.a}: refuted, c({self.ell}*{n}+{self.a}) = c({self.ell * n + self.a})"
                f" != 0 mod {self.ell}"
            )
        return f"a={self.a}: survives for 0 <= n < {self.checked_up_to} ({self.status.value})"


def _scan_residue(coeffs: np.ndarray, ell: int, a: int) -> CongruenceCandidate:
    sub = coeffs[a::ell]
    nz = np.flatnonzero(sub % ell)
    if nz.size:
        return CongruenceCandidate(ell, a, sub.size, Status.REFUTED, int(nz[0]))
    return CongruenceCandidate(ell, a, sub.size, Status.EMPIRICAL)


def scan_ramanujan(series: ModSeries, ell: int | None = None, threads: int = 1):
    """Check c(ell n + a) == 0 mod ell on every known index, for each a in [0, ell)."""
    ell = series.ell if ell is None else int(ell)
    if ell != series.ell:
        raise ValueError(f"series is reduced mod {series.ell}, not {ell}")
    if series.trunc < ell:
        raise ValueError(f"need at least {ell} coefficients to scan mod {ell}")
    coeffs = series.coeffs
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(lambda a: _scan_residue(coeffs, ell, a), range(ell)))
    return [_scan_residue(coeffs, ell, a) for a in range(ell)]


def survivors(cands) -> list[int]:
    return [c.a for c in cands if c.status is not Status.REFUTED]


# -- the quoted congruences -------------------------------------------------


@dataclass
class KnownCheck:
    name: str
    statement: str
    checked: int
    failures: list[int] = field(default_factory=list)
    range_note: str = ""

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def verify_mod3(L: int) -> KnownCheck:
    """tbar(n) == (-1)^(k+1) mod 3 if n = k^2, else 0; checked for 1 <= n < L."""
    t = tbar_series(L, 3)
    fails = []
    for n in range(1, L):
        k = isqrt(n)
        expected = (-1) ** (k + 1) % 3 if k * k == n else 0
        if t[n] != expected:
            fails.append(n)
    return KnownCheck(
        "mod3",
        "tbar(n) == (-1)^(k+1) (mod 3) if n = k^2, else 0",
        max(L - 1, 0),
        fails,
        "1 <= n < L (n = 0 excluded: tbar(0) = 1)",
    )


def verify_mod2(L: int) -> KnownCheck:
    """tbar(2n) odd iff n = (3k+1)^2 for an integer k; checked for 1 <= n, 2n < L."""
    t = tbar_series(L, 2)
    fails = []
    n_max = (L - 1) // 2
    for n in range(1, n_max + 1):
        r = isqrt(n)
        # (3k+1)^2 with k in Z covers exactly the squares prime to 3
        expected = 1 if (r * r == n and r % 3) else 0
        if t[2 * n] != expected:
            fails.append(n)
    return KnownCheck(
        "mod2",
        "tbar(2n) == 1 (mod 2) iff n = (3k+1)^2 for some integer k",
        n_max,
        fails,
        "1 <= n with 2n < L",
    )


def linliu_indices(L: int, alpha_max: int) -> list[int]:
    out = []
    for alpha in range(alpha_max + 1):
        n = 0
        while (m := 9**alpha * (45 * n + 30)) < L:
            out.append(m)
            n += 1
    return sorted(out)


def verify_linliu(L: int, alpha_max: int = 2) -> KnownCheck:
    """tbar(9^alpha (45 n + 30)) == 0 mod 5 for every such index below L."""
    t = tbar_series(L, 5)
    idx = linliu_indices(L, alpha_max)
    fails = [m for m in idx if t[m]]
    return KnownCheck(
        "linliu",
        "tbar(9^alpha (45n+30)) == 0 (mod 5)",
        len(idx),
        fails,
        f"indices < {L}, 0 <= alpha <= {alpha_max}",
    )


# -- Sturm certificates -----------------------------------------------------


@dataclass(frozen=True)
class CertificateSpec:
    kind: str
    eta_factors: EtaQuotient
    modulus: int
    level: int
    stride: int
    residue: int

    @property
    def weight2(self) -> int:
        return weight2(self.eta_factors)

    @property
    def bound(self) -> int:
        return sturm_bound(self.weight2, self.level)


# tbar quotient * eta(80z)^e * eta(z)^5 / eta(5z), with the two eta(z) factors merged
CERTIFICATES = {
    "mod5-40": CertificateSpec(
        "mod5-40", TBAR * EtaQuotient({80: 12, 1: 5, 5: -1}), 5, 1440, 80, 40
    ),
    "mod5-60": CertificateSpec(
        "mod5-60", TBAR * EtaQuotient({80: 6, 1: 5, 5: -1}), 5, 2880, 80, 60
    ),
}


@dataclass
class SturmCertificate:
    kind: str
    eta_factors: EtaQuotient
    modulus: int
    weight2: int
    level: int
    sturm_bound: int
    stride: int
    residue_checked: str
    verified: bool
    first_failure: int | None
    terms_computed: int
    runtime_ms: int = 0
    tool_version: str = __version__

    def __post_init__(self):
        if self.verified and self.first_failure is not None:
            raise ValueError("a verified certificate cannot carry a failure")

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "eta_factors": self.eta_factors.to_json()["factors"],
            "modulus": self.modulus,
            "weight2": self.weight2,
            "level": self.level,
            "sturm_bound": self.sturm_bound,
            "stride": self.stride,
            "residue_checked": self.residue_checked,
            "terms_computed": self.terms_computed,
            "verified": self.verified,
            "first_failure": self.first_failure,
            "runtime_ms": self.runtime_ms,
            "tool_version": self.tool_version,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, data: dict) -> "SturmCertificate":
        return cls(
            kind=data["kind"],
            eta_factors=EtaQuotient.from_pairs(data["eta_factors"]),
            modulus=data["modulus"],
            weight2=data["weight2"],
            level=data["level"],
            sturm_bound=data["sturm_bound"],
            stride=data["stride"],
            residue_checked=data["residue_checked"],
            verified=data["verified"],
            first_failure=data["first_failure"],
            terms_computed=data["terms_computed"],
            runtime_ms=data.get("runtime_ms", 0),
            tool_version=data.get("tool_version", __version__),
        )


def certify(kind: str, extra: int = 0, check_upto: int | None = None) -> SturmCertificate:
    """Expand F mod ell, apply U_stride and check coefficients 0..bound vanish.

    `extra` adds coefficients beyond the bound (stability reruns); `check_upto`
    overrides the last index checked (used to inject failures in tests).
    """
    spec = CERTIFICATES[kind]
    t0 = time.perf_counter()
    bound = spec.bound
    last = bound + extra if check_upto is None else check_upto
    terms = spec.stride * last + 1
    eq = spec.eta_factors
    if eq.offset24 % 24:
        raise ValueError(f"{kind}: q-offset {eq.offset24}/24 is not integral")
    lead = eq.offset24 // 24
    F = expand(eq, max(terms - lead, 1), spec.modulus).to_series().truncate(terms)
    U = u_op(F, spec.stride)
    nz = np.flatnonzero(U.coeffs[: last + 1])
    first = int(nz[0]) if nz.size else None
    runtime = int((time.perf_counter() - t0) * 1000)
    return SturmCertificate(
        kind=kind,
        eta_factors=eq,
        modulus=spec.modulus,
        weight2=spec.weight2,
        level=spec.level,
        sturm_bound=bound,
        stride=spec.stride,
        residue_checked=(
            f"c({spec.stride}n) == 0 mod {spec.modulus} for 0 <= n <= {last}"
            f" => tbar({spec.stride}n+{spec.residue}) == 0 mod {spec.modulus}"
        ),
        verified=first is None,
        first_failure=first,
        terms_computed=F.trunc,
        runtime_ms=runtime,
    )


def certify_80n_40(**kw) -> SturmCertificate:
    return certify("mod5-40", **kw)


def certify_80n_60(**kw) -> SturmCertificate:
    return certify("mod5-60", **kw)


__all__ = [
    "CERTIFICATES",
    "CongruenceCandidate",
    "KnownCheck",
    "Status",
    "SturmCertificate",
    "TBAR",
    "certify",
    "certify_80n_40",
    "certify_80n_60",
    "linliu_indices",
    "overpartition_count",
    "partitions",
    "scan_ramanujan",
    "survivors",
    "tbar_bruteforce",
    "tbar_overpartitions",
    "tbar_series",
    "verify_linliu",
    "verify_mod2",
    "verify_mod3",
]
