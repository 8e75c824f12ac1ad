"""Command-line front end: ``qcong <command> ...``.

Exit codes: 0 success or verified, 1 verification failure (first
counterexample on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from typing import TextIO

from qcong import __version__
from qcong.congruence import (
    CERTIFICATES,
    TBAR,
    certify,
    scan_ramanujan,
    survivors,
    tbar_bruteforce,
    tbar_series,
    verify_linliu,
    verify_mod2,
    verify_mod3,
)
from qcong.eta import EtaQuotient, EtaSyntaxError, delta_power, expand, parse_eta, sturm_bound
from qcong.mainthm import (
    NoWitnessError,
    build_F_ell,
    cong_reduce_check,
    coset_reps,
    exclusion_report,
    profile,
    sign_classes,
    theta_nonvanishing,
)
from qcong.operators import FiltrationError, filtration_level1, theta_power
from qcong.series import dump_text, is_prime

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    command: str
    output_format: str = "text"
    terms: int | None = None
    modulus: int | None = None
    threads: int = 1
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.output_format not in ("text", "json"):
            raise UsageError(f"unknown output format {self.output_format!r}")
        if self.terms is not None and self.terms < 1:
            raise UsageError(f"--terms must be >= 1, got {self.terms}")
        if self.modulus is not None and not is_prime(self.modulus):
            raise UsageError(f"--mod must be prime, got {self.modulus}")
        if self.threads < 1:
            raise UsageError(f"--threads must be >= 1, got {self.threads}")


@dataclass
class Outcome:
    code: int
    text: str
    data: object
    failure: str | None = None


def default_threads() -> int:
    env = os.environ.get("QCONG_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"QCONG_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _parts(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise UsageError(f"parts must be comma-separated integers, got {text!r}") from None


def _eta(text: str) -> EtaQuotient:
    try:
        return parse_eta(text)
    except EtaSyntaxError as exc:
        raise UsageError(str(exc)) from None


def _need(cfg: CliConfig, name: str):
    value = getattr(cfg, name)
    if value is None:
        flag = {"terms": "--terms", "modulus": "--mod"}[name]
        raise UsageError(f"{cfg.command} requires {flag}")
    return value


# -- commands -----------------------------------------------------------------


def cmd_expand(cfg: CliConfig) -> Outcome:
    eq = _eta(cfg.options["eta"])
    L = _need(cfg, "terms")
    exp = expand(eq, L, cfg.modulus)
    data = {
        "eta": str(eq),
        "eta_factors": eq.to_json()["factors"],
        "offset24": exp.offset24,
        "modulus": cfg.modulus,
        "terms": L,
        "coeffs": exp.series.tolist(),
    }
    return Outcome(EXIT_OK, dump_text(exp.series, exp.offset24).rstrip("\n"), data)


def cmd_tbar(cfg: CliConfig) -> Outcome:
    L = _need(cfg, "terms")
    s = tbar_series(L, cfg.modulus)
    data = {"modulus": cfg.modulus, "terms": L, "coeffs": s.tolist()}
    text = dump_text(s).rstrip("\n")
    n_max = cfg.options.get("brute_check")
    if n_max is None:
        return Outcome(EXIT_OK, text, data)
    if n_max >= L:
        raise UsageError(f"--brute-check {n_max} needs --terms > {n_max}")
    exact = tbar_series(n_max + 1)
    bad = None
    for n in range(n_max + 1):
        b = tbar_bruteforce(n)
        if exact[n] != b:
            bad = (n, exact[n], b)
            break
    data["brute_check"] = {"n_max": n_max, "agrees": bad is None, "first_mismatch": bad and bad[0]}
    if bad:
        msg = f"brute force disagrees at n={bad[0]}: series {bad[1]}, enumeration {bad[2]}"
        return Outcome(EXIT_FAIL, text, data, msg)
    return Outcome(EXIT_OK, text + f"\n# brute force agrees for 0 <= n <= {n_max}", data)


def cmd_scan(cfg: CliConfig) -> Outcome:
    ell = _need(cfg, "modulus")
    L = _need(cfg, "terms")
    eq = _eta(cfg.options["eta"]) if cfg.options.get("eta") else TBAR
    series = expand(eq, L, ell).series
    cands = scan_ramanujan(series, ell, threads=cfg.threads)
    surv = survivors(cands)
    data = {
        "eta": str(eq),
        "modulus": ell,
        "terms": L,
        "candidates": [c.to_json() for c in cands],
        "survivors": surv,
    }
    lines = [f"scan of {eq} mod {ell} over {L} terms"]
    lines += ["  " + c.describe() for c in cands]
    lines.append(f"surviving residues: {surv}")
    return Outcome(EXIT_OK, "\n".join(lines), data)


def cmd_certify(cfg: CliConfig) -> Outcome:
    kind = cfg.options["kind"]
    cert = certify(kind, extra=cfg.options.get("extra", 0))
    data = cert.to_json()
    out = cfg.options.get("out")
    if out:
        with open(out, "w") as fh:
            fh.write(cert.dumps() + "\n")
    lines = [
        f"certificate {kind}: eta {cert.eta_factors} mod {cert.modulus}",
        f"  weight {cert.weight2}/2, level {cert.level}, Sturm bound {cert.sturm_bound}",
        f"  terms computed {cert.terms_computed}, U_{cert.stride} applied",
        f"  {cert.residue_checked}",
        f"  verified: {str(cert.verified).lower()} ({cert.runtime_ms} ms)",
    ]
    if out:
        lines.append(f"  written to {out}")
    if not cert.verified:
        msg = f"{kind}: coefficient n={cert.first_failure} of U_{cert.stride} F is nonzero"
        return Outcome(EXIT_FAIL, "\n".join(lines), data, msg)
    return Outcome(EXIT_OK, "\n".join(lines), data)


def cmd_exclude(cfg: CliConfig) -> Outcome:
    try:
        rep = exclusion_report(
            _parts(cfg.options["lam"]),
            _parts(cfg.options["mu"]),
            ell_max=cfg.options.get("max_prime", 97),
            threads=cfg.threads,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    data = rep.to_json()
    data["all_traces_pass"] = rep.all_traces_pass
    if not rep.all_traces_pass:
        bad = next(tr for tr in rep.traces if not tr.passes)
        return Outcome(EXIT_FAIL, rep.human(), data, f"case analysis fails at ell={bad.ell}")
    return Outcome(EXIT_OK, rep.human(), data)


def cmd_fell(cfg: CliConfig) -> Outcome:
    ell = _need(cfg, "modulus")
    L = _need(cfg, "terms")
    try:
        prof = profile(_parts(cfg.options["lam"]), _parts(cfg.options["mu"]))
        F = build_F_ell(prof, ell, L, cfg.options.get("t"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    data = {"profile": prof.to_json(), "F": F.meta()}
    lines = [
        f"F_{ell} = {F.eta}",
        f"  t={F.t} delta={F.delta_ell} weight={F.weight} level={F.level} "
        f"leading exponent={F.leading_exponent} terms={F.series.trunc}",
    ]
    try:
        w = theta_nonvanishing(F)
    except NoWitnessError as exc:
        data["theta_witness"] = None
        return Outcome(EXIT_FAIL, "\n".join(lines), data, str(exc))
    data["theta_witness"] = w
    lines.append(f"  theta F nonzero: D({w}) = {F.series[w]}, {w}*D({w}) != 0 mod {ell}")
    T = cfg.options.get("check") or (F.series.trunc // ell - 1)
    if T < 0:
        raise UsageError(f"--terms must be at least {ell} for the residue table")
    c = prof.c_series(ell * T + ell, ell)
    rows = [cong_reduce_check(prof, ell, a, T, F, c) for a in range(ell)]
    data["residue_table"] = {"T": T, "rows": [r.to_json() for r in rows]}
    lines.append(f"  residue table over 0 <= n <= {T}:")
    lines.append("    a  b  c-side  D-side  agree | b'  D-side'  agree'")
    for r in rows:
        lines.append(
            f"    {r.a:<2} {r.b:<2} {_v(r.c_vanishes):<7} {_v(r.D_vanishes):<7} "
            f"{_v(r.agree):<5} | {r.b_shift:<3} {_v(r.D_shift_vanishes):<8} {_v(r.agree_shift)}"
        )
    bad = next((r for r in rows if not r.agree), None)
    if bad:
        side = "c" if not bad.c_vanishes else "D"
        n = bad.c_counterexample if side == "c" else bad.D_counterexample
        msg = (
            f"residue transfer disagrees at a={bad.a}, b={bad.b}: "
            f"only the {side}-side has a nonzero term (n={n})"
        )
        return Outcome(EXIT_FAIL, "\n".join(lines), data, msg)
    return Outcome(EXIT_OK, "\n".join(lines), data)


def _v(flag: bool) -> str:
    return "yes" if flag else "no"


def cmd_filtration(cfg: CliConfig) -> Outcome:
    ell = _need(cfg, "modulus")
    k = cfg.options["weight"]
    i = cfg.options.get("theta", 0)
    if cfg.options.get("delta_power") is not None:
        eq = delta_power(cfg.options["delta_power"])
    elif cfg.options.get("eta"):
        eq = _eta(cfg.options["eta"])
    else:
        raise UsageError("filtration needs --eta or --delta-power")
    if eq.offset24 % 24 or eq.offset24 < 0:
        raise UsageError(f"{eq} is not a plain q-series (offset {eq.offset24}/24)")
    k_total = k + i * (ell + 1)
    L = cfg.terms or (sturm_bound(2 * k_total, 1) if k_total > 0 else 1)
    lead = eq.offset24 // 24
    f = expand(eq, max(L - lead, 1), ell).to_series().truncate(L)
    if i:
        f = theta_power(f, i)
    try:
        res = filtration_level1(f, k_total, ell)
    except FiltrationError as exc:
        return Outcome(EXIT_FAIL, "", {"error": str(exc)}, str(exc))
    label = f"theta^{i} ({eq})" if i else str(eq)
    data = {
        "form": label,
        "modulus": ell,
        "weight": k_total,
        "w": res.w,
        "witness_weight_chain": res.witness_weight_chain,
        "certified_up_to": res.certified_up_to,
        "coefficients": res.coefficients,
    }
    text = (
        f"w_{ell}({label}) = {res.w}  (weight {k_total}, chain {res.witness_weight_chain}, "
        f"certified on {res.certified_up_to} coefficients)"
    )
    return Outcome(EXIT_OK, text, data)


def cmd_cosets(cfg: CliConfig) -> Outcome:
    N = cfg.options["N"]
    if N < 1:
        raise UsageError("N must be positive")
    reps = coset_reps(N)
    classes = sign_classes(N)
    data = {
        "N": N,
        "count": len(reps),
        "sign_classes": len(classes),
        "matrices": [[list(r) for r in m] for m in reps],
    }
    lines = [f"{len(reps)} coset representatives of Gamma1({N}) ({len(classes)} sign classes)"]
    lines += [f"  [[{a}, {b}], [{c}, {d}]]" for (a, b), (c, d) in reps]
    return Outcome(EXIT_OK, "\n".join(lines), data)


def cmd_verify(cfg: CliConfig) -> Outcome:
    if cfg.options.get("what") != "known":
        raise UsageError("verify supports only 'known'")
    L = _need(cfg, "terms")
    checks = [verify_mod3(L), verify_mod2(L), verify_linliu(L)]
    data = {"terms": L, "checks": [c.to_json() for c in checks]}
    lines = []
    for c in checks:
        status = "PASS" if c.passed else f"FAIL (first n={c.failures[0]})"
        lines.append(f"{c.name}: {c.statement}; {c.checked} checked [{c.range_note}]: {status}")
    bad = next((c for c in checks if not c.passed), None)
    if bad:
        return Outcome(EXIT_FAIL, "\n".join(lines), data, f"{bad.name}: fails at n={bad.failures[0]}")
    return Outcome(EXIT_OK, "\n".join(lines), data)


COMMANDS = {
    "expand": cmd_expand,
    "tbar": cmd_tbar,
    "scan": cmd_scan,
    "certify": cmd_certify,
    "exclude": cmd_exclude,
    "fell": cmd_fell,
    "filtration": cmd_filtration,
    "cosets": cmd_cosets,
    "verify": cmd_verify,
}


# -- argument parsing ---------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default=None)
    common.add_argument("--json", action="store_true", help="shorthand for --format json")
    common.add_argument("--threads", type=int, default=None)

    def series_flags(p, terms=True, mod=True, mod_required=False):
        if terms:
            p.add_argument("--terms", type=int, required=True)
        if mod:
            p.add_argument("--mod", type=int, required=mod_required)

    root = _Parser(prog="qcong", description="q-series and congruence tools")
    root.add_argument("--version", action="version", version=f"qcong {__version__}")
    sub = root.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("expand", parents=[common], help="expand an eta-quotient")
    p.add_argument("eta")
    series_flags(p)

    p = sub.add_parser("tbar", parents=[common], help="tbar(n) series")
    series_flags(p)
    p.add_argument("--brute-check", type=int, dest="brute_check")

    p = sub.add_parser("scan", parents=[common], help="scan for c(ell n + a) == 0")
    series_flags(p, mod_required=True)
    p.add_argument("--eta")

    p = sub.add_parser("certify", parents=[common], help="Sturm-bound certificates")
    p.add_argument("kind", choices=sorted(CERTIFICATES))
    p.add_argument("--out")
    p.add_argument("--extra", type=int, default=0, help="check this many indices past the bound")

    p = sub.add_parser("exclude", parents=[common], help="prime-exclusion report")
    p.add_argument("--lambda", dest="lam", required=True)
    p.add_argument("--mu", required=True)
    p.add_argument("--max-prime", type=int, dest="max_prime", default=97)

    p = sub.add_parser("fell", parents=[common], help="companion form F_ell")
    p.add_argument("--lambda", dest="lam", required=True)
    p.add_argument("--mu", required=True)
    series_flags(p, mod_required=True)
    p.add_argument("--t", type=int)
    p.add_argument("--check", type=int, help="residue-table range T (default from --terms)")

    p = sub.add_parser("filtration", parents=[common], help="level-one filtration mod ell")
    p.add_argument("--level1", action="store_true", default=True)
    p.add_argument("--weight", type=int, required=True)
    p.add_argument("--mod", type=int, required=True)
    p.add_argument("--terms", type=int)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--eta")
    src.add_argument("--delta-power", type=int, dest="delta_power")
    p.add_argument("--theta", type=int, default=0, help="apply theta this many times first")

    p = sub.add_parser("cosets", parents=[common], help="coset representatives of Gamma1(N)")
    p.add_argument("N", type=int)

    p = sub.add_parser("verify", parents=[common], help="check the quoted congruences")
    p.add_argument("what", choices=("known",))
    series_flags(p, mod=False)
    return root


_CONFIG_KEYS = {"command", "format", "json", "threads", "terms", "mod"}


def parse_config(argv: list[str]) -> CliConfig:
    ns = build_parser().parse_args(argv)
    fmt = "json" if ns.json else (ns.format or "text")
    threads = ns.threads if ns.threads is not None else default_threads()
    options = {k: v for k, v in vars(ns).items() if k not in _CONFIG_KEYS}
    return CliConfig(
        command=ns.command,
        output_format=fmt,
        terms=getattr(ns, "terms", None),
        modulus=getattr(ns, "mod", None),
        threads=threads,
        options=options,
    )


def run(argv: list[str] | None = None, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
        outcome = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if cfg.output_format == "json":
        payload = outcome.data if isinstance(outcome.data, dict) else {"result": outcome.data}
        payload = dict(payload, exit_code=outcome.code)
        print(json.dumps(payload, indent=2), file=stdout)
    elif outcome.text:
        print(outcome.text, file=stdout)
    if outcome.failure:
        print(f"verification failed: {outcome.failure}", file=stderr)
    return outcome.code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
