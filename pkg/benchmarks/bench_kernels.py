"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 3] [--json]
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from qcong import kernels
from qcong.congruence import CERTIFICATES
from qcong.eta import expand


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    for p in (5, 65537):
        for n in (64, 192, 1024):
            a = rng.integers(0, p, n)
            b = rng.integers(0, p, n)
            yield f"mul_trunc p={p} n={n}", "mul_trunc", (a, b, p, n)
    for L in (20000, 200000):
        a = rng.integers(0, 5, L)
        k = np.arange(1, 40)
        idx = np.unique(np.concatenate([[0], k * (3 * k - 1) // 2, k * (3 * k + 1) // 2]))
        idx = idx[idx < L].astype(np.int64)
        val = rng.integers(1, 5, idx.size).astype(np.int64)
        val[0] = 1
        yield f"sparse_mul L={L}", "sparse_mul", (a, idx, val, 5, L)
        yield f"sparse_div L={L}", "sparse_div", (a, idx, val, 5, L, 1)


def certificate_expansion(backend):
    spec = CERTIFICATES["mod5-40"]
    saved = {n: getattr(kernels, n) for n in ("mul_trunc", "sparse_mul", "sparse_div")}
    try:
        for n in saved:
            setattr(kernels, n, getattr(backend, n))
        expand(spec.eta_factors, 80 * spec.bound + 1 - 40, 5)
    finally:
        for n, f in saved.items():
            setattr(kernels, n, f)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    if kernels.compiled is None:
        raise SystemExit("compiled extension not available; build with pip install -e .")
    rng = np.random.default_rng(0)
    rows = []
    for label, name, argv in cases(rng):
        fast = getattr(kernels.compiled, name)
        slow = getattr(kernels.fallback, name)
        assert np.array_equal(fast(*argv), slow(*argv)), label
        tc = best_of(lambda: fast(*argv), args.repeat)
        tp = best_of(lambda: slow(*argv), args.repeat)
        rows.append({"case": label, "compiled_s": tc, "fallback_s": tp})
    tc = best_of(lambda: certificate_expansion(kernels.compiled), 1)
    tp = best_of(lambda: certificate_expansion(kernels.fallback), 1)
    rows.append({"case": "certificate mod5-40 expansion", "compiled_s": tc, "fallback_s": tp})
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    print(f"{'case':<34}{'compiled':>12}{'fallback':>12}{'ratio':>9}")
    for r in rows:
        ratio = r["fallback_s"] / r["compiled_s"] if r["compiled_s"] else float("inf")
        print(f"{r['case']:<34}{r['compiled_s'] * 1e3:>10.2f}ms{r['fallback_s'] * 1e3:>10.2f}ms{ratio:>8.1f}x")


if __name__ == "__main__":
    main()
