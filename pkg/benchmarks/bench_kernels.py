"""Compare the numba and numpy enumeration backends.

Both backends are imported directly, so the ``ALLOC_DESIGN_NUMBA`` flag does
not matter here. Usage::

    python3 benchmarks/bench_kernels.py [--n 500] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

from alloc_design import _kernels
from alloc_design.numerics import binomial_pmf_vector


def _best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _scan(kernel, n: int, p_a: float, p_b: float):
    # one exact-power evaluation per arm-A size, as in the exhaustive search
    out = []
    for na in range(1, n):
        nb = n - na
        out.append(kernel(binomial_pmf_vector(na, p_a), binomial_pmf_vector(nb, p_b), na, nb, 1.96, True, 1.0)[0])
    return out


def _mtd_scan(kernel, n: int):
    out = []
    for na in range(1, n):
        nb = n - na
        c = -(-int(2 * 280 * na * nb) // 1000)
        out.append(kernel(binomial_pmf_vector(na, 0.1), binomial_pmf_vector(nb, 0.3), na, nb, c)[0])
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels.wald_power_numba is None:
        raise SystemExit("numba is not installed")

    # compile outside the timed region
    _kernels.wald_power_numba(binomial_pmf_vector(3, 0.5), binomial_pmf_vector(3, 0.5), 3, 3, 1.96, True, 1.0)
    _kernels.mtd_numba(binomial_pmf_vector(3, 0.5), binomial_pmf_vector(3, 0.5), 3, 3, 4)

    cases = [
        ("wald power scan", lambda: _scan(_kernels.wald_power_numba, args.n, 0.7, 0.9),
         lambda: _scan(_kernels.wald_power_numpy, args.n, 0.7, 0.9)),
        ("mtd error scan", lambda: _mtd_scan(_kernels.mtd_numba, args.n),
         lambda: _mtd_scan(_kernels.mtd_numpy, args.n)),
    ]
    print(f"n = {args.n}, best of {args.repeat}")
    print(f"{'kernel':<18}{'numba [s]':>12}{'numpy [s]':>12}{'ratio':>9}{'max |diff|':>13}")
    for name, fast, slow in cases:
        a, b = fast(), slow()
        diff = max(abs(x - y) for x, y in zip(a, b))
        t_fast, t_slow = _best_of(fast, args.repeat), _best_of(slow, args.repeat)
        print(f"{name:<18}{t_fast:>12.4f}{t_slow:>12.4f}{t_slow / t_fast:>9.1f}{diff:>13.2e}")


if __name__ == "__main__":
    main()
