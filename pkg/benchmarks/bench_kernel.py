"""Compare the compiled and pure-Python polynomial kernels.

Micro-benchmarks call both kernel modules directly on the same packed
polynomials.  The end-to-end workload runs in a subprocess per backend,
because the backend is fixed when ``heavenly`` is imported.

    python3 benchmarks/bench_kernel.py [--repeat 5] [--seed 0] [--skip-e2e]
"""

import argparse
import os
import random
import subprocess
import sys
import timeit
from fractions import Fraction

from heavenly import _kernel_py

try:
    from heavenly import _kernel
except ImportError:
    _kernel = None

SLOT = 16
NVARS = 8
GUARD = sum(1 << (SLOT * i + SLOT - 1) for i in range(NVARS))

E2E_SNIPPET = """
import time
from heavenly import BACKEND
from heavenly.covering import CoveringContext
from heavenly.pseudogroup import check_cont_structure
t0 = time.perf_counter()
cov = CoveringContext(jet_order=6, cov_order=4)
cov.commutator_table()
check_cont_structure(3)
print(BACKEND, time.perf_counter() - t0)
"""


def random_poly(rng, terms, max_exp=3):
    out = {}
    for _ in range(terms):
        m = sum(rng.randint(0, max_exp) << (SLOT * i) for i in range(NVARS))
        out[m] = Fraction(rng.randint(-9, 9) or 1, rng.randint(1, 4))
    return out


def workloads(rng):
    a, b = random_poly(rng, 40), random_poly(rng, 40)
    prod = _kernel_py.mul(a, b)
    monos = list(prod)
    return {
        "add": lambda k: k.add(a, b),
        "mul": lambda k: k.mul(a, b),
        "div_exact": lambda k: k.div_exact(prod, b, GUARD),
        "diff": lambda k: [k.diff(prod, SLOT * i) for i in range(NVARS)],
        "mono_min": lambda k: k.mono_min(monos, GUARD),
    }


def micro(repeat, seed):
    rng = random.Random(seed)
    print(f"{'kernel':<10} {'python ms':>10} {'compiled ms':>12} {'speedup':>8}")
    for name, fn in workloads(rng).items():
        py = min(timeit.repeat(lambda: fn(_kernel_py), number=10, repeat=repeat)) * 100
        if _kernel is None:
            print(f"{name:<10} {py:10.3f} {'n/a':>12}")
            continue
        assert fn(_kernel) == fn(_kernel_py), name
        cc = min(timeit.repeat(lambda: fn(_kernel), number=10, repeat=repeat)) * 100
        print(f"{name:<10} {py:10.3f} {cc:12.3f} {py / cc:7.2f}x")


def end_to_end():
    print("\nend to end (commutator table at cov-order 4, cont-structure n=3):")
    for pure in (True, False):
        env = dict(os.environ)
        env.pop("HEAVENLY_PURE_PYTHON", None)
        if pure:
            env["HEAVENLY_PURE_PYTHON"] = "1"
        out = subprocess.run([sys.executable, "-c", E2E_SNIPPET], env=env,
                             capture_output=True, text=True, check=True).stdout.split()
        print(f"  {out[0]:<9} {float(out[1]):8.2f} s")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--skip-e2e", action="store_true")
    args = ap.parse_args()
    if _kernel is None:
        print("compiled kernel not built; only the pure-Python column is measured")
    micro(args.repeat, args.seed)
    if not args.skip_e2e:
        end_to_end()


if __name__ == "__main__":
    main()
