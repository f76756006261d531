"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Kernel timings call both modules directly on the same inputs.  The
end-to-end rows run a dynamics workload and a 6-player enumeration in a
subprocess, once with ``NETFORM_PURE_PYTHON=1``.
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import timeit

from netform import _pykernels
from netform.kernels import BASIC, TRANSFER

try:
    from netform import _kernels
except ImportError:
    _kernels = None


def random_graph(n: int, p: float, seed: int) -> list[int]:
    rng = random.Random(seed)
    adj = [0] * n
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                adj[u] |= 1 << v
                adj[v] |= 1 << u
    for v in range(1, n):  # keep it connected
        u = rng.randrange(v)
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    return adj


def kernel_cases():
    g30, g60 = random_graph(30, 0.1, 1), random_graph(60, 0.05, 2)
    a30, a60 = (1 << 5) - 1, (1 << 8) - 1
    return [
        ("all_dist_sums n=30", lambda m: m.all_dist_sums(g30, 30, a30)),
        ("all_dist_sums n=60", lambda m: m.all_dist_sums(g60, 60, a60)),
        ("toggle_sums n=60", lambda m: m.toggle_sums(g60, 60, 7, a60)),
        ("stability_flags n=30", lambda m: m.stability_flags(g30, 30, a30, 4, 6, 8, 2, BASIC | TRANSFER)),
        ("scan_graphs n=6", lambda m: m.scan_graphs(6, 0b11, 4, 6, 8, 2, BASIC)),
    ]


WORKLOAD = """
import time, warnings
warnings.simplefilter("ignore")
from netform import kernels
from netform.cost import GameParams
from netform.dynamics import DynamicsConfig, UniformRandom, run_game, schedule
from netform.stability import enumerate_stable
p = GameParams(2, 3, 4)
t = time.perf_counter()
for s in range(5):
    run_game(DynamicsConfig(schedule("6A,40B"), turn_order=UniformRandom(s)), p)
dyn = time.perf_counter() - t
t = time.perf_counter()
enumerate_stable(2, 4, p)
enum = time.perf_counter() - t
print(kernels.BACKEND, dyn, enum)
"""


def end_to_end(pure: bool) -> tuple[str, float, float]:
    env = dict(os.environ)
    if pure:
        env["NETFORM_PURE_PYTHON"] = "1"
    else:
        env.pop("NETFORM_PURE_PYTHON", None)
    out = subprocess.run([sys.executable, "-c", WORKLOAD], env=env, capture_output=True, text=True, check=True)
    backend, dyn, enum = out.stdout.split()
    return backend, float(dyn), float(enum)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-end-to-end", action="store_true")
    args = ap.parse_args()

    if _kernels is None:
        print("compiled extension not built; only the fallback is available")
    print(f"{'kernel':<24}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for name, fn in kernel_cases():
        py = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat)) * 1e3
        if _kernels is None:
            print(f"{name:<24}{py:>12.3f}{'-':>12}{'-':>10}")
            continue
        assert fn(_pykernels) == fn(_kernels), name
        cy = min(timeit.repeat(lambda: fn(_kernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<24}{py:>12.3f}{cy:>12.3f}{py / cy:>9.1f}x")

    if args.skip_end_to_end:
        return
    print()
    print(f"{'workload':<24}{'python s':>12}{'cython s':>12}{'speedup':>10}")
    _, pd, pe = end_to_end(pure=True)
    backend, cd, ce = end_to_end(pure=False)
    if backend != "cython":
        print("(compiled backend unavailable, second column is the fallback)")
    print(f"{'dynamics 5x46 players':<24}{pd:>12.3f}{cd:>12.3f}{pd / cd:>9.1f}x")
    print(f"{'enumerate 2A+4B':<24}{pe:>12.3f}{ce:>12.3f}{pe / ce:>9.1f}x")


if __name__ == "__main__":
    main()
