"""Compiled vs pure-numpy kernels.

Times the tensor <-> matrix conversions on 2..6 qubit events, a single
tableau pivot, and a complete simplex solve, once per available backend.
Prints a markdown table; run with ``python3 benchmarks/bench_kernels.py``.
"""

import argparse
import timeit

import numpy as np

from pdolab import kernels, simplex
from pdolab import pdo as P
from pdolab.samplers import random_pdo


def _best(fn, number, repeat=5):
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def cases():
    for n in range(2, 7):
        p = random_pdo((2,) * n, n)
        m = p.matrix
        yield f"to_matrix {n} qubits", lambda p=p: P.tensor_to_matrix(p.tensor, p.dims), 200 // n
        yield f"from_matrix {n} qubits", lambda m=m, d=p.dims: P.matrix_to_tensor(m, d), 200 // n
    rng = np.random.default_rng(0)
    for rows, cols in ((50, 120), (200, 500)):
        tab = rng.normal(size=(rows, cols))
        yield f"pivot {rows}x{cols}", lambda tab=tab: kernels.pivot(tab.copy(), rows // 2, cols // 2), 200
    a = rng.normal(size=(30, 80))
    b = a @ rng.uniform(0, 1, 80)
    a = np.vstack([a, np.ones(80)])
    b = np.append(b, 100.0)
    c = rng.normal(size=80)
    yield "simplex 31x80", lambda: simplex.solve(c, a, b), 5


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="fewer repeats")
    args = ap.parse_args()
    backends = kernels.available()
    rows = []
    for name, fn, number in cases():
        number = max(1, number // 10) if args.quick else number
        times = {}
        for b in backends:
            with kernels.using(b):
                fn()  # warm caches
                times[b] = _best(fn, number, 2 if args.quick else 5)
        rows.append((name, times))
    print("| case | " + " | ".join(f"{b} (us)" for b in backends) + (" | speedup |" if len(backends) > 1 else " |"))
    print("|---" * (len(backends) + 1 + (len(backends) > 1)) + "|")
    for name, t in rows:
        cells = " | ".join(f"{t[b] * 1e6:.1f}" for b in backends)
        extra = f" | {t['python'] / t['compiled']:.2f}x" if "compiled" in t else ""
        print(f"| {name} | {cells}{extra} |")


if __name__ == "__main__":
    main()
