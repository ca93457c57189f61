"""Compare the compiled kernel with the pure-Python fallback.

    python benchmarks/bench_backends.py [--repeat N] [--skip-search]

Times three workloads on both backends: the feasibility DP on random
multisets, the largest-sendable-item scan, and a full search.
"""
import argparse
import random
import statistics
import time

from binstretch import _backend
from binstretch.core import SearchParams
from binstretch.feasibility import max_sendable, test_feasible
from binstretch.search import search_main


def timed(fn, repeat):
    runs = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        runs.append(time.perf_counter() - start)
    return statistics.median(runs)


def feasibility_workload(backend, cases):
    return lambda: [test_feasible(items, 3, 16, backend) for items in cases]


def sendable_workload(backend, freqs):
    return lambda: [max_sendable(f, 3, 16, backend) for f in freqs]


def search_workload(backend, m, S, T):
    params = SearchParams(m, S, T, cache_bits=20)
    return lambda: search_main(params, backend)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--skip-search", action="store_true")
    args = parser.parse_args()
    if _backend._kernel is None:
        raise SystemExit("compiled kernel not built; nothing to compare")

    rng = random.Random(1)
    cases = [[rng.randint(1, 16) for _ in range(rng.randint(0, 10))] for _ in range(2000)]
    freqs = []
    for items in cases[:500]:
        f = [0] * 17
        for s in items:
            f[s] += 1
        freqs.append(f)

    workloads = [
        ("test_feasible x2000 (T=16)", lambda b: feasibility_workload(b, cases)),
        ("max_sendable x500 (T=16)", lambda b: sendable_workload(b, freqs)),
    ]
    if not args.skip_search:
        workloads.append(("search 3 bins 19/14", lambda b: search_workload(b, 3, 19, 14)))

    print(f"{'workload':<30} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for label, make in workloads:
        py = timed(make("python"), args.repeat)
        cc = timed(make("compiled"), args.repeat)
        print(f"{label:<30} {py:>9.3f}s {cc:>9.3f}s {py / cc:>7.0f}x", flush=True)


if __name__ == "__main__":
    main()
