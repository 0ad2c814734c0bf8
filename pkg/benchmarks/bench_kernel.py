"""Time the compiled and pure-Python state expansion kernels on the same keys.

    python benchmarks/bench_kernel.py [--states 2000] [--repeat 3]
"""

import argparse
import time

from morsecensus import explore, kernel
from morsecensus.acampo import seeds_for
from morsecensus.flips import DEFAULT_CONFIG
from morsecensus.flips import expand_key as py_expand_key
from morsecensus.vmcore import PrincipalType


def sample_keys(count):
    keys = []
    for p in PrincipalType:
        cfg = DEFAULT_CONFIG.with_choices(max_states=count)
        try:
            u = explore.close_universe(seeds_for(p, cfg), cfg)
        except explore.CapError as exc:
            u = exc.universe
        keys += u.keys
    return keys


def best_time(fn, keys, codes, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        for k in keys:
            fn(k, codes)
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--states", type=int, default=2000, help="states per principal type")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    keys = sample_keys(args.states)
    codes = DEFAULT_CONFIG.codes()
    py = best_time(py_expand_key, keys, codes, args.repeat)
    print(f"keys: {len(keys)}")
    print(f"python   : {py:8.3f} s  {1e6 * py / len(keys):8.1f} us/state")
    if kernel.BACKEND != "compiled":
        print("compiled : not built")
        return
    assert all(kernel.expand_key(k, codes) == py_expand_key(k, codes) for k in keys[:500])
    cc = best_time(kernel.expand_key, keys, codes, args.repeat)
    print(f"compiled : {cc:8.3f} s  {1e6 * cc / len(keys):8.1f} us/state")
    print(f"speedup  : {py / cc:8.1f}x")


if __name__ == "__main__":
    main()
