"""Time the numba and numpy flavour of every kernel, plus end-to-end preparation.

    python benchmarks/bench_kernels.py [--repeat 5]

End-to-end rows run in subprocesses so that BBQRAM_DISABLE_JIT takes effect.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from bbqram import kernels


def cases(rng):
    leaves = rng.uniform(0, 1, 1 << 16)
    heap = kernels.build_heap_numpy(leaves)
    addrs = np.unique(rng.integers(0, 1 << 14, 4096)).astype(np.int64)
    words = rng.integers(1, 1 << 20, 1 << 14).astype(np.uint64)
    swaps_in = rng.integers(0, 1 << 13, 1 << 16).astype(np.int64)
    pairs = np.array([[i, i + 1] for i in range(0, 12, 2)] + [[1, 3], [5, 7], [3, 7]], dtype=np.int64)
    return {
        "build_heap (K=65536)": lambda f: f(leaves),
        "update_path (x1000)": lambda f: [f(heap, (1 << 16) - 1 + i) for i in range(1000)],
        "route_switches (k=14, 4k addrs)": lambda f: f(np.zeros((1 << 14) - 1, np.int8), addrs, 14),
        "cascade_weights (16k words)": lambda f: f(words, 16, 24),
        "apply_swaps (65k words)": lambda f: f(swaps_in, pairs, 13),
    }


def end_to_end(disable: bool, K: int, repeat: int) -> float:
    code = (
        "import timeit, numpy as np\n"
        "from bbqram import pad_matrix, prepare_state, kernels\n"
        "kernels.warmup()\n"
        f"m = pad_matrix(np.random.default_rng(0).uniform(-1, 1, (1, {K})))\n"
        f"print(min(timeit.repeat(lambda: prepare_state(m), number=1, repeat={repeat})))\n"
    )
    env = {**os.environ, "BBQRAM_DISABLE_JIT": "1" if disable else "0"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    kernels.warmup()
    rng = np.random.default_rng(0)
    print(f"{'kernel':34s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for name, run in cases(rng).items():
        base = name.split()[0]
        fn_np = getattr(kernels, f"{base}_numpy")
        fn_jit = getattr(kernels, f"{base}_jit")
        t_np = min(timeit.repeat(lambda: run(fn_np), number=1, repeat=args.repeat)) * 1e3
        t_jit = min(timeit.repeat(lambda: run(fn_jit), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:34s} {t_np:10.3f} {t_jit:10.3f} {t_np / t_jit:8.1f}x")
    for K in (1024, 16384):
        t_np = end_to_end(True, K, args.repeat) * 1e3
        t_jit = end_to_end(False, K, args.repeat) * 1e3
        print(f"{f'prepare_state (K={K})':34s} {t_np:10.3f} {t_jit:10.3f} {t_np / t_jit:8.1f}x")


if __name__ == "__main__":
    main()
