"""Compare the compiled kernels with the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``. Prints one row per kernel
with the best-of-N wall time for each backend and the speedup.
"""
import argparse
import sys
import timeit

import numpy as np

from mkclab._kernels import pykernels

try:
    from mkclab._kernels import _ckernels
except ImportError:
    _ckernels = None


def _cases(rounds):
    rng = np.random.default_rng(0)
    counts = np.array([4, 4, 4, 4], dtype=np.int64)
    offsets = np.array([0, 4, 8, 12], dtype=np.int64)
    p = rng.random((16, 8))
    cdf = np.cumsum(p / p.sum(axis=1, keepdims=True), axis=1)
    choice_counts = np.full((3, 2), 5, dtype=np.int64)
    atoms = np.cumsum(np.full(64, 1 / 64))
    h = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    h = (h + h.conj().T) / 2
    return {
        "counter_uniforms": lambda k: k.counter_uniforms(1, 0, rounds, 0),
        "sample_contextual": lambda k: k.sample_contextual(1, rounds, offsets, counts, cdf, True),
        "sample_product": lambda k: k.sample_product(1, rounds, choice_counts, atoms),
        "pythagorean_quadruples(100)": lambda k: k.pythagorean_quadruples(100),
        "jacobi_hermitian(8x8)": lambda k: k.jacobi_hermitian(h, 1e-12, 100),
    }


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rounds", type=int, default=10 ** 6, help="samples per sampler call")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels are not built; only the numpy backend is timed", file=sys.stderr)
    print(f"{'kernel':<30}{'numpy [s]':>12}{'cython [s]':>12}{'speedup':>10}")
    for name, call in _cases(args.rounds).items():
        t_py = _best(lambda: call(pykernels), args.repeat)
        if _ckernels is None:
            print(f"{name:<30}{t_py:>12.5f}{'-':>12}{'-':>10}")
            continue
        t_c = _best(lambda: call(_ckernels), args.repeat)
        print(f"{name:<30}{t_py:>12.5f}{t_c:>12.5f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
