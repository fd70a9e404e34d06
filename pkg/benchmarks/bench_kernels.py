"""Time the compiled kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Each row reports the best of ``--repeat`` runs and checks that both
backends return identical results.
"""

import argparse
import timeit

import numpy as np

from ratelab import _backend, spectral


def trajectory_case(kind, d, budget):
    lam = np.linspace(1.0, 4.0, d)
    shift = np.zeros(d)
    theta0 = np.full(d, 0.5)
    gamma = {0: 0.4, 1: 0.5, 2: 0.04, 3: 0.05}[kind]
    args = (kind, lam, shift, 0.1, theta0, 1 / 9, 0.9, 0.1, gamma, budget, 0.0, 1e12)
    return lambda impl: impl.trajectory(*args)


def gelfand_case(length, order):
    rng = np.random.default_rng(0)
    lam = np.diag(np.linspace(1.0, 4.0, order // 2))
    mats = np.stack([spectral.build_momentum_block_matrix(
        lam, 1 / 9, 0.5 * (1 + 0.1 * rng.standard_normal() * 0.9 ** n)) for n in range(length)])
    return lambda impl: impl.gelfand_scan(np.ascontiguousarray(mats), np.log(0.4))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    impls = _backend.backends()
    if "cython" not in impls:
        print("compiled kernels not built; only the fallback is available")
    cases = [(f"trajectory {name} d=10 n=5000", trajectory_case(kind, 10, 5000))
             for name, kind in (("GD", 0), ("Momentum", 1), ("RMSprop", 2), ("Adam", 3))]
    cases += [("gelfand_scan 128 x 4x4", gelfand_case(128, 4)),
              ("gelfand_scan 256 x 8x8", gelfand_case(256, 8))]

    print(f"{'case':<34}" + "".join(f"{n:>12}" for n in impls) + f"{'speedup':>10}")
    for label, fn in cases:
        times, outputs = {}, {}
        for name, impl in impls.items():
            outputs[name] = fn(impl)
            times[name] = min(timeit.repeat(lambda: fn(impl), number=1, repeat=args.repeat))
        if len(outputs) == 2:
            a, b = outputs["python"], outputs["cython"]
            if isinstance(a, tuple):
                assert all(np.array_equal(x, y) for x, y in zip(a[:3], b[:3])) and a[3] == b[3]
            else:
                np.testing.assert_allclose(a, b, rtol=1e-12)
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{label:<34}" + "".join(f"{times[n] * 1e3:>10.3f}ms" for n in impls)
              + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
