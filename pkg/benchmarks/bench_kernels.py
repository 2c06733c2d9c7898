"""Timing of the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--sizes 65,129,257] [--repeat 5]

Prints the best-of-N wall time per kernel and backend. The first numba call
is excluded (compilation happens in a warm-up pass).
"""
import argparse
import timeit

import numpy as np

from phaselab import kernels


def cases(n, rng):
    h = 1.0 / (n - 1)
    coef = np.ascontiguousarray(0.5 + rng.random((n, n)))
    phi = np.ascontiguousarray(rng.standard_normal((n, n)))
    indptr, indices, data, diag_pos = kernels.numpy_impl.assemble_flux(coef, h, h)
    m = len(indptr) - 1
    x = rng.standard_normal(m)
    b = kernels.numpy_impl.csr_matvec(indptr, indices, data, x)
    dinv = 1.0 / data[diag_pos]
    tol = 1e-10 * np.linalg.norm(b)
    return {
        "assemble_flux": lambda impl: impl.assemble_flux(coef, h, h),
        "flux_divergence": lambda impl: impl.flux_divergence(coef, phi, h, h),
        "csr_matvec": lambda impl: impl.csr_matvec(indptr, indices, data, x),
        "pcg": lambda impl: impl.pcg(indptr, indices, data, b, np.zeros(m), dinv, tol, 10 * m),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="65,129,257")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    impls = {"numpy": kernels.numpy_impl}
    if kernels.numba_impl is not None:
        impls["numba"] = kernels.numba_impl
    rng = np.random.default_rng(0)
    print(f"{'n':>5} {'kernel':<16}" + "".join(f"{name:>12}" for name in impls) + f"{'speedup':>10}")
    for n in (int(s) for s in args.sizes.split(",")):
        for name, fn in cases(n, rng).items():
            times = {}
            for label, impl in impls.items():
                fn(impl)  # warm-up / compile
                number = 1 if name == "pcg" else 20
                times[label] = min(timeit.repeat(lambda: fn(impl), number=number, repeat=args.repeat)) / number
            row = f"{n:>5} {name:<16}" + "".join(f"{times[k] * 1e3:>10.3f}ms" for k in impls)
            if "numba" in times:
                row += f"{times['numpy'] / times['numba']:>9.1f}x"
            print(row)


if __name__ == "__main__":
    main()
