"""Time the compiled kernels against their NumPy versions.

Run with ``python3 benchmarks/bench_kernels.py``.  Both backends are
checked for agreement before timing.
"""

import argparse
import timeit

import numpy as np

from dpdgauss.kernels import implementations


def cases(rng, n, reps):
    y = rng.exponential(2.0, size=n)
    ymat = np.ascontiguousarray(rng.exponential(2.0, size=(reps, 40)))
    dmu = np.array([1.0])
    dvar = np.array([4.0])
    return {
        "weight_sum": (y, 2.0, 4.0, 0.3),
        "psi_rows": (y, 2.0, 4.0, dmu, dvar, 0.3),
        "psi_sum": (y, 2.0, 4.0, dmu, dvar, 0.3),
        "exp_rao_sums": (ymat, 2.0, 0.3),
        "poisson_rao_sums": (np.floor(ymat), 2.0, 0.3),
        "mdpde_exp_sums": (ymat, 2.0, 0.3),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=100_000, help="observations for the scalar kernels")
    ap.add_argument("--reps", type=int, default=10_000, help="rows for the batched test kernels")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    impls = implementations()
    if "cython" not in impls:
        print("compiled kernels not built; only the NumPy backend is available")
    args_by_name = cases(np.random.default_rng(0), args.n, args.reps)
    print(f"{'kernel':<18}" + "".join(f"{name:>14}" for name in impls) + (f"{'speedup':>10}" if len(impls) > 1 else ""))
    for name, fargs in args_by_name.items():
        outs = {k: getattr(mod, name)(*fargs) for k, mod in impls.items()}
        ref = np.asarray(outs["python"], dtype=float)
        for k, v in outs.items():
            np.testing.assert_allclose(np.asarray(v, dtype=float), ref, rtol=1e-10, atol=1e-12, err_msg=f"{name} ({k})")
        times = {}
        for k, mod in impls.items():
            fn = getattr(mod, name)
            times[k] = min(timeit.repeat(lambda: fn(*fargs), number=1, repeat=args.repeat))
        row = f"{name:<18}" + "".join(f"{times[k] * 1e3:>11.2f} ms" for k in impls)
        if "cython" in times:
            row += f"{times['python'] / times['cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
