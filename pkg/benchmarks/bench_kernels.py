"""Compare the numpy and compiled kernel backends on representative sizes.

    python benchmarks/bench_kernels.py [--repeat 3] [--json out.json]
"""
import argparse
import json
import timeit

import numpy as np

from wigprop import _pykernels
from wigprop.symplectic import harmonic_flow, magnetic_flow

try:
    from wigprop import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def cases(rng):
    n = 128
    f = rng.normal(size=n) + 1j * rng.normal(size=n)
    g = rng.normal(size=n) + 1j * rng.normal(size=n)
    F = rng.normal(size=(32, 32)) + 1j * rng.normal(size=(32, 32))
    x = (np.arange(1024) - 512)[:, None] / 16.0
    eta = (np.arange(1024) - 512)[:, None] / 64.0
    S = harmonic_flow(0.7)
    P, Q, R = np.array([[-0.84]]), np.array([[1.3]]), np.array([[0.84]])
    coeff = rng.normal(size=1024) + 0j
    W = rng.normal(size=(256, 256)) + 0j
    X, Y = np.meshgrid(np.linspace(-9, 9, 256), np.linspace(-9, 9, 256), indexing="ij")
    xq = (S[0, 0] * X + S[0, 1] * Y).ravel()
    yq = (S[1, 0] * X + S[1, 1] * Y).ravel()
    Wa = rng.normal(size=(40, 40))
    M = magnetic_flow(0.6, 1.0, 1.0, [[0.0, 1.0], [-1.0, 0.0]])
    return {
        "lag_products n=128": lambda k: k.lag_products(f, g),
        "shear n=128": lambda k: k.shear(f[:, None] * g[None, :]),
        "lag_products_2d n=32": lambda k: k.lag_products_2d(F, F),
        "type1_sum 1024x1024": lambda k: k.type1_sum(x, eta, P, Q, R, None, coeff),
        "type1_sum adjoint 1024x1024": lambda k: k.type1_sum(x, eta, P, Q, R, None, coeff, True),
        "interp_bilinear 256^2": lambda k: k.interp_bilinear(W, -8.0, 1 / 16, -4.0, 1 / 32, xq, yq),
        "transport_marginals n=40": lambda k: k.transport_marginals(Wa, Wa, M, -2.0, 0.1, -2.5, 0.125),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", help="write results to this file")
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    rows = []
    print(f"{'kernel':32s} {'python [s]':>12s} {'cython [s]':>12s} {'speedup':>9s} {'max diff':>10s}")
    for name, run in cases(rng).items():
        t_py = min(timeit.repeat(lambda: run(_pykernels), number=1, repeat=args.repeat))
        row = {"kernel": name, "python": t_py, "cython": None, "speedup": None, "max_diff": None}
        if _ckernels is not None:
            t_c = min(timeit.repeat(lambda: run(_ckernels), number=1, repeat=args.repeat))
            a, b = run(_pykernels), run(_ckernels)
            a, b = (a, b) if not isinstance(a, tuple) else (np.stack(a), np.stack(b))
            row.update(cython=t_c, speedup=t_py / t_c, max_diff=float(np.abs(a - b).max()))
            print(f"{name:32s} {t_py:12.4f} {t_c:12.4f} {t_py / t_c:9.1f} {row['max_diff']:10.1e}")
        else:
            print(f"{name:32s} {t_py:12.4f} {'n/a':>12s}")
        rows.append(row)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
