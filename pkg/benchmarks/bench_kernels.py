"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints the median wall time per call for each kernel and backend and the
speed-up of the compiled one.  Results are checked for agreement first.
"""

import argparse
import math
import time

import numpy as np

from twistkin import kernels


def _median_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def cases():
    rng = np.random.default_rng(0)
    k1, k2 = 0.1, 0.07
    kp = rng.uniform(abs(k1 - k2) + 1e-4, k1 + k2 - 1e-4, 200_000)
    ma = np.full(kp.shape, 1.0 + 0.0j)
    mb = np.full(kp.shape, np.exp(0.3j))
    gh_x, gh_w = np.polynomial.hermite.hermgauss(48)
    sigma = 1e-3 * k2
    n_az = int(math.ceil(4.0 * math.pi * (k1 + 8 * sigma) / sigma))
    kx, ky = 0.12 * math.cos(0.4), 0.12 * math.sin(0.4)
    return {
        "triangle_batch (2e5 points)": lambda: kernels.triangle_batch(k1, k2, kp),
        "amp_sq_batch (2e5 points)": lambda: kernels.amp_sq_batch(k1, k2, kp, 5, -3, ma, mb),
        f"ring_quadrature (48 x {n_az} nodes)": lambda: kernels.ring_quadrature(
            k1, k2, kx, ky, 5, -3, 1.0, 1.0, sigma, gh_x, gh_w, n_az
        ),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the numpy backend is available")
    results = {}
    for name, fn in cases().items():
        for b in backends:
            prev = kernels.use_backend(b)
            try:
                out = fn()
                results[(name, b)] = (_median_time(fn, args.repeat), out)
            finally:
                kernels.use_backend(prev)
    print(f"{'kernel':40s} {'backend':8s} {'median [s]':>12s} {'speed-up':>9s}")
    for name in cases():
        ref_t = results[(name, "python")][0]
        for b in backends:
            t, out = results[(name, b)]
            if b != "python":
                a = np.asarray(out if not isinstance(out, tuple) else out[0])
                r = np.asarray(results[(name, "python")][1] if not isinstance(out, tuple)
                               else results[(name, "python")][1][0])
                assert np.allclose(a, r, rtol=1e-9, atol=0), f"backend mismatch in {name}"
            print(f"{name:40s} {b:8s} {t:12.5f} {ref_t / t:9.1f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
