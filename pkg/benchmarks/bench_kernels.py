"""Benchmark the compiled kernel core against the numpy fallback.

Run after an editable install:

    python3 benchmarks/bench_kernels.py [--size 200000] [--repeat 7]

Also times one full Sod step pipeline per backend (set via the
IRPDG_PURE_PYTHON environment switch in a subprocess).
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np


def timeit(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def random_states(rng, n, nc, gamma):
    rho = np.exp(rng.uniform(np.log(0.1), np.log(3.0), n))
    s = rng.uniform(0.0, 1.5, n)
    p = np.exp(s) * rho**gamma
    u = rng.uniform(-2.5, 2.5, n)
    w = [rho, rho * u]
    if nc == 4:
        v = rng.uniform(-2.0, 2.0, n)
        w.append(rho * v)
        en = p / (gamma - 1.0) + 0.5 * rho * (u**2 + v**2)
    else:
        en = p / (gamma - 1.0) + 0.5 * rho * u**2
    w.append(en)
    return np.ascontiguousarray(np.stack(w, axis=-1))


def bench_kernels(size, repeat):
    from irpdg._kernels import numpy_backend as npk

    try:
        from irpdg._kernels import _core as core
    except ImportError:
        print("compiled core not available; build the extension first")
        return

    gamma = 1.4
    rng = np.random.default_rng(0)
    wl = random_states(rng, size, 4, gamma)
    wr = random_states(rng, size, 4, gamma)
    ncells = size // 9
    vals = np.ascontiguousarray(
        random_states(rng, ncells * 9, 4, gamma).reshape(ncells, 9, 4).swapaxes(1, 2))
    coeffs = np.ascontiguousarray(rng.standard_normal((ncells, 4, 9)))
    theta = rng.uniform(0.2, 1.0, ncells)

    cases = [
        ("phys_flux", lambda m: m.phys_flux(wl, gamma)),
        ("max_speed", lambda m: m.max_speed(wl, gamma)),
        ("lxf_local_flux", lambda m: m.lxf_local_flux(wl, wr, gamma)),
        ("hll_flux_davis", lambda m: m.hll_flux_davis(wl, wr, gamma)),
        ("hllc_flux_davis", lambda m: m.hllc_flux_davis(wl, wr, gamma)),
        ("phys_fluxes_2d", lambda m: m.phys_fluxes_2d(vals, gamma)),
        ("speed_scan", lambda m: m.speed_scan(vals, gamma)),
        ("functional_minmax", lambda m: m.functional_minmax(vals, gamma, 0.0)),
        ("scale_modes", lambda m: m.scale_modes(coeffs.copy(), theta)),
    ]
    print(f"\nkernel benchmark, n={size} interfaces / {ncells} cells "
          f"(best of {repeat})")
    print(f"{'kernel':<20} {'numpy [ms]':>12} {'cython [ms]':>12} {'speedup':>9}")
    for name, fn in cases:
        t_np = timeit(lambda: fn(npk), repeat) * 1e3
        t_cy = timeit(lambda: fn(core), repeat) * 1e3
        print(f"{name:<20} {t_np:12.2f} {t_cy:12.2f} {t_np / t_cy:9.2f}x")


def bench_pipeline(repeat):
    code = (
        "import time, numpy as np\n"
        "from irpdg.harness import build_solution, run_simulation\n"
        "import irpdg\n"
        "sol = build_solution('ex3', 400, 2)\n"
        "t0 = time.perf_counter()\n"
        "info = run_simulation(sol, 0.04, 'hllc', 'irp', audit_conservation=False)\n"
        "print(f'{irpdg.kernel_backend} {time.perf_counter()-t0:.3f} {info.steps}')\n"
    )
    print("\nfull Sod pipeline (P2, N=400, hllc, T=0.04):")
    for env_val, label in (("0", "cython"), ("1", "numpy")):
        env = dict(os.environ, IRPDG_PURE_PYTHON=env_val)
        best = None
        for _ in range(max(1, repeat // 3)):
            out = subprocess.run([sys.executable, "-c", code], env=env,
                                 capture_output=True, text=True, check=True).stdout.split()
            assert out[0] == label, f"expected backend {label}, got {out[0]}"
            t = float(out[1])
            best = t if best is None else min(best, t)
        print(f"  {label:<8} {best:.3f} s ({out[2]} steps)")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=7)
    args = ap.parse_args()
    bench_kernels(args.size, args.repeat)
    bench_pipeline(args.repeat)
