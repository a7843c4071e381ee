"""Benchmark the reservoir-kernel evaluation: JIT-compiled vs pure numpy.

The kernel is the hot spot of the transient-population quadrature: every
adaptive panel evaluates it at 15 energy nodes, and a single time point
needs hundreds to thousands of panels.  Run with::

    python3 benchmarks/bench_kernels.py

The script times the compiled kernels (default) and the numpy fallback
(selected by the EP_DYNAMICS_NO_NUMBA environment flag) in subprocesses so
both variants are measured from a clean import.
"""

import json
import os
import subprocess
import sys
import textwrap

WORKER = textwrap.dedent("""
    import json, sys, time
    import numpy as np
    from ep_dynamics import _kernels as kern
    from ep_dynamics.heisenberg import build_evolution_matrix, propagator
    from ep_dynamics.model import ChainParams

    params = ChainParams(n_dots=2, eps=(1.0, 1.0), g=0.1, gamma=(0.5, 0.1))
    a = build_evolution_matrix(params)
    tau = 20.0
    d = propagator(params, tau)
    args = (a[0, 0], a[0, 1], a[1, 0], a[1, 1],
            d[0, 0], d[0, 1], d[1, 0], d[1, 1])
    eps = np.linspace(-40.0, 40.0, 15)
    f1 = 1.0 / (np.exp(np.clip(eps, -700.0, 700.0)) + 1.0)
    f2 = 1.0 / (np.exp(np.clip(eps / 0.1, -700.0, 700.0)) + 1.0)

    # warm-up (includes JIT compilation when enabled)
    kern.integrand(eps, tau, *args, f1, f2, 0.5, 0.1, kern.MODE_TRANSIENT)
    kern.osc_coeff(eps, *args, f1, f2, 0.5, 0.1)

    n_rep = 20000
    t0 = time.perf_counter()
    for _ in range(n_rep):
        kern.integrand(eps, tau, *args, f1, f2, 0.5, 0.1,
                       kern.MODE_TRANSIENT)
    t_int = (time.perf_counter() - t0) / n_rep

    t0 = time.perf_counter()
    for _ in range(n_rep):
        kern.osc_coeff(eps, *args, f1, f2, 0.5, 0.1)
    t_osc = (time.perf_counter() - t0) / n_rep

    json.dump({"uses_numba": kern.USE_NUMBA,
               "integrand_us": t_int * 1e6,
               "osc_coeff_us": t_osc * 1e6}, sys.stdout)
""")


def run_variant(no_numba: bool) -> dict:
    env = dict(os.environ)
    if no_numba:
        env["EP_DYNAMICS_NO_NUMBA"] = "1"
    else:
        env.pop("EP_DYNAMICS_NO_NUMBA", None)
    out = subprocess.run([sys.executable, "-c", WORKER], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main():
    compiled = run_variant(no_numba=False)
    fallback = run_variant(no_numba=True)
    print(f"{'variant':<14} {'uses_numba':<11} {'integrand':>12} "
          f"{'osc_coeff':>12}")
    for name, res in (("compiled", compiled), ("numpy", fallback)):
        print(f"{name:<14} {str(res['uses_numba']):<11} "
              f"{res['integrand_us']:>9.2f} us {res['osc_coeff_us']:>9.2f} us")
    if compiled["uses_numba"]:
        speedup = fallback["integrand_us"] / compiled["integrand_us"]
        print(f"\nintegrand speedup: {speedup:.1f}x")
    else:
        print("\nnumba unavailable; both runs used the numpy fallback")


if __name__ == "__main__":
    main()
