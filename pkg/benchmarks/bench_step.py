#!/usr/bin/env python3
"""Benchmark the direct-step kernels: compiled extension vs numpy fallback.

The spectral (FFT) route is timed as well for reference, since it is the
cross-check oracle for long evolutions.
"""

import argparse
import time

import numpy as np

from diracqca import _steppy, engine
from diracqca.engine import LatticeState, evolve_spectral
from diracqca.kinematics import MassParam

try:
    from diracqca import _stepcore
except ImportError:
    _stepcore = None


def random_state(n_cells, seed=0):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=(2, n_cells)) + 1j * rng.normal(size=(2, n_cells))
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2))
    return LatticeState(psi[0], psi[1])


def time_kernel(kernel, state, mass, steps, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        start = time.perf_counter()
        out = kernel.evolve_direct(state.psi_r, state.psi_l, mass.n, mass.m, steps)
        best = min(best, time.perf_counter() - start)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--cells", type=int, default=4096)
    parser.add_argument("--steps", type=int, default=1000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    mass = MassParam(0.3)
    state = random_state(args.cells)
    cell_steps = args.cells * args.steps

    print(f"N = {args.cells}, T = {args.steps} (best of {args.repeats})")
    t_py, out_py = time_kernel(_steppy, state, mass, args.steps, args.repeats)
    print(f"numpy fallback : {t_py:8.4f} s   {cell_steps / t_py / 1e6:8.1f} Mcell-steps/s")

    if _stepcore is not None:
        t_cy, out_cy = time_kernel(_stepcore, state, mass, args.steps, args.repeats)
        print(f"cython kernel  : {t_cy:8.4f} s   {cell_steps / t_cy / 1e6:8.1f} Mcell-steps/s")
        print(f"speedup        : {t_py / t_cy:8.2f} x")
        deviation = max(
            float(np.max(np.abs(out_cy[0] - out_py[0]))),
            float(np.max(np.abs(out_cy[1] - out_py[1]))),
        )
        print(f"kernel deviation: {deviation:.3e}")
    else:
        print("cython kernel  : not built (pure-python install)")

    start = time.perf_counter()
    evolve_spectral(state, mass, args.steps)
    print(f"spectral (FFT) : {time.perf_counter() - start:8.4f} s   (single call, any T)")
    print(f"active backend : {engine.step_backend()}")


if __name__ == "__main__":
    main()
