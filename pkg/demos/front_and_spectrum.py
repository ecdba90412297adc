"""Solve the gasless combustion front and inspect its weighted spectrum.

Run: python3 demos/front_and_spectrum.py [--X 40 --N 801]
"""
import argparse

import numpy as np

from frontlab.front import initial_guess, solve_front
from frontlab.grid import make_grid, make_weight
from frontlab.model import builtin_model
from frontlab.spectrum import (assemble_linearization, essential_spectrum_curves,
                               mid_window_weight, point_spectrum)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--X", type=float, default=40.0)
    ap.add_argument("--N", type=int, default=801)
    ap.add_argument("--beta", type=float, default=0.5)
    a = ap.parse_args()

    model = builtin_model("gasless_combustion", beta=a.beta)
    grid = make_grid(a.X, a.N)
    guess = initial_guess(model, (np.zeros(2), model.right_state), grid, 0.5)
    front = solve_front(model, guess, 0.7, grid=grid)
    print(f"speed c = {front.c:.10f}  residual = {front.residual:.1e}")
    print(f"tail rates: omega_- = {front.omega_minus:.4f}, omega_+ = {front.omega_plus:.4f}")

    # Without a weight the essential spectrum reaches the imaginary axis.
    bare = essential_spectrum_curves(model, front, make_weight((0.0, 0.0)))
    print(f"unweighted essential sup Re = {bare['ess_sup_real']:.2e}")

    w = mid_window_weight(front)
    ess = essential_spectrum_curves(model, front, w)
    spec = point_spectrum(assemble_linearization(model, front, 0.0, w))
    print(f"weight rates = {w.alpha}  weighted essential sup Re = {ess['ess_sup_real']:.4f}")
    print(f"translation eigenvalue = {spec.lambda0:.2e}  gap nu = {spec.nu:.4f}")
    print("rightmost eigenvalues:", np.round(spec.eigenvalues[:5], 4))


if __name__ == "__main__":
    main()
