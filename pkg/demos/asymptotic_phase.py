"""Locate the leaf of a perturbed front: root finding on the matching function
versus long-time evolution.

Run: python3 demos/asymptotic_phase.py
"""
import numpy as np

from frontlab.evolve import select_rates
from frontlab.front import initial_guess, solve_front
from frontlab.grid import make_grid
from frontlab.manifold import LPConfig, StableFoliation, foliate
from frontlab.model import builtin_model
from frontlab.spectrum import mid_window_weight


def main():
    model = builtin_model("gasless_combustion", beta=0.5)
    grid = make_grid(40.0, 801)
    front = solve_front(model, initial_guess(model, (np.zeros(2), model.right_state), grid, 0.5),
                        0.7, grid=grid)
    fol = StableFoliation(model, front, mid_window_weight(front),
                          LPConfig(select_rates(0.3033, 0.1430)))
    rng = np.random.default_rng(1)
    for q in (-0.2, 0.1):
        S, _ = fol.point(q, fol.stable_sample(q, 0.004, rng))
        rf = foliate(S, fol)
        ap = foliate(S, fol, method="asymptotic_phase")
        print(f"true shift {q:+.3f}: root find {rf.q_star:+.6f} (unique: {rf.unique}), "
              f"asymptotic phase {ap.q_star:+.6f}")


if __name__ == "__main__":
    main()
