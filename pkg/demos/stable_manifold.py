"""Compute points of the stable manifold of the front with the Lyapunov-Perron solver.

Run: python3 demos/stable_manifold.py
"""
import numpy as np

from frontlab.evolve import evolve_semilinear, select_rates
from frontlab.front import initial_guess, solve_front
from frontlab.grid import make_grid, norm
from frontlab.manifold import LPConfig, StableFoliation, phi_tangency
from frontlab.model import builtin_model
from frontlab.spectrum import mid_window_weight


def main():
    model = builtin_model("gasless_combustion", beta=0.5)
    grid = make_grid(40.0, 801)
    front = solve_front(model, initial_guess(model, (np.zeros(2), model.right_state), grid, 0.5),
                        0.7, grid=grid)
    w = mid_window_weight(front)
    # rates measured at the reference grid (see `frontlab run configs/verify.ini`)
    fol = StableFoliation(model, front, w, LPConfig(select_rates(0.3033, 0.1430)))
    print(f"omega = {fol.cfg.rates.omega:.4f}  horizon T = {fol.cfg.T:.1f}")

    rng = np.random.default_rng(0)
    for q in (0.0, 0.2):
        z0 = fol.stable_sample(q, 0.01, rng)
        S, sol = fol.point(q, z0)
        print(f"q = {q:+.1f}: phi coefficient = {sol.phi_coeff:+.3e}, iterations = "
              f"{sol.iterations}, contraction factors = "
              + ", ".join(f"{f:.3f}" for f in sol.contraction_factors[:4]))
        print(f"         matching residual = {fol.matching(S, q):.1e}")

    z0 = fol.stable_sample(0.0, 0.01, rng)
    print(f"phi is quadratic at the front: slope = {phi_tangency(fol, 0.0, z0)['slope']:.3f}")

    S, _ = fol.point(0.0, z0)
    tr = evolve_semilinear(model, front, 0.0, S - front.Y0, 40.0, 0.01, store_every=500)
    for t, y in zip(tr.times, tr.states):
        print(f"t = {t:5.1f}  |Y - Y_0|_alpha = {norm(grid, w, y):.3e}")


if __name__ == "__main__":
    main()
