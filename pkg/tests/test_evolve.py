import numpy as np
import pytest
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from frontlab.evolve import (BlowUpError, CrankNicolson, Nonlinearity, RateBundle, Trajectory,
                             check_nonlinearity_estimates, duhamel_defect, eval_Fq, evolve_full,
                             evolve_semilinear, fit_rate, propagate_linear, select_rates,
                             semigroup_decay_rate, write_trajectory_csv)
from frontlab.grid import smooth_random_fields
from oracles import gauss_legendre_remainder


def test_rate_bundle_chain():
    r = select_rates(0.3, 0.14)
    assert r.omega == pytest.approx(0.07) and r.omega < r.rho < r.nu
    assert select_rates(0.1, 0.3).rho == pytest.approx(0.1)
    with pytest.raises(ValueError):
        RateBundle(0.1, 0.05, 0.2)
    with pytest.raises(ValueError):
        select_rates(-1, 0.1)


def test_fit_rate():
    t = np.linspace(0, 10, 50)
    r, C = fit_rate(t, 3 * np.exp(-0.4 * t))
    assert r == pytest.approx(0.4) and C == pytest.approx(3.0)
    assert fit_rate(t, np.zeros_like(t)) == (np.inf, 0.0)


def test_crank_nicolson_second_order_against_expm(small_setup):
    model, p, w, op, pair = small_setup
    y0 = smooth_random_fields(p.grid, 2, 1, np.random.default_rng(0))[0]
    exact = expm_multiply(op.L * 2.0, y0.ravel()).reshape(y0.shape)
    errs = [np.max(np.abs(propagate_linear(op, y0, 2.0, dt).states[-1] - exact))
            for dt in (0.02, 0.01)]
    assert np.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.2)
    with pytest.raises(ValueError):
        CrankNicolson(op.L, 0.0)
    with pytest.raises(ValueError):
        propagate_linear(op, y0, 0.001, 0.01)


def test_nonlinearity_paths_agree_with_oracle(small_setup, rng):
    model, p, w, op, pair = small_setup
    F = Nonlinearity(model, op.profile.Y0)
    y = 0.05 * smooth_random_fields(p.grid, 2, 3, rng, extent=5.0)
    ref = gauss_legendre_remainder(model.R, model.dR, op.profile.Y0, y)
    assert np.allclose(F(y), ref, atol=1e-12)
    assert np.allclose(F(y, "quadrature"), ref, atol=1e-12)
    assert np.all(F(np.zeros_like(y[0])) == 0)
    with pytest.raises(ValueError):
        F(y, "taylor")


def test_quadratic_scaling(small_setup, rng):
    model, p, w, op, pair = small_setup
    y = smooth_random_fields(p.grid, 2, 1, rng, extent=5.0)[0]
    eps = np.array([0.01, 0.005, 0.0025])
    vals = [np.max(np.abs(eval_Fq(model, p, 0.0, e * y))) for e in eps]
    slope = np.polyfit(np.log(eps), np.log(vals), 1)[0]
    assert 1.9 <= slope <= 2.1


def test_semilinear_matches_full_equation(small_setup, rng):
    model, p, w, op, pair = small_setup
    y0 = 0.01 * smooth_random_fields(p.grid, 2, 1, rng, extent=5.0)[0]
    a = evolve_semilinear(model, p, 0.0, y0, 2.0, 0.01, op=op)
    b = evolve_full(model, p, p.Y0 + y0, 2.0, 0.01)
    assert np.max(np.abs(a.states[-1] + p.Y0 - b.states[-1])) < 1e-6
    assert len(a) == 201 and isinstance(a, Trajectory)


def test_cn_implicit_satisfies_discrete_duhamel(small_setup, rng):
    model, p, w, op, pair = small_setup
    st = CrankNicolson(op.L, 0.05)
    y0 = 0.01 * smooth_random_fields(p.grid, 2, 1, rng, extent=5.0)[0]
    tr = evolve_semilinear(model, p, 0.0, y0, 2.0, 0.05, "cn_implicit", op=op, stepper=st)
    F = Nonlinearity(model, op.profile.Y0)
    d = duhamel_defect(st, tr.states, F(tr.states))
    assert np.max(np.abs(d)) < 1e-14
    with pytest.raises(ValueError):
        evolve_semilinear(model, p, 0.0, y0, 1.0, scheme="rk4")


def test_blow_up_detected(small_setup):
    model, p, w, op, pair = small_setup
    grow = CrankNicolson(5.0 * sp.identity(op.L.shape[0], format="csr"), 0.01)
    y0 = 1e-3 * np.ones((p.grid.N, 2))
    with pytest.raises(BlowUpError):
        evolve_semilinear(model, p, 0.0, y0, 5.0, 0.01, op=op, stepper=grow)


def test_small_data_guard(small_setup):
    model, p, w, op, pair = small_setup
    with pytest.raises(ValueError, match="small-data"):
        evolve_semilinear(model, p, 0.0, np.ones((p.grid.N, 2)), 1.0, delta=0.1, weight=w)


def test_semigroup_decay_small_grid(small_setup):
    model, p, w, op, pair = small_setup
    rep = semigroup_decay_rate(op, pair, w, T=30, dt=0.02, samples=2,
                               rng=np.random.default_rng(0))
    assert rep["nu_hat"] > 0.09
    assert rep["beta_bounded"]
    assert rep["center_drift"] < 1e-5


def test_nonlinearity_estimates_finite(small_setup):
    model, p, w, op, pair = small_setup
    rep = check_nonlinearity_estimates(model, p, 0.0, w, 10, 0.05, np.random.default_rng(0))
    assert all(np.isfinite(v) and v > 0 for v in rep["constants"].values())


def test_trajectory_csv(tmp_path, small_setup):
    model, p, w, op, pair = small_setup
    tr = Trajectory(np.array([0.0, 1.0]), np.zeros((2, p.grid.N, 2)))
    write_trajectory_csv(tmp_path / "t.csv", tr, p.grid, w, 1)
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines == ["t,sup,alpha,v_sup", "0.0,0.0,0.0,0.0", "1.0,0.0,0.0,0.0"]
