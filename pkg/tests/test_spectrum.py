import numpy as np
import pytest
import scipy.sparse as sp

from frontlab.grid import make_weight, smooth_random_fields
from frontlab.model import eval_jacobian
from frontlab.spectrum import (adjoint_zero_mode, apply_projections, assemble_linearization,
                               essential_spectrum_curves, limit_operator, mid_window_weight,
                               point_spectrum, projection_lipschitz_check,
                               weighted_expression_operator, write_curves_csv)


def test_mid_window_weight_is_admissible(small_front):
    model, p = small_front
    w = mid_window_weight(p)
    assert w.alpha == (-p.omega_minus / 2, p.omega_plus / 2)
    w.check_admissible(p.omega_minus, p.omega_plus)
    with pytest.raises(ValueError, match="alphaomega"):
        assemble_linearization(model, p, 0.0, make_weight((-p.omega_minus * 1.1, 0.1)))


def test_conjugation(small_setup):
    model, p, w, op, pair = small_setup
    gam = op.gamma
    y = np.random.default_rng(0).standard_normal(gam.size) * np.repeat(
        np.exp(-p.grid.x**2 / 50), model.n)
    assert np.allclose(op.Lw @ (gam * y), gam * (op.L @ y), rtol=1e-10, atol=1e-10)
    B = op.Bq.toarray()[:4, :4]
    J = eval_jacobian(model, op.profile.Y0[:2]) - eval_jacobian(model, np.zeros(2))
    assert np.allclose(B, sp.block_diag(list(J)).toarray())


def test_essential_curves_solve_characteristic_polynomial(small_front):
    model, p = small_front
    w = mid_window_weight(p)
    k = np.linspace(-5, 5, 41)
    ess = essential_spectrum_curves(model, p, w, k)
    for side, Ys, a in (("minus", p.Y_minus, w.alpha_minus), ("plus", p.Y_plus, w.alpha_plus)):
        s = 1j * k - a
        M = s[:, None, None] ** 2 * np.diag(model.D) + p.c * s[:, None, None] * np.eye(2) \
            + eval_jacobian(model, Ys)
        tr = np.trace(M, axis1=1, axis2=2)
        det = np.linalg.det(M)
        for lam in ess["curves"][side].T:
            assert np.allclose(lam**2 - tr * lam + det, 0, atol=1e-10)
    assert ess["ess_sup_real"] < 0 and ess["pass"]


def test_unweighted_essential_spectrum_touches_axis(small_front):
    model, p = small_front
    ess = essential_spectrum_curves(model, p, make_weight((0.0, 0.0)))
    assert abs(ess["ess_sup_real"]) <= 1e-8
    assert not ess["pass"]


def test_curves_csv(tmp_path, small_front):
    model, p = small_front
    ess = essential_spectrum_curves(model, p, mid_window_weight(p), np.linspace(-1, 1, 3))
    write_curves_csv(tmp_path / "c.csv", ess)
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "k,side,branch,re,im" and len(lines) == 1 + 2 * 2 * 3


def test_point_spectrum(small_setup):
    model, p, w, op, pair = small_setup
    spec = point_spectrum(op)
    assert spec.hypothesis_pass == {"essential_spectrum_stable": True,
                                    "simple_zero_eigenvalue": True}
    assert abs(spec.lambda0) <= 1e-4 * spec.nu
    assert spec.cosine >= 0.999
    assert 0 < spec.nu_used < spec.nu
    assert set(spec.summary()) == {"ess_sup_real", "nu", "lambda0", "hypothesis_pass"}


def test_product_rule_operator_has_same_spectrum(small_setup):
    """Two discretizations of the weighted operator agree on the eigenvalues
    near the axis (entries differ, so only spectra are compared)."""
    model, p, w, op, pair = small_setup
    M = weighted_expression_operator(model, op.profile, w)
    a = np.sort(np.linalg.eigvals(op.Lw.toarray()).real)[::-1][:3]
    b = np.sort(np.linalg.eigvals(M.toarray()).real)[::-1][:3]
    assert np.allclose(a, b, atol=2e-3)


def test_projection_algebra(small_setup, rng):
    model, p, w, op, pair = small_setup
    assert pair.pi(pair.Yqprime) == pytest.approx(1.0, abs=1e-10)
    assert pair.kernel_residual < 1e-10
    F = smooth_random_fields(p.grid, model.n, 100, rng)
    Pc, Ps, pi = apply_projections(pair, F)
    assert np.allclose(Pc + Ps, F, atol=1e-14)
    Pc2, _, _ = apply_projections(pair, Pc)
    assert np.max(np.abs(Pc2 - Pc)) <= 1e-10 * np.max(np.abs(Pc))
    assert np.max(np.abs(pair.pi(Ps))) <= 1e-10 * np.max(np.abs(F))
    one = apply_projections(pair, F[3])
    assert one[2] == pytest.approx(pi[3], rel=1e-13)


def test_projection_lipschitz_ladder(small_setup, rng):
    model, p, w, op, pair = small_setup
    ratios = []
    for q in (0.025, 0.05, 0.1):
        pq = adjoint_zero_mode(assemble_linearization(model, p, q, w))
        ratios.append(projection_lipschitz_check(pair, pq, np.random.default_rng(0), 20)["norm_ratio"])
    assert max(ratios) <= 2 * min(ratios)
    same = projection_lipschitz_check(pair, pair, rng, 3)
    assert same["norm_ratio"] == 0.0


def test_limit_operator_blocks(small_front):
    model, p = small_front
    w = mid_window_weight(p)
    op, (L1, L2) = limit_operator(model, "minus", w, p.grid, p)
    N = p.grid.N
    assert L1.shape == (N, N) and L2.shape == (N, N)
    # V block at the burnt state: c d_x - beta exp(-beta); constants see only the rate
    ones = np.ones(N)
    beta = model.params["beta"]
    assert np.allclose((L2 @ ones)[10:-10], -beta * np.exp(-beta), rtol=1e-12)
    assert np.allclose((L1 @ ones)[10:-10], 0.0, atol=1e-10)
    assert limit_operator(model, "plus", w, p.grid, p)[1] is None
    with pytest.raises(ValueError):
        limit_operator(model, "middle", w, p.grid, p)
