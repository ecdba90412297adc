"""Linearization about the front, weighted spectra and the center projection.

The weighted operator is the exact discrete conjugation
``Lw = Gamma L Gamma^{-1}`` with ``Gamma = diag(gamma(x_i))``.  The essential
spectrum is located from the constant-coefficient symbols at the two end
states; the point spectrum comes from the matrix.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .front import FrontProfile, _block_diag, frame_operator, shift_front
from .grid import SpatialGrid, Weight, beta_norm, norm, smooth_random_fields
from .linalg import eigs_rightmost
from .model import ReactionModel, check_product_structure, eval_jacobian

__all__ = ["WeightedOperator", "SpectralDecomposition", "ProjectionPair",
           "assemble_linearization", "limit_operator", "essential_spectrum_curves",
           "point_spectrum", "adjoint_zero_mode", "apply_projections",
           "projection_lipschitz_check", "weighted_expression_operator",
           "write_curves_csv", "mid_window_weight"]


@dataclass(frozen=True)
class WeightedOperator:
    """``L`` (unweighted), ``Lw`` (conjugated) and ``Bq = dR(Y_q) - dR(0)``."""
    L: sp.csr_matrix
    Lw: sp.csr_matrix
    Bq: sp.csr_matrix
    q: float
    weight: Weight
    grid: SpatialGrid
    profile: FrontProfile | None = field(default=None, repr=False)
    model: ReactionModel | None = field(default=None, repr=False)

    @property
    def gamma(self) -> np.ndarray:
        """Weight repeated per component (node-major)."""
        n = self.L.shape[0] // self.grid.N
        return np.repeat(self.weight.gamma(self.grid.x), n)


def _conjugate(L, gam):
    return (sp.diags(gam) @ L @ sp.diags(1.0 / gam)).tocsr()


def mid_window_weight(profile: FrontProfile, x0: float = 5.0) -> Weight:
    """Weight in the middle of the admissible window of the fitted tail rates."""
    return Weight(-0.5 * profile.omega_minus, 0.5 * profile.omega_plus, x0)


def assemble_linearization(model: ReactionModel, profile: FrontProfile, q: float,
                           weight: Weight, grid: SpatialGrid | None = None,
                           check_weight: bool = True) -> WeightedOperator:
    """Assemble ``L_q Y = D Y'' + c Y' + dR(Y_q) Y`` with zero ghosts."""
    grid = profile.grid if grid is None else grid
    if grid != profile.grid:
        raise ValueError("grid must match the profile grid")
    if check_weight:
        weight.check_admissible(profile.omega_minus, profile.omega_plus)
    prof = shift_front(profile, q)
    A, *_ = frame_operator(grid, model.D, prof.c, prof.order, prof.upwind)
    J = eval_jacobian(model, prof.Y0)
    L = (A + _block_diag(J)).tocsr()
    Bq = _block_diag(J - eval_jacobian(model, np.zeros(model.n))[None])
    gam = np.repeat(weight.gamma(grid.x), model.n)
    Lw = L.copy() if weight.trivial else _conjugate(L, gam)
    return WeightedOperator(L, Lw, Bq, float(q), weight, grid, prof, model)


def weighted_expression_operator(model, profile: FrontProfile, weight: Weight) -> sp.csr_matrix:
    """Direct discretization of the conjugated expression.

    Uses ``gamma d_x gamma^{-1} = d_x - eta'`` and
    ``gamma d_xx gamma^{-1} = d_xx - 2 eta' d_x + (eta'^2 - eta'')``,
    with the same stencils as the unweighted operator.
    """
    g = profile.grid
    n = model.n
    e1 = np.repeat(weight.eta(g.x, 1), n)
    e2 = np.repeat(weight.eta(g.x, 2), n)
    A2, _, _, _ = frame_operator(g, model.D, 0.0, profile.order, profile.upwind)
    _, A1, _, _ = frame_operator(g, model.D, profile.c, profile.order, profile.upwind)
    Dd = np.tile(model.D, g.N)
    # first derivative used alongside diffusion: centered for every component
    _, A1c, _, _ = frame_operator(g, np.ones(n), 1.0, profile.order, profile.upwind)
    M = (A2 + profile.c * A1
         - sp.diags(2 * Dd * e1) @ A1c + sp.diags(Dd * (e1**2 - e2))
         - sp.diags(profile.c * e1))
    return (M + _block_diag(eval_jacobian(model, profile.Y0))).tocsr()


def limit_operator(model: ReactionModel, side: str, weight: Weight, grid: SpatialGrid,
                   profile: FrontProfile):
    """Constant-coefficient operator at an end state.

    Returns ``(op, blocks)``; for ``side='minus'`` `blocks` is
    ``(L1, L2)`` with ``L1 = D1 d_xx + c d_x + A1`` and
    ``L2 = D2 d_xx + c d_x + dV R2(0, 0)``; otherwise ``None``.
    """
    if side not in ("minus", "plus"):
        raise ValueError("side must be 'minus' or 'plus'")
    if not check_product_structure(model, 32)["pass"]:
        raise ValueError("model fails the product-structure check")
    Ystar = profile.Y_minus if side == "minus" else profile.Y_plus
    c = profile.c
    A, *_ = frame_operator(grid, model.D, c, profile.order, profile.upwind)
    J0 = eval_jacobian(model, Ystar)
    L = (A + sp.kron(sp.identity(grid.N), J0)).tocsr()
    gam = np.repeat(weight.gamma(grid.x), model.n)
    Lw = L.copy() if weight.trivial else _conjugate(L, gam)
    op = WeightedOperator(L, Lw, sp.csr_matrix(L.shape), np.nan, weight, grid, profile, model)
    if side == "plus":
        return op, None
    n1 = model.n1
    A1m, *_ = frame_operator(grid, model.D[:n1], c, profile.order, profile.upwind)
    A2m, *_ = frame_operator(grid, model.D[n1:], c, profile.order, profile.upwind)
    L1 = (A1m + sp.kron(sp.identity(grid.N), model.A1)).tocsr() if n1 else None
    L2 = (A2m + sp.kron(sp.identity(grid.N), J0[n1:, n1:])).tocsr()
    return op, (L1, L2)


def essential_spectrum_curves(model: ReactionModel, profile: FrontProfile, weight: Weight,
                              k_grid=None) -> dict:
    """Eigenvalues of ``M(k) = (ik - a)^2 D + c (ik - a) + dR(Y_end)`` per side.

    Returns ``{'k', 'curves': {'minus': (K, n), 'plus': (K, n)},
    'ess_sup_real', 'pass'}``; branches are sorted by decreasing real part.
    """
    k = np.linspace(-20, 20, 2001) if k_grid is None else np.asarray(k_grid, float)
    D = np.diag(model.D).astype(complex)
    curves = {}
    for side, Ystar, a in (("minus", profile.Y_minus, weight.alpha_minus),
                           ("plus", profile.Y_plus, weight.alpha_plus)):
        J = eval_jacobian(model, Ystar)
        s = 1j * k - a
        M = s[:, None, None] ** 2 * D + profile.c * s[:, None, None] * np.eye(model.n) + J
        lam = np.linalg.eigvals(M)
        order = np.argsort(-lam.real, axis=1, kind="stable")
        curves[side] = np.take_along_axis(lam, order, axis=1)
    sup = float(max(np.max(c.real) for c in curves.values()))
    return {"k": k, "curves": curves, "ess_sup_real": sup, "pass": sup < 0}


def write_curves_csv(path, ess: dict) -> None:
    """Columns ``k, side, branch, re, im``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "side", "branch", "re", "im"])
        for side, lam in ess["curves"].items():
            for b in range(lam.shape[1]):
                for kk, l in zip(ess["k"], lam[:, b]):
                    w.writerow([repr(float(kk)), side, b, repr(float(l.real)), repr(float(l.imag))])


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    zero_mode: np.ndarray
    ess_sup_real: float
    nu: float
    lambda0: complex
    cosine: float
    hypothesis_pass: dict
    localized: np.ndarray = field(default=None, repr=False)

    @property
    def nu_used(self) -> float:
        """Gap shrunk by 10% for downstream use."""
        return 0.9 * self.nu

    def summary(self) -> dict:
        return {"ess_sup_real": self.ess_sup_real, "nu": self.nu,
                "lambda0": [self.lambda0.real, self.lambda0.imag],
                "hypothesis_pass": dict(self.hypothesis_pass)}


def point_spectrum(op: WeightedOperator, count: int = 8, shift: float = 0.05,
                   k_grid=None, seed: int = 0) -> SpectralDecomposition:
    """Rightmost eigenvalues of ``Lw`` and the spectral gap.

    The eigenvalue nearest zero is taken as the translation eigenvalue; the
    gap ``nu`` is the distance from the axis to the rest of the point
    spectrum and to the essential curves.
    """
    pairs = eigs_rightmost(op.Lw, count, shift, seed=seed)
    lam = np.array([p[0] for p in pairs])
    i0 = int(np.argmin(np.abs(lam)))
    lam0, v0 = lam[i0], pairs[i0][1]
    ess = essential_spectrum_curves(op.model, op.profile, op.weight, k_grid)
    rest = np.delete(lam, i0)
    nu = -max(np.max(rest.real) if rest.size else -np.inf, ess["ess_sup_real"])
    target = op.gamma * op.profile.Y0prime.ravel()
    cos = float(abs(np.vdot(v0, target)) / (np.linalg.norm(v0) * np.linalg.norm(target)))
    dist2 = np.min(np.abs(rest - lam0)) if rest.size else np.inf
    simple = bool(nu > 0 and abs(lam0) <= 1e-3 * nu and dist2 >= nu / 2 and cos >= 0.999)
    # eigenvectors with weight near the boundary belong to the truncated continuum
    N, n = op.grid.N, op.profile.n
    edge = np.abs(op.grid.x) > 0.9 * op.grid.X
    loc = np.array([np.sum(np.abs(p[1].reshape(N, n)[edge]) ** 2) < 1e-3 for p in pairs])
    mode = np.real_if_close(v0 / op.gamma * np.exp(-1j * np.angle(v0[np.argmax(np.abs(v0))])))
    return SpectralDecomposition(
        lam, np.real(mode).reshape(N, n), ess["ess_sup_real"], float(nu), complex(lam0), cos,
        {"essential_spectrum_stable": bool(ess["pass"]), "simple_zero_eigenvalue": simple},
        loc)


@dataclass(frozen=True)
class ProjectionPair:
    """Center projection ``P_c Y = pi(Y) Y_q'`` and its complement.

    ``ell`` is the discrete functional with ``pi(Y) = ell . Y.ravel()``; it
    equals ``trapezoid_weight * gamma * Z_q`` node by node.
    """
    Yqprime: np.ndarray
    Zq: np.ndarray
    weight: Weight
    grid: SpatialGrid
    norm_check: float
    ell: np.ndarray = field(repr=False)
    q: float = 0.0
    kernel_residual: float = np.nan
    boundary_ratio: float = np.nan

    def pi(self, Y) -> np.ndarray | float:
        Y = np.asarray(Y)
        m = self.ell.size
        flat = Y.reshape(-1, m)
        out = flat @ self.ell
        return float(out[0]) if Y.size == m else out.reshape(Y.shape[:-2])


def adjoint_zero_mode(op: WeightedOperator, Yqprime=None, iters: int = 3) -> ProjectionPair:
    """Kernel of ``Lw^T`` by inverse iteration, normalized so ``pi(Y_q') = 1``."""
    Yp = op.profile.Y0prime if Yqprime is None else np.asarray(Yqprime)
    N, n = Yp.shape
    gam = op.gamma
    LT = sp.csc_matrix(op.Lw.T)
    try:
        lu = spla.splu(LT)
    except RuntimeError:
        lu = spla.splu(sp.csc_matrix(LT - 1e-12 * sp.identity(LT.shape[0])))
    z = gam * Yp.ravel()
    for _ in range(iters):
        z = lu.solve(z)
        z /= np.linalg.norm(z)
    kres = float(np.linalg.norm(LT @ z) / spla.norm(LT, np.inf))
    tw = np.repeat(op.grid.trapezoid_weights(), n)
    ell = z * gam
    s = float(ell @ Yp.ravel())
    if s == 0:
        raise np.linalg.LinAlgError("adjoint mode is orthogonal to Y_q'")
    ell = ell / s
    Z = (z / s / tw).reshape(N, n)
    # one refinement so the normalization holds to round-off
    ell = ell / float(ell @ Yp.ravel())
    check = float(ell @ Yp.ravel())
    mag = np.linalg.norm(Z, axis=1)
    bratio = float(max(mag[0], mag[-1]) / mag.max())
    return ProjectionPair(Yp.copy(), Z, op.weight, op.grid, check, ell, op.q, kres, bratio)


def apply_projections(pair: ProjectionPair, Y):
    """Return ``(P_c Y, P_s Y, pi(Y))``; `Y` may carry leading batch axes."""
    Y = np.asarray(Y, float)
    p = pair.pi(Y)
    Pc = np.multiply.outer(p, pair.Yqprime) if np.ndim(p) else p * pair.Yqprime
    return Pc, Y - Pc, p


def projection_lipschitz_check(pair_q: ProjectionPair, pair_p: ProjectionPair, rng,
                               samples: int = 100, kind: str = "beta") -> dict:
    """Sampled estimate of ``|P_q^c - P_p^c| / |q - p|`` in the beta or alpha norm."""
    g, w = pair_q.grid, pair_q.weight
    dq = abs(pair_q.q - pair_p.q)
    n = pair_q.Yqprime.shape[1]
    fields = smooth_random_fields(g, n, samples, rng)
    nrm = (lambda y: beta_norm(g, w, y)) if kind == "beta" else (lambda y: norm(g, w, y))
    worst = 0.0
    for y in fields:
        y = y / nrm(y)
        d = apply_projections(pair_q, y)[0] - apply_projections(pair_p, y)[0]
        worst = max(worst, nrm(d))
    if dq == 0:
        return {"norm_ratio": 0.0 if worst == 0 else np.inf, "difference": worst}
    return {"norm_ratio": worst / dq, "difference": worst}
