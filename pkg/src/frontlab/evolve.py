"""Time integration on the grid: linear semigroups, the nonlinear remainder
``F_q`` and small-data semilinear flows about a shifted front.

Linear parts are advanced by Crank-Nicolson with one banded LU reused for
every step; weighted norms are only applied when measuring.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .front import FrontProfile, _block_diag, frame_operator, shift_front
from .grid import Weight, beta_norm, norm, smooth_random_fields
from .linalg import BandedMatrix
from .model import ReactionModel, eval_jacobian, eval_reaction
from .spectrum import (ProjectionPair, WeightedOperator, apply_projections,
                       limit_operator)

__all__ = ["Trajectory", "RateBundle", "CrankNicolson", "BlowUpError", "Nonlinearity",
           "propagate_linear", "semigroup_decay_rate", "limit_semigroup_check", "eval_Fq",
           "check_nonlinearity_estimates", "evolve_semilinear", "evolve_full",
           "duhamel_defect", "select_rates", "fit_rate", "write_trajectory_csv"]


class BlowUpError(RuntimeError):
    pass


@dataclass
class Trajectory:
    """Snapshots ``states[k]`` (shape ``(N, n)``) at uniform ``times[k]``."""
    times: np.ndarray
    states: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.times.size

    def __iter__(self):
        return zip(self.times, self.states)


@dataclass(frozen=True)
class RateBundle:
    omega: float
    rho: float
    nu: float

    def __post_init__(self):
        if not (0 < self.omega < self.rho < self.nu):
            raise ValueError(f"need 0 < omega < rho < nu, got {self.omega}, {self.rho}, {self.nu}")


def select_rates(rho_hat: float, nu_hat: float) -> RateBundle:
    """``omega = min(rho, nu)/2``; ``rho`` is lowered below ``nu`` if needed.

    Any smaller exponent still satisfies a decay estimate, so reducing
    ``rho`` keeps the chain ``omega < rho < nu`` valid.
    """
    if not (rho_hat > 0 and nu_hat > 0):
        raise ValueError("measured rates must be positive")
    omega = 0.5 * min(rho_hat, nu_hat)
    rho = min(rho_hat, 0.5 * (omega + nu_hat))
    return RateBundle(omega, rho, nu_hat)


class CrankNicolson:
    """Stepper for ``y' = L y + s(t)`` with trapezoidal sources."""

    def __init__(self, L, dt: float):
        if not dt > 0:
            raise ValueError("dt must be positive")
        L = sp.csr_matrix(L)
        I = sp.identity(L.shape[0], format="csr")
        self.L, self.dt = L, dt
        self.B = (I + 0.5 * dt * L).tocsr()
        self.A = BandedMatrix.from_sparse(I - 0.5 * dt * L)
        self.A.factor()

    def step(self, y, src=None):
        rhs = self.B @ y
        if src is not None:
            rhs = rhs + src
        return self.A.solve(rhs)


def _matrix(op):
    return op.L if isinstance(op, WeightedOperator) else op


def propagate_linear(op, y0, T: float, dt: float, store_every: int = 1,
                     stepper: CrankNicolson | None = None) -> Trajectory:
    """Crank-Nicolson solution of ``y' = L y`` on ``[0, T]``."""
    if T < dt:
        raise ValueError("need T >= dt")
    L = _matrix(op)
    st = stepper or CrankNicolson(L, dt)
    shape = np.shape(y0)
    y = np.asarray(y0, float).ravel().copy()
    K = int(round(T / dt))
    times, states = [0.0], [y.copy()]
    for k in range(1, K + 1):
        y = st.step(y)
        if k % store_every == 0 or k == K:
            times.append(k * dt)
            states.append(y.copy())
    return Trajectory(np.array(times), np.array(states).reshape((-1,) + shape),
                      {"dt": dt, "scheme": "cn", "q": getattr(op, "q", None)})


def fit_rate(t, values, floor: float = 1e-300):
    """Least-squares decay rate and prefactor of ``values ~ C exp(-rate t)``."""
    t, v = np.asarray(t), np.asarray(values)
    ok = v > floor
    if ok.sum() < 2:
        return np.inf, 0.0
    slope, icpt = np.polyfit(t[ok], np.log(v[ok]), 1)
    return float(-slope), float(np.exp(icpt))


def semigroup_decay_rate(op: WeightedOperator, pair: ProjectionPair, weight: Weight,
                         T: float = 50.0, dt: float = 0.01, samples: int = 10,
                         rng=None, store_every: int = 50) -> dict:
    """Decay of ``T_q(t) P_s`` in the alpha norm, fitted on ``[T/2, T]``.

    Also reports the growth of unprojected data in the beta norm and the
    fitted rate of the center direction ``Y_q'``.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    g = op.grid
    n = pair.Yqprime.shape[1]
    st = CrankNicolson(op.L, dt)
    fields = smooth_random_fields(g, n, samples, rng)
    rates, Cs = [], []
    beta_ratio, growth = 0.0, 0.0
    for f in fields:
        z = apply_projections(pair, f)[1]
        z = z / norm(g, weight, z)
        tr = propagate_linear(op, z, T, dt, store_every, st)
        a = np.array([norm(g, weight, s) for s in tr.states])
        sel = tr.times >= T / 2
        r, C = fit_rate(tr.times[sel], a[sel])
        rates.append(r)
        Cs.append(C)
        # unprojected data: boundedness in the beta norm
        u = f / beta_norm(g, weight, f)
        tu = propagate_linear(op, u, T, dt, store_every, st)
        b = np.array([beta_norm(g, weight, s) for s in tu.states])
        beta_ratio = max(beta_ratio, float(b.max()))
        half = tu.times >= T / 2
        growth = max(growth, float(b[half].max() / b[~half].max()))
    tr = propagate_linear(op, pair.Yqprime, T, dt, store_every, st)
    a = np.array([norm(g, weight, s) for s in tr.states])
    center_rate, _ = fit_rate(tr.times, a)
    drift = float(np.max(np.abs(tr.states[-1] - pair.Yqprime)))
    i = int(np.argmin(rates))
    return {"nu_hat": float(rates[i]), "C_hat": float(Cs[i]), "rates": rates,
            "beta_sup": beta_ratio, "beta_bounded": bool(np.isfinite(beta_ratio) and growth <= 1.05),
            "beta_growth": growth, "center_rate": center_rate, "center_drift": drift}


def limit_semigroup_check(model: ReactionModel, weight: Weight, grid, profile: FrontProfile,
                          T: float = 50.0, dt: float = 0.01, samples: int = 10, rng=None,
                          store_every: int = 50, t_conv: float = 5.0) -> dict:
    """Propagate the minus-side blocks and the full limit operator.

    ``S1_bound`` and ``S_bound`` are sampled sup-norm operator bounds,
    ``S2_rate`` the slowest fitted decay of the ``V`` block, and
    ``coupling_error`` the relative mismatch between the ``(U, V)`` block of
    the full limit semigroup and the convolution of the diagonal ones.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    op, (L1, L2) = limit_operator(model, "minus", weight, grid, profile)
    n, n1, N = model.n, model.n1, grid.N
    fields = smooth_random_fields(grid, n, samples, rng)
    s1 = sb = 0.0
    s2rates = []
    st1 = CrankNicolson(L1, dt) if L1 is not None else None
    st2, st = CrankNicolson(L2, dt), CrankNicolson(op.L, dt)
    for f in fields:
        if st1 is not None:
            u0 = f[:, :n1] / norm(grid, None, f[:, :n1])
            tr = propagate_linear(L1, u0, T, dt, store_every, st1)
            s1 = max(s1, max(norm(grid, None, s) for s in tr.states))
        v0 = f[:, n1:] / norm(grid, None, f[:, n1:])
        tr = propagate_linear(L2, v0, T, dt, store_every, st2)
        v = np.array([norm(grid, None, s) for s in tr.states])
        s2rates.append(fit_rate(tr.times[tr.times >= T / 2], v[tr.times >= T / 2], 1e-280)[0])
        y0 = f / norm(grid, None, f)
        tr = propagate_linear(op.L, y0, T, dt, store_every, st)
        sb = max(sb, max(norm(grid, None, s) for s in tr.states))
    # coupling block versus the convolution of the diagonal semigroups
    J0 = eval_jacobian(model, np.zeros(n))
    K = sp.kron(sp.identity(N), J0[:n1, n1:])
    v0 = fields[0][:, n1:].ravel()
    y0 = np.zeros((N, n))
    y0[:, n1:] = fields[0][:, n1:]
    exact = expm_multiply(op.L * t_conv, y0.ravel()).reshape(N, n)[:, :n1].ravel()
    # trapezoid rule for sum_k w_k S1(t - s_k) K S2(s_k) v0, Horner-style
    ns = 201
    ds = t_conv / (ns - 1)
    V = expm_multiply(L2, v0, start=0, stop=t_conv, num=ns, endpoint=True)
    wts = np.full(ns, ds)
    wts[[0, -1]] *= 0.5
    conv = np.zeros(N * n1)
    for k in range(ns):
        if k:
            conv = expm_multiply(L1 * ds, conv)
        conv = conv + wts[k] * (K @ V[k])
    cerr = float(np.max(np.abs(conv - exact)) / max(np.max(np.abs(exact)), 1e-300))
    rho_hat = float(min(s2rates))
    return {"S1_bound": float(s1), "S2_rate": rho_hat, "S_bound": float(sb),
            "coupling_error": cerr, "pass": bool(rho_hat > 0 and np.isfinite(sb))}


class Nonlinearity:
    """``F_q(y) = R(Y_q + y) - R(Y_q) - dR(Y_q) y`` for a fixed shifted front."""

    def __init__(self, model: ReactionModel, Yq: np.ndarray):
        self.model = model
        self.Yq = np.asarray(Yq, float)
        self.R0 = eval_reaction(model, self.Yq)
        self.J0 = eval_jacobian(model, self.Yq)

    def __call__(self, y, path: str = "closed_form"):
        y = np.asarray(y, float)
        if path == "closed_form":
            out = eval_reaction(self.model, self.Yq + y) - self.R0
            for i in range(self.model.n):
                for j in range(self.model.n):
                    if np.any(self.J0[:, i, j]):
                        out[..., i] -= self.J0[:, i, j] * y[..., j]
            return out
        if path == "quadrature":
            t, w = np.polynomial.legendre.leggauss(16)
            t, w = 0.5 * (t + 1), 0.5 * w
            out = np.zeros_like(y)
            for tk, wk in zip(t, w):
                Jt = eval_jacobian(self.model, self.Yq + tk * y) - self.J0
                out += wk * np.einsum("...nij,...nj->...ni", Jt, y)
            return out
        raise ValueError(f"unknown path {path!r}")


def eval_Fq(model: ReactionModel, profile: FrontProfile, q: float, y, path: str = "closed_form"):
    """Nonlinear remainder of the reaction about ``Y_q``."""
    prof = profile if profile.q == q else shift_front(profile, q)
    return Nonlinearity(model, prof.Y0)(y, path)


def _ratios(F, g, weight, n2, y, yb):
    Fy, Fb = F(y), F(yb)
    d = y - yb
    n0 = lambda a: norm(g, None, a)
    na = lambda a: norm(g, weight, a)
    v, vb = y[:, -n2:], yb[:, -n2:]
    r1 = n0(Fy) / (n0(y) * (na(y) + n0(v)))
    r2 = na(Fy) / (n0(y) * na(y))
    den3 = n0(d) * (na(y) + na(yb)) + n0(d) * n0(v) + n0(yb) * n0(v - vb)
    r3 = n0(Fy - Fb) / den3
    r4 = na(Fy - Fb) / (na(d) * (n0(y) + n0(yb)))
    return np.array([r1, r2, r3, r4])


def check_nonlinearity_estimates(model: ReactionModel, profile: FrontProfile, q: float,
                                 weight: Weight, sample_count: int = 50, delta1: float = 0.05,
                                 rng=None) -> dict:
    """Empirical constants of the four product-structure estimates.

    Pairs are drawn with ``|y|_beta, |ybar|_beta <= delta1``.  The maxima
    over `sample_count` pairs are compared with the maxima over twice as
    many; the check passes when all are finite and grow by less than 50%.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    prof = profile if profile.q == q else shift_front(profile, q)
    F = Nonlinearity(model, prof.Y0)
    g, n2 = prof.grid, model.n2
    # single bumps: a low-dimensional family makes the sampled maxima reproducible
    fields = smooth_random_fields(g, model.n, 4 * sample_count, rng, bumps=1, extent=g.X / 6)
    scales = rng.uniform(0.2, 1.0, size=4 * sample_count)
    R = []
    for i in range(2 * sample_count):
        y, yb = fields[2 * i], fields[2 * i + 1]
        y = delta1 * scales[2 * i] * y / beta_norm(g, weight, y)
        yb = delta1 * scales[2 * i + 1] * yb / beta_norm(g, weight, yb)
        R.append(_ratios(F, g, weight, n2, y, yb))
    R = np.array(R)
    m1, m2 = R[:sample_count].max(axis=0), R.max(axis=0)
    var = (m2 - m1) / m1
    names = ["F_sup", "F_alpha", "lip_sup", "lip_alpha"]
    return {"constants": dict(zip(names, m2.tolist())), "variation": dict(zip(names, var.tolist())),
            "pass": bool(np.all(np.isfinite(m2)) and np.all(var < 0.5))}


def evolve_semilinear(model: ReactionModel, profile: FrontProfile, q: float, y0, T: float,
                      dt: float = 0.01, scheme: str = "imex_cn", store_every: int = 1,
                      op: WeightedOperator | None = None, stepper: CrankNicolson | None = None,
                      delta: float | None = None, weight: Weight | None = None) -> Trajectory:
    """Integrate ``y' = L_q y + F_q(y)``.

    ``imex_cn`` treats ``L_q`` by Crank-Nicolson and ``F_q`` by a Heun
    predictor-corrector.  ``cn_implicit`` uses the trapezoid rule for both
    (fixed-point iteration per step); it is the time-discrete mild solution
    used by the Lyapunov-Perron solver.
    """
    if scheme not in ("imex_cn", "cn_implicit"):
        raise ValueError(f"unknown scheme {scheme!r}")
    prof = profile if profile.q == q else shift_front(profile, q)
    g = prof.grid
    if delta is not None and weight is not None and beta_norm(g, weight, y0) > delta:
        raise ValueError("initial data outside the small-data ball")
    if op is None:
        A, *_ = frame_operator(g, model.D, prof.c, prof.order, prof.upwind)
        L = A + _block_diag(eval_jacobian(model, prof.Y0))
    else:
        L = op.L
    st = stepper or CrankNicolson(L, dt)
    F = Nonlinearity(model, prof.Y0)
    shape = (g.N, model.n)
    y = np.asarray(y0, float).reshape(shape).copy()
    bound = 10 * np.max(np.abs(y))
    K = int(round(T / dt))
    Fk = F(y).ravel()
    times, states = [0.0], [y.copy()]
    for k in range(1, K + 1):
        yv = y.ravel()
        pred = st.step(yv, dt * Fk)
        Fp = F(pred.reshape(shape)).ravel()
        new = st.step(yv, 0.5 * dt * (Fk + Fp))
        if scheme == "cn_implicit":
            for _ in range(20):
                Fn = F(new.reshape(shape)).ravel()
                nxt = st.step(yv, 0.5 * dt * (Fk + Fn))
                done = np.max(np.abs(nxt - new)) <= 1e-15 * max(1.0, np.max(np.abs(nxt)))
                new = nxt
                if done:
                    break
        y = new.reshape(shape)
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > bound:
            raise BlowUpError(f"|y|_0 exceeded 10x the initial bound at t={k * dt:.3f}")
        Fk = F(y).ravel()
        if k % store_every == 0 or k == K:
            times.append(k * dt)
            states.append(y.copy())
    return Trajectory(np.array(times), np.array(states),
                      {"q": q, "dt": dt, "scheme": scheme, "store_every": store_every})


def evolve_full(model: ReactionModel, profile: FrontProfile, Y0, T: float, dt: float = 0.01,
                store_every: int = 1) -> Trajectory:
    """Integrate the moving-frame equation ``Y' = D Y'' + c Y' + R(Y)``.

    Diffusion and advection are Crank-Nicolson (with end-state ghosts),
    the whole reaction term is Heun.  Used as an independent check of the
    semilinear formulation and for the asymptotic phase.
    """
    g = profile.grid
    A, _, b, _ = frame_operator(g, model.D, profile.c, profile.order, profile.upwind,
                                profile.Y_minus, profile.Y_plus)
    st = CrankNicolson(A, dt)
    shape = (g.N, model.n)
    Y = np.asarray(Y0, float).reshape(shape).copy()
    K = int(round(T / dt))
    src_b = dt * b
    Rk = eval_reaction(model, Y).ravel()
    times, states = [0.0], [Y.copy()]
    for k in range(1, K + 1):
        Yv = Y.ravel()
        pred = st.step(Yv, src_b + dt * Rk)
        Rp = eval_reaction(model, pred.reshape(shape)).ravel()
        Y = st.step(Yv, src_b + 0.5 * dt * (Rk + Rp)).reshape(shape)
        if not np.all(np.isfinite(Y)):
            raise BlowUpError(f"non-finite state at t={k * dt:.3f}")
        Rk = eval_reaction(model, Y).ravel()
        if k % store_every == 0 or k == K:
            times.append(k * dt)
            states.append(Y.copy())
    return Trajectory(np.array(times), np.array(states),
                      {"dt": dt, "scheme": "full_imex", "store_every": store_every})


def duhamel_defect(stepper: CrankNicolson, states: np.ndarray, Fvals: np.ndarray) -> np.ndarray:
    """Difference between a trajectory and its discrete variation-of-constants
    reconstruction ``w_{k+1} = CN(w_k) + dt/2 (F_k + F_{k+1})``, ``w_0 = y_0``.

    `states` and `Fvals` hold every step (no subsampling).
    """
    K = states.shape[0]
    w = states[0].ravel().copy()
    out = np.zeros_like(states)
    h = 0.5 * stepper.dt
    for k in range(1, K):
        w = stepper.step(w, h * (Fvals[k - 1].ravel() + Fvals[k].ravel()))
        out[k] = states[k] - w.reshape(states[k].shape)
    return out


def write_trajectory_csv(path, traj: Trajectory, grid, weight: Weight, n2: int) -> None:
    """Columns ``t, |y|_0, |y|_alpha, |v|_0``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "sup", "alpha", "v_sup"])
        for t, s in traj:
            w.writerow([repr(float(t)), repr(norm(grid, None, s)), repr(norm(grid, weight, s)),
                        repr(norm(grid, None, s[:, -n2:]))])
