"""Traveling fronts: Newton on the steady moving-frame problem, tail rates,
shifts and natural-parameter continuation.

The steady problem is ``D Y'' + c Y' + R(Y) = 0`` on ``[-X, X]``, closed by
ghost values equal to the end states (``0`` on the left after the shift,
``Y_plus`` on the right), plus one phase condition fixing translations.
"""
from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.interpolate import CubicSpline

from .grid import (SpatialGrid, first_derivative_stencil, interp_weights,
                   make_grid, second_derivative_stencil)
from .model import ReactionModel, builtin_model, eval_jacobian, eval_reaction

__all__ = ["FrontProfile", "PinPhase", "OrthogonalityPhase", "NewtonError",
           "PhaseDegenerateError", "initial_guess", "solve_front", "continue_front",
           "fit_decay_rates", "shift_front", "frame_operator", "steady_residual",
           "save_profile", "load_profile", "ContinuationResult"]

log = logging.getLogger(__name__)

NOISE_FLOOR = 1e-13
FIT_FLOOR = 1e-10  # tail samples below this are too close to round-off to fit


class NewtonError(RuntimeError):
    def __init__(self, msg, residual=np.nan, history=()):
        super().__init__(f"{msg}; final residual {residual:.3e}, damping {list(history)}")
        self.residual, self.history = residual, list(history)


class PhaseDegenerateError(ValueError):
    pass


@dataclass(frozen=True)
class PinPhase:
    """Fix ``Y[component](x) = value`` (``value=None``: midpoint of end states)."""
    component: int = 0
    value: float | None = None
    x: float = 0.0


@dataclass(frozen=True)
class OrthogonalityPhase:
    """Fix ``int <Y - ref, ref'> dx = 0`` for a template profile ``ref``."""
    reference: np.ndarray


@dataclass(frozen=True)
class FrontProfile:
    """A converged front on a grid.

    `Y0` and `Y0prime` are ``(N, n)`` arrays in shifted coordinates; `q` is
    the translation relative to the originally computed front.
    """

    grid: SpatialGrid
    Y0: np.ndarray
    c: float
    Y_minus: np.ndarray
    Y_plus: np.ndarray
    omega_minus: float
    omega_plus: float
    Y0prime: np.ndarray
    model: ReactionModel | None = field(default=None, repr=False, compare=False)
    order: int = 4
    upwind: bool = True
    residual: float = np.nan
    q: float = 0.0
    pin_value: float = np.nan
    C_minus: float = np.nan
    C_plus: float = np.nan
    degenerate: bool = False
    flags: tuple = ()

    @property
    def n(self) -> int:
        return self.Y0.shape[1]


# -- discrete moving-frame operator ------------------------------------------

def _stencils(grid, d, c, order, upwind):
    s2 = second_derivative_stencil(grid.h, order)
    if d > 0 or not upwind:
        s1 = first_derivative_stencil(grid.h, order)
    else:
        s1 = first_derivative_stencil(grid.h, order, bias=1 if c >= 0 else -1)
    return s1, s2


def frame_operator(grid: SpatialGrid, D, c: float, order: int = 4, upwind: bool = True,
                   left=None, right=None):
    """Discrete ``D d_xx + c d_x`` in node-major ordering.

    Returns ``(A, Ax, b, bx)`` where ``A`` is the full operator, ``Ax`` its
    first-derivative part (the derivative of ``A`` in ``c``), and ``b``,
    ``bx`` the matching contributions of the ghost values `left`, `right`.
    """
    D = np.asarray(D, float)
    n, N = D.size, grid.N
    left = np.zeros(n) if left is None else np.asarray(left, float)
    right = np.zeros(n) if right is None else np.asarray(right, float)
    A = sp.csr_matrix((N * n, N * n))
    Ax = sp.csr_matrix((N * n, N * n))
    b, bx = np.zeros((N, n)), np.zeros((N, n))
    for j in range(n):
        s1, s2 = _stencils(grid, D[j], c, order, upwind)
        E = sp.csr_matrix(([1.0], ([j], [j])), shape=(n, n))
        M1 = sp.kron(s1.matrix(N), E, format="csr")
        Ax = Ax + M1
        A = A + c * M1
        g1 = s1.ghost_term(N, left[j], right[j])
        bx[:, j] = g1
        b[:, j] = c * g1
        if D[j] > 0:
            A = A + D[j] * sp.kron(s2.matrix(N), E, format="csr")
            b[:, j] += D[j] * s2.ghost_term(N, left[j], right[j])
    return A.tocsr(), Ax.tocsr(), b.ravel(), bx.ravel()


def _derivative(grid, Y, order, left, right):
    # centered derivative of a profile with end-state ghosts
    s1 = first_derivative_stencil(grid.h, order)
    out = np.empty_like(Y)
    M = s1.matrix(grid.N)
    for j in range(Y.shape[1]):
        out[:, j] = M @ Y[:, j] + s1.ghost_term(grid.N, left[j], right[j])
    return out


def steady_residual(model, grid, Y, c, order=4, upwind=True, right=None) -> np.ndarray:
    """``D Y'' + c Y' + R(Y)`` on the grid, shape ``(N, n)``."""
    right = model.right_state if right is None else right
    A, _, b, _ = frame_operator(grid, model.D, c, order, upwind, None, right)
    return (A @ Y.ravel() + b).reshape(Y.shape) + eval_reaction(model, Y)


def _block_diag(J):
    # (N, n, n) -> sparse block diagonal in node-major order
    N, n, _ = J.shape
    rows = (np.arange(N)[:, None, None] * n + np.arange(n)[None, :, None]).repeat(n, 2)
    cols = (np.arange(N)[:, None, None] * n + np.arange(n)[None, None, :]).repeat(n, 1)
    return sp.csr_matrix((J.ravel(), (rows.ravel(), cols.ravel())), shape=(N * n, N * n))


# -- initial guess and Newton --------------------------------------------------

def initial_guess(model: ReactionModel | None, end_states, grid: SpatialGrid,
                  steepness: float = 1.0) -> np.ndarray:
    """Logistic blend ``Y- + (Y+ - Y-)(1 + tanh(s x))/2``."""
    Ym, Yp = (np.asarray(e, float) for e in end_states)
    s = 0.5 * (1.0 + np.tanh(steepness * grid.x))
    return Ym[None, :] + (Yp - Ym)[None, :] * s[:, None]


def _phase_row(phase, grid, Y, left, right, order):
    """Linear functional (row over Y.ravel()) and target value."""
    N, n = Y.shape
    if isinstance(phase, PinPhase):
        idx, w = interp_weights(grid, phase.x)
        row = np.zeros(N * n)
        row[idx * n + phase.component] = w
        val = phase.value
        if val is None:
            val = 0.5 * (left[phase.component] + right[phase.component])
        return row, float(val)
    if isinstance(phase, OrthogonalityPhase):
        ref = np.asarray(phase.reference, float).reshape(N, n)
        dref = _derivative(grid, ref, order, left, right)
        tw = grid.trapezoid_weights()[:, None]
        row = (tw * dref).ravel()
        return row, float(row @ ref.ravel())
    raise TypeError(f"unknown phase condition {phase!r}")


def _phase_degenerate(phase, grid, Y, left, right, order) -> bool:
    if isinstance(phase, PinPhase):
        dY = _derivative(grid, Y, order, left, right)[:, phase.component]
        idx, w = interp_weights(grid, phase.x)
        span = abs(right[phase.component] - left[phase.component]) + 1.0
        return abs(w @ dY[idx]) <= 1e-10 * span
    row, _ = _phase_row(phase, grid, Y, left, right, order)
    return np.max(np.abs(row)) <= 1e-14


def _newton(model, grid, Y, c, phase, tol, order, upwind, right, maxit, fix_c=False):
    N, n = Y.shape
    left = np.zeros(n)
    history = []
    for it in range(maxit + 1):
        A, Ax, b, bx = frame_operator(grid, model.D, c, order, upwind, left, right)
        G = A @ Y.ravel() + b + eval_reaction(model, Y).ravel()
        if fix_c:
            F = G
        else:
            prow, pval = _phase_row(phase, grid, Y, left, right, order)
            F = np.append(G, prow @ Y.ravel() - pval)
        res = float(np.max(np.abs(F)))
        if not np.isfinite(res):
            raise NewtonError("non-finite residual", res, history)
        if res <= tol:
            return Y, c, res, history
        if it == maxit:
            break
        J = A + _block_diag(eval_jacobian(model, Y))
        if not fix_c:
            J = sp.bmat([[J, sp.csr_matrix((Ax @ Y.ravel() + bx)[:, None])],
                         [sp.csr_matrix(prow[None, :]), None]], format="csc")
        step = spla.spsolve(sp.csc_matrix(J), -F)
        if not np.all(np.isfinite(step)):
            raise NewtonError("singular Newton system", res, history)
        nrm0 = np.linalg.norm(F)
        lam = 1.0
        while True:
            Yt = Y + lam * step[: N * n].reshape(N, n)
            ct = c if fix_c else c + lam * step[-1]
            At, _, bt, _ = frame_operator(grid, model.D, ct, order, upwind, left, right)
            Gt = At @ Yt.ravel() + bt + eval_reaction(model, Yt).ravel()
            Ft = Gt if fix_c else np.append(Gt, prow @ Yt.ravel() - pval)
            if np.linalg.norm(Ft) <= (1 - 1e-4 * lam) * nrm0 or lam < 2.0**-10:
                break
            lam *= 0.5
        history.append(lam)
        Y, c = Yt, ct
    raise NewtonError("Newton did not converge", res, history)


def solve_front(model: ReactionModel, guess, c_guess: float, phase=None, tol: float = 1e-11,
                grid: SpatialGrid | None = None, order: int = 4, upwind: bool = True,
                end_states=None, maxit: int = 50) -> FrontProfile:
    """Damped Newton for ``(Y, c)``; fits tail rates on the converged profile.

    Parameters
    ----------
    guess : ndarray, shape (N, n)
        Initial profile; `grid` is inferred from ``N`` when not given
        (``X`` must then be supplied through `grid`).
    phase : PinPhase or OrthogonalityPhase, optional
        Default pins component 0 at ``x = 0`` to the midpoint of its end states.
    end_states : (Y_minus, Y_plus), optional
        Defaults to ``(0, model.right_state)``.
    """
    if grid is None:
        raise ValueError("grid is required")
    Y = np.array(guess, dtype=float).reshape(grid.N, model.n)
    if end_states is None:
        if model.right_state is None:
            raise ValueError("model has no right end state; pass end_states")
        end_states = (np.zeros(model.n), model.right_state)
    left, right = (np.asarray(e, float) for e in end_states)
    if np.any(left != 0):
        raise ValueError("left end state must be the origin in shifted coordinates")
    phase = PinPhase() if phase is None else phase
    dY = _derivative(grid, Y, order, left, right)
    degenerate = bool(np.max(np.abs(dY)) <= 1e-12 and np.allclose(left, right))
    if not degenerate and _phase_degenerate(phase, grid, Y, left, right, order):
        raise PhaseDegenerateError("phase condition is degenerate: the pinned component "
                                   "has zero slope at the pin location")
    Y, c, res, hist = _newton(model, grid, Y, float(c_guess), phase, tol, order, upwind,
                              right, maxit, fix_c=degenerate)
    Yp = _derivative(grid, Y, order, left, right)
    pin_value = np.nan
    if isinstance(phase, PinPhase):
        idx, w = interp_weights(grid, phase.x)
        pin_value = float(w @ Y[idx, phase.component])
    prof = FrontProfile(grid, Y, float(c), left, right, np.nan, np.nan, Yp, model, order,
                        upwind, res, 0.0, pin_value, degenerate=degenerate)
    if degenerate:
        return replace(prof, flags=("degenerate",))
    om, op, Cm, Cp, flags = fit_decay_rates(prof, return_flags=True)
    return replace(prof, omega_minus=om, omega_plus=op, C_minus=Cm, C_plus=Cp,
                   flags=tuple(flags))


# -- tail rates ----------------------------------------------------------------

def _fit_side(x, d, X, h, side):
    """Least-squares slope of ``log d`` on the outermost resolvable quarter."""
    inner = np.abs(x) <= X - 5 * h + 1e-12
    sel = inner & ((x >= 0) if side > 0 else (x <= 0))
    x, d = x[sel], d[sel]
    ok = d >= FIT_FLOOR
    if not np.any(ok):
        return np.nan, np.nan, "undetermined"
    # the window ends at the outermost sample above the fitting floor
    x_end = x[ok].max() if side > 0 else x[ok].min()
    x_end = float(np.clip(x_end, -X, X))
    lo, hi = (x_end - X / 4, x_end) if side > 0 else (x_end, x_end + X / 4)
    win = ok & (x >= lo - 1e-12) & (x <= hi + 1e-12)
    if win.sum() < 8 or np.ptp(np.log(d[win])) < 1e-6:
        return np.nan, np.nan, "undetermined"
    slope, icpt = np.polyfit(x[win], np.log(d[win]), 1)
    flag = None
    ld = np.log(d[win]) * side
    if np.any(np.diff(ld) > 1e-9 * np.abs(ld[1:]).max()):
        flag = "nonmonotone"
    return float(-slope), float(np.exp(icpt)), flag


def fit_decay_rates(profile: FrontProfile, return_flags: bool = False):
    """Fit ``|Y0 - Y_pm| ~ C_pm exp(-omega_pm x)`` on each tail.

    The fit window is a quarter of the half-domain ending at the outermost
    node (at least 5 nodes from the boundary) whose deviation is above
    ``FIT_FLOOR``.  Undetermined rates are returned as ``nan``.
    """
    g = profile.grid
    x = g.x
    dm = np.linalg.norm(profile.Y0 - profile.Y_minus, axis=1)
    dp = np.linalg.norm(profile.Y0 - profile.Y_plus, axis=1)
    om, Cm, fm = _fit_side(x, dm, g.X, g.h, -1)
    op, Cp, fp = _fit_side(x, dp, g.X, g.h, +1)
    flags = [f"{s}:{f}" for s, f in (("minus", fm), ("plus", fp)) if f]
    for f in flags:
        warnings.warn(f"tail fit: {f}", RuntimeWarning, stacklevel=2)
    out = (om, op, Cm, Cp)
    return out + (flags,) if return_flags else out


# -- shifts --------------------------------------------------------------------

def shift_front(profile: FrontProfile, q: float, polish: bool = True,
                tol: float | None = None) -> FrontProfile:
    """Translate the front by `q` (``Y_q(x) = Y_0(x - q)``).

    Cubic interpolation supplies the translate; with ``polish=True`` a short
    Newton solve (phase pinned at ``x = q``) turns it into an exact steady
    state of the discrete problem, so that ``L_q Y_q' ~ 0`` holds to the
    same accuracy for every shift.
    """
    g = profile.grid
    if abs(q) > g.X / 10:
        raise ValueError(f"|q| = {abs(q)} exceeds X/10 = {g.X / 10}")
    if q == profile.q:
        return profile
    dq = q - profile.q
    x = g.x
    Y = np.empty_like(profile.Y0)
    xs = np.concatenate([[x[0] - 2 * g.h, x[0] - g.h], x, [x[-1] + g.h, x[-1] + 2 * g.h]])
    for j in range(profile.n):
        ys = np.concatenate([[profile.Y_minus[j]] * 2, profile.Y0[:, j], [profile.Y_plus[j]] * 2])
        cs = CubicSpline(xs, ys)
        xq = x - dq
        Y[:, j] = np.where(xq < xs[0], profile.Y_minus[j],
                           np.where(xq > xs[-1], profile.Y_plus[j], cs(np.clip(xq, xs[0], xs[-1]))))
    c = profile.c
    res = profile.residual
    if polish and profile.model is not None and not profile.degenerate:
        tol = max(profile.residual, 1e-11) if tol is None else tol
        ph = PinPhase(0, profile.pin_value if np.isfinite(profile.pin_value) else None, q)
        Y, c, res, _ = _newton(profile.model, g, Y, c, ph, tol, profile.order, profile.upwind,
                               profile.Y_plus, 20)
    Yp = _derivative(g, Y, profile.order, profile.Y_minus, profile.Y_plus)
    return replace(profile, Y0=Y, Y0prime=Yp, c=float(c), residual=res, q=float(q))


# -- continuation --------------------------------------------------------------

@dataclass
class ContinuationResult:
    """Profiles along a sweep; behaves as a sequence of profiles."""
    profiles: list
    values: list
    failure: str | None = None

    def __len__(self):
        return len(self.profiles)

    def __getitem__(self, i):
        return self.profiles[i]

    def __iter__(self):
        return iter(self.profiles)


def continue_front(model_name: str, param: str, values, seed: FrontProfile,
                   base_params: dict | None = None, tol: float = 1e-11) -> ContinuationResult:
    """Natural-parameter continuation of `seed` along ``param in values``.

    Each step warm-starts Newton from the previous profile (converted through
    the unshifted coordinates, since the shift depends on the parameters).
    The sweep stops at the first failure; failure at the first value raises.
    """
    base = dict(base_params or (seed.model.params if seed.model else {}))
    profiles, done = [], []
    prev = seed
    for k, val in enumerate(values):
        try:
            model = builtin_model(model_name, {**base, param: val})
            guess = prev.model.unshift(prev.Y0) - model.origin if prev.model else prev.Y0
            prof = solve_front(model, guess, prev.c, PinPhase(), tol, prev.grid,
                               prev.order, prev.upwind)
        except (NewtonError, np.linalg.LinAlgError, ValueError) as exc:
            if k == 0:
                raise
            log.warning("continuation stopped at %s=%g: %s", param, val, exc)
            return ContinuationResult(profiles, done, f"{param}={val}: {exc}")
        profiles.append(prof)
        done.append(val)
        prev = prof
    return ContinuationResult(profiles, done, None)


# -- serialization -------------------------------------------------------------

def save_profile(path, profile: FrontProfile) -> None:
    """Header line (JSON) followed by CSV columns ``x, Y_1..Y_n, dY_1..dY_n``."""
    g = profile.grid
    model = None
    if profile.model is not None and profile.model.name != "custom_spec":
        model = profile.model.to_config()
    head = {
        "X": g.X, "N": g.N, "c": profile.c, "Y_minus": profile.Y_minus.tolist(),
        "Y_plus": profile.Y_plus.tolist(), "omega_minus": profile.omega_minus,
        "omega_plus": profile.omega_plus, "C_minus": profile.C_minus, "C_plus": profile.C_plus,
        "order": profile.order, "upwind": profile.upwind, "residual": profile.residual,
        "q": profile.q, "pin_value": profile.pin_value, "degenerate": profile.degenerate,
        "flags": list(profile.flags), "model": model,
    }
    n = profile.n
    cols = ["x"] + [f"Y_{j + 1}" for j in range(n)] + [f"dY_{j + 1}" for j in range(n)]
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(head) + "\n")
        fh.write(",".join(cols) + "\n")
        np.savetxt(fh, np.column_stack([g.x, profile.Y0, profile.Y0prime]),
                   delimiter=",", fmt="%.17g")


def load_profile(path, model: ReactionModel | None = None) -> FrontProfile:
    with open(path) as fh:
        head = json.loads(fh.readline()[2:])
    data = np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2)
    n = (data.shape[1] - 1) // 2
    if model is None and head["model"]:
        cfg = dict(head["model"])
        model = builtin_model(cfg.pop("name"), cfg)
    g = make_grid(head["X"], head["N"])
    return FrontProfile(g, data[:, 1:1 + n].copy(), head["c"], np.array(head["Y_minus"]),
                        np.array(head["Y_plus"]), head["omega_minus"], head["omega_plus"],
                        data[:, 1 + n:].copy(), model, head["order"], head["upwind"],
                        head["residual"], head["q"], head["pin_value"], head["C_minus"],
                        head["C_plus"], head["degenerate"], tuple(head["flags"]))
