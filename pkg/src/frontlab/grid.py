"""Spatial grids, exponential weights, finite-difference operators and norms.

Fields are stored as ``(N, n)`` arrays: one row per node, one column per
component.  Linear operators act on the flattened node-major vector
``y.ravel()`` so that all couplings stay within a narrow band.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np
import scipy.sparse as sp

__all__ = [
    "SpatialGrid", "Weight", "Stencil", "make_grid", "make_weight", "norm",
    "beta_norm", "trajectory_norms", "diff_ops", "first_derivative_stencil",
    "second_derivative_stencil", "smooth_random_fields", "save_field",
    "load_field", "interp_weights",
]


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid on ``[-X, X]`` with an odd node count (``x = 0`` is a node)."""

    X: float
    N: int

    def __post_init__(self):
        if not (self.X > 0 and np.isfinite(self.X)):
            raise ValueError(f"X must be positive and finite, got {self.X}")
        if int(self.N) != self.N or self.N < 3 or self.N % 2 == 0:
            raise ValueError(f"N must be an odd integer >= 3, got {self.N}")

    @property
    def h(self) -> float:
        return 2.0 * self.X / (self.N - 1)

    @property
    def x(self) -> np.ndarray:
        return -self.X + self.h * np.arange(self.N)

    @property
    def mid(self) -> int:
        return (self.N - 1) // 2

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.N, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w


def make_grid(X: float, N: int) -> SpatialGrid:
    """Return the uniform grid with half-width `X` and `N` nodes."""
    return SpatialGrid(float(X), int(N))


def _hermite_exponent(am: float, ap: float, x0: float) -> np.ndarray:
    # quintic p on [-x0, x0] matching (value, slope, curvature) of am*x at -x0
    # and ap*x at +x0
    rows, rhs = [], []
    for s, a in ((-x0, am), (x0, ap)):
        rows.append([s**j for j in range(6)])
        rows.append([j * s ** (j - 1) if j >= 1 else 0.0 for j in range(6)])
        rows.append([j * (j - 1) * s ** (j - 2) if j >= 2 else 0.0 for j in range(6)])
        rhs += [a * s, a, 0.0]
    return np.linalg.solve(np.array(rows), np.array(rhs))


@dataclass(frozen=True)
class Weight:
    """C² exponential weight ``gamma = exp(eta)`` with slopes ``alpha_minus``
    on the left, ``alpha_plus`` on the right and a quintic blend on
    ``[-x0, x0]``."""

    alpha_minus: float
    alpha_plus: float
    x0: float = 5.0
    middle: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.x0 > 0:
            raise ValueError("x0 must be positive")
        coef = _hermite_exponent(self.alpha_minus, self.alpha_plus, self.x0)
        coef.setflags(write=False)
        object.__setattr__(self, "middle", coef)

    @property
    def alpha(self) -> tuple[float, float]:
        return (self.alpha_minus, self.alpha_plus)

    @property
    def trivial(self) -> bool:
        return self.alpha_minus == 0.0 and self.alpha_plus == 0.0

    def eta(self, x, deriv: int = 0) -> np.ndarray:
        """Exponent ``log gamma`` (or its `deriv`-th derivative) at `x`."""
        x = np.asarray(x, dtype=float)
        am, ap, x0 = self.alpha_minus, self.alpha_plus, self.x0
        poly = np.polynomial.Polynomial(self.middle).deriv(deriv)
        if deriv == 0:
            left, right = am * x, ap * x
        elif deriv == 1:
            left, right = np.full_like(x, am), np.full_like(x, ap)
        else:
            left = right = np.zeros_like(x)
        if am == ap and deriv == 0:
            # pieces agree, so the interpolant is the line itself
            return am * x
        return np.where(x <= -x0, left, np.where(x >= x0, right, poly(x)))

    def gamma(self, x) -> np.ndarray:
        return np.exp(self.eta(x))

    def check_admissible(self, omega_minus: float, omega_plus: float) -> None:
        """Raise ``ValueError`` unless ``0 < a- < -w-`` and ``0 <= a+ < w+``."""
        am, ap = self.alpha_minus, self.alpha_plus
        if not (0.0 < am < -omega_minus):
            raise ValueError(
                f"inadmissible weight (alphaomega window): need 0 < alpha_minus < "
                f"-omega_minus = {-omega_minus:.6g}, got alpha_minus = {am:.6g}")
        if not (0.0 <= ap < omega_plus):
            raise ValueError(
                f"inadmissible weight (alphaomega window): need 0 <= alpha_plus < "
                f"omega_plus = {omega_plus:.6g}, got alpha_plus = {ap:.6g}")


def make_weight(alpha: tuple[float, float], x0: float = 5.0) -> Weight:
    """Build the weight of class ``alpha = (alpha_minus, alpha_plus)``."""
    am, ap = alpha
    return Weight(float(am), float(ap), float(x0))


# -- finite differences ----------------------------------------------------

def _fd_weights(offsets, m: int) -> np.ndarray:
    offs = np.asarray(offsets, dtype=float)
    A = np.vander(offs, increasing=True).T
    b = np.zeros(len(offs))
    b[m] = factorial(m)
    return np.linalg.solve(A, b)


@dataclass(frozen=True)
class Stencil:
    """Translation-invariant stencil; values outside the grid are ghosts."""

    offsets: tuple[int, ...]
    coeffs: tuple[float, ...]

    def matrix(self, N: int) -> sp.csr_matrix:
        return sp.diags(list(self.coeffs), list(self.offsets), shape=(N, N), format="csr")

    def ghost_term(self, N: int, left: float, right: float) -> np.ndarray:
        """Contribution of constant ghost values beyond each end."""
        b = np.zeros(N)
        for o, w in zip(self.offsets, self.coeffs):
            if o < 0:
                b[: -o] += w * left
            elif o > 0:
                b[N - o:] += w * right
        return b


def first_derivative_stencil(h: float, order: int = 2, bias: int = 0) -> Stencil:
    """Centered (``bias=0``) or upwind-biased first-derivative stencil.

    ``bias=+1`` leans toward larger x (offsets -1..3 at order 4);
    ``bias=-1`` is the mirror image.  At order 2 the biased three-point
    stencil coincides with the centered one.
    """
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    p = order // 2
    if bias == 0:
        offs = tuple(range(-p, p + 1))
    else:
        offs = tuple(range(-1, order)) if bias > 0 else tuple(range(-order + 1, 2))
    w = _fd_weights(offs, 1) / h
    return Stencil(offs, tuple(float(v) for v in w))


def second_derivative_stencil(h: float, order: int = 2) -> Stencil:
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    p = order // 2
    offs = tuple(range(-p, p + 1))
    w = _fd_weights(offs, 2) / h**2
    return Stencil(offs, tuple(float(v) for v in w))


def diff_ops(grid: SpatialGrid, bc: str = "dirichlet0", order: int = 2):
    """Centered ``(Dx, Dxx)`` as sparse ``N x N`` matrices.

    Off-grid values are treated as zero, which is the right closure for
    deviations from the end states.
    """
    if bc != "dirichlet0":
        raise ValueError(f"unsupported boundary condition {bc!r}")
    Dx = first_derivative_stencil(grid.h, order).matrix(grid.N)
    Dxx = second_derivative_stencil(grid.h, order).matrix(grid.N)
    return Dx, Dxx


def interp_weights(grid: SpatialGrid, x: float, npts: int = 4):
    """Lagrange weights of the `npts` nodes nearest `x` (cubic by default)."""
    i0 = int(np.floor((x + grid.X) / grid.h)) - (npts // 2 - 1)
    i0 = min(max(i0, 0), grid.N - npts)
    idx = np.arange(i0, i0 + npts)
    xs = grid.x[idx]
    w = np.ones(npts)
    for j in range(npts):
        for k in range(npts):
            if k != j:
                w[j] *= (x - xs[k]) / (xs[j] - xs[k])
    return idx, w


# -- norms ------------------------------------------------------------------

def _as_field(grid: SpatialGrid, y) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim == 1:
        y = y[:, None]
    if y.shape[0] != grid.N:
        raise ValueError(f"field has {y.shape[0]} rows, grid has {grid.N} nodes")
    return y


def norm(grid: SpatialGrid, weight: Weight | None, y, kind: str = "sup") -> float:
    """Weighted norm ``|gamma y|`` in the sup (BUC) or discrete H1 realization."""
    y = _as_field(grid, y)
    if weight is not None and not weight.trivial:
        y = weight.gamma(grid.x)[:, None] * y
    if kind == "sup":
        return float(np.max(np.sqrt(np.sum(np.abs(y) ** 2, axis=1)))) if y.size else 0.0
    if kind == "h1":
        Dx, _ = diff_ops(grid)
        dy = Dx @ y
        return float(np.sqrt(grid.h * (np.sum(np.abs(y) ** 2) + np.sum(np.abs(dy) ** 2))))
    raise ValueError(f"unknown norm kind {kind!r}")


def beta_norm(grid: SpatialGrid, weight: Weight, y, kind: str = "sup") -> float:
    """``max(|y|_0, |y|_alpha)``."""
    return max(norm(grid, None, y, kind), norm(grid, weight, y, kind))


def trajectory_norms(traj, omega: float, grid: SpatialGrid, weight: Weight,
                     n2: int, kind: str = "sup"):
    """Return ``(|y|_{w,alpha}, |y|_{0,0}, |v|_{w,0}, max)`` of a trajectory.

    `traj` is a sequence of ``(t_k, field)`` pairs, or a pair ``(times,
    states)`` with `states` of shape ``(K, N, n)``.
    """
    if isinstance(traj, tuple) and len(traj) == 2 and np.ndim(traj[0]) == 1:
        times, states = np.asarray(traj[0], float), np.asarray(traj[1])
    else:
        traj = list(traj)
        if not traj:
            raise ValueError("empty trajectory")
        times = np.array([t for t, _ in traj], float)
        states = np.array([np.asarray(s).reshape(grid.N, -1) for _, s in traj])
    if times.size == 0:
        raise ValueError("empty trajectory")
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be nondecreasing")
    if not omega > 0:
        raise ValueError("omega must be positive")
    states = states.reshape(times.size, grid.N, -1)
    if kind == "sup":
        g = weight.gamma(grid.x)
        mag = np.sqrt(np.sum(np.abs(states) ** 2, axis=2))
        a = np.max(mag * g, axis=1)
        z = np.max(mag, axis=1)
        v = np.max(np.sqrt(np.sum(np.abs(states[:, :, -n2:]) ** 2, axis=2)), axis=1)
    else:
        a = np.array([norm(grid, weight, s, kind) for s in states])
        z = np.array([norm(grid, None, s, kind) for s in states])
        v = np.array([norm(grid, None, s[:, -n2:], kind) for s in states])
    e = np.exp(omega * times)
    out = (float(np.max(e * a)), float(np.max(z)), float(np.max(e * v)))
    return out + (max(out),)


# -- sampling and I/O ---------------------------------------------------------

def smooth_random_fields(grid: SpatialGrid, n: int, count: int, rng,
                         width: float = 1.0, extent: float | None = None,
                         bumps: int = 8) -> np.ndarray:
    """Random smooth fields: sums of `bumps` Gaussian bumps per component
    with centers in ``[-extent, extent]`` (default ``X/3``).  Shape
    ``(count, N, n)``."""
    extent = grid.X / 3 if extent is None else extent
    x = grid.x
    out = np.empty((count, grid.N, n))
    nb = bumps
    for s in range(count):
        c = rng.uniform(-extent, extent, size=(nb, n))
        a = rng.standard_normal((nb, n))
        w = width * rng.uniform(0.5, 2.0, size=(nb, n))
        out[s] = np.sum(a * np.exp(-(((x[:, None, None] - c) / w) ** 2)), axis=1)
    return out


def save_field(path, grid: SpatialGrid, values) -> None:
    """Write ``x, component_1..component_n`` as CSV (round-trip exact)."""
    values = _as_field(grid, values)
    n = values.shape[1]
    header = ",".join(["x"] + [f"component_{j + 1}" for j in range(n)])
    np.savetxt(path, np.column_stack([grid.x, values]), delimiter=",",
               header=header, comments="", fmt="%.17g")


def load_field(path):
    """Read a CSV written by :func:`save_field`; returns ``(x, values)``."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1:]
