"""Reaction-diffusion models with the product structure ``R(U, 0) = (A1 U, 0)``.

All built-in models are returned in shifted coordinates: the left end state
is moved to the origin and the variables are ordered ``(U, V)``.  Reaction
terms act on arrays of shape ``(..., n)``; Jacobians return ``(..., n, n)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = ["ReactionModel", "builtin_model", "eval_reaction", "eval_jacobian",
           "check_product_structure", "ignition", "BUILTIN_DEFAULTS"]

# smallest exponent whose exponential is still a normal double
_LOG_TINY = np.log(np.finfo(float).tiny)


def ignition(u, b: float = 1.0, deriv: int = 0) -> np.ndarray:
    """``exp(-b/u)`` for ``u > 0`` and 0 otherwise, with its derivatives.

    Values whose exponent would underflow are returned as exactly zero.
    """
    u = np.asarray(u, dtype=float)
    live = u > 0
    safe = np.where(live, u, 1.0)
    expo = -b / safe
    live &= expo >= _LOG_TINY
    g = np.where(live, np.exp(np.where(live, expo, 0.0)), 0.0)
    if deriv == 0:
        return g
    if deriv == 1:
        return g * b / safe**2
    if deriv == 2:
        return g * (b**2 / safe**4 - 2 * b / safe**3)
    raise ValueError("deriv must be 0, 1 or 2")


@dataclass(frozen=True)
class ReactionModel:
    """Immutable reaction-diffusion model ``Y_t = D Y_xx + R(Y)``.

    Attributes
    ----------
    name : str
    n, n1, n2 : int
        Component counts; the first `n1` components are ``U``.
    D : ndarray
        Diffusion coefficients.
    R, dR : callable
        Reaction map and its Jacobian, vectorized over leading axes.
    A1 : ndarray, shape (n1, n1)
    params : dict
    origin : ndarray
        Unshifted left end state (the shift applied to the variables).
    right_state : ndarray or None
        Right end state in shifted coordinates, when known.
    """

    name: str
    n: int
    n1: int
    n2: int
    D: np.ndarray
    R: Callable
    dR: Callable
    A1: np.ndarray
    params: dict = field(default_factory=dict)
    origin: np.ndarray | None = None
    right_state: np.ndarray | None = None

    def __post_init__(self):
        if self.n1 + self.n2 != self.n or self.n1 < 0 or self.n2 < 1:
            raise ValueError("need n1 + n2 = n with n2 >= 1")
        D = np.array(self.D, dtype=float).reshape(self.n)
        if np.any(D < 0):
            raise ValueError("diffusion coefficients must be nonnegative")
        A1 = np.array(self.A1, dtype=float).reshape(self.n1, self.n1)
        origin = np.zeros(self.n) if self.origin is None else np.array(self.origin, float)
        for name, arr in (("D", D), ("A1", A1), ("origin", origin)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.right_state is not None:
            rs = np.array(self.right_state, float).reshape(self.n)
            rs.setflags(write=False)
            object.__setattr__(self, "right_state", rs)

    @property
    def diffusive(self) -> np.ndarray:
        return self.D > 0

    def unshift(self, Y) -> np.ndarray:
        return np.asarray(Y) + self.origin

    def to_config(self) -> dict:
        if self.name == "custom_spec":
            raise TypeError("custom models carry callables and are not serializable")
        return {"name": self.name, **{k: float(v) for k, v in self.params.items()}}


def eval_reaction(model: ReactionModel, Y) -> np.ndarray:
    """``R(Y)`` in shifted coordinates."""
    return model.R(np.asarray(Y, dtype=float))


def eval_jacobian(model: ReactionModel, Y) -> np.ndarray:
    """``dR(Y)`` in shifted coordinates."""
    return model.dR(np.asarray(Y, dtype=float))


BUILTIN_DEFAULTS = {
    "gasless_combustion": {"beta": 0.5},
    "exo_endo": {"sigma": 0.5, "tau": 1.0, "a2": 1.0, "a3": 1.0, "b2": 1.0,
                 "b3": 1.0, "d2": 1.0, "d3": 1.0},
}


def _positive(params: dict, keys) -> None:
    for k in keys:
        v = params[k]
        if not (np.isfinite(v) and v > 0):
            raise ValueError(f"parameter {k} must be positive, got {v}")


def _gasless(beta: float) -> ReactionModel:
    um = 1.0 / beta

    def R(Y):
        u, v = Y[..., 0] + um, Y[..., 1]
        r = v * ignition(u)
        return np.stack([r, -beta * r], axis=-1)

    def dR(Y):
        u, v = Y[..., 0] + um, Y[..., 1]
        g, g1 = ignition(u), ignition(u, deriv=1)
        J = np.empty(Y.shape + (2,))
        J[..., 0, 0], J[..., 0, 1] = v * g1, g
        J[..., 1, 0], J[..., 1, 1] = -beta * v * g1, -beta * g
        return J

    return ReactionModel("gasless_combustion", 2, 1, 1, np.array([1.0, 0.0]), R, dR,
                         np.zeros((1, 1)), {"beta": beta}, origin=np.array([um, 0.0]),
                         right_state=np.array([-um, 1.0]))


def _exo_endo(p: dict) -> ReactionModel:
    s, tau = p["sigma"], p["tau"]
    a2, a3, b2, b3 = p["a2"], p["a3"], p["b2"], p["b3"]
    um = 1.0 - s / tau

    def R(Y):
        T, y2, y3 = Y[..., 0] + um, Y[..., 1], Y[..., 2]
        r2, r3 = y2 * a2 * ignition(T, b2), y3 * a3 * ignition(T, b3)
        return np.stack([r2 - s * r3, -r2, -tau * r3], axis=-1)

    def dR(Y):
        T, y2, y3 = Y[..., 0] + um, Y[..., 1], Y[..., 2]
        f2, f3 = a2 * ignition(T, b2), a3 * ignition(T, b3)
        f2p, f3p = a2 * ignition(T, b2, 1), a3 * ignition(T, b3, 1)
        J = np.zeros(Y.shape + (3,))
        J[..., 0, 0] = y2 * f2p - s * y3 * f3p
        J[..., 0, 1], J[..., 0, 2] = f2, -s * f3
        J[..., 1, 0], J[..., 1, 1] = -y2 * f2p, -f2
        J[..., 2, 0], J[..., 2, 2] = -tau * y3 * f3p, -tau * f3
        return J

    return ReactionModel("exo_endo", 3, 1, 2, np.array([1.0, p["d2"], p["d3"]]), R, dR,
                         np.zeros((1, 1)), dict(p), origin=np.array([um, 0.0, 0.0]),
                         right_state=np.array([-um, 1.0, 1.0]))


def builtin_model(name: str, params: dict | None = None, **kwargs) -> ReactionModel:
    """Construct a model by name.

    Parameters
    ----------
    name : {'gasless_combustion', 'exo_endo', 'custom_spec'}
    params : dict
        Built-ins accept the keys of ``BUILTIN_DEFAULTS[name]`` (missing keys
        take defaults).  ``custom_spec`` requires ``R``, ``dR``, ``A1``, ``D``
        and ``n1``, optionally ``origin``, ``right_state`` and scalar params.
    """
    params = dict(params or {}, **kwargs)
    if name == "gasless_combustion":
        p = {**BUILTIN_DEFAULTS[name], **params}
        unknown = set(p) - set(BUILTIN_DEFAULTS[name])
        if unknown:
            raise ValueError(f"unknown parameters {sorted(unknown)} for {name}")
        _positive(p, ["beta"])
        return _gasless(float(p["beta"]))
    if name == "exo_endo":
        p = {**BUILTIN_DEFAULTS[name], **params}
        unknown = set(p) - set(BUILTIN_DEFAULTS[name])
        if unknown:
            raise ValueError(f"unknown parameters {sorted(unknown)} for {name}")
        p = {k: float(v) for k, v in p.items()}
        _positive(p, list(p))
        return _exo_endo(p)
    if name == "custom_spec":
        missing = [k for k in ("R", "dR", "A1", "D", "n1") if k not in params]
        if missing:
            raise ValueError(f"custom_spec needs {missing}")
        D = np.atleast_1d(np.asarray(params["D"], float))
        n, n1 = D.size, int(params["n1"])
        extra = {k: v for k, v in params.items()
                 if k not in ("R", "dR", "A1", "D", "n1", "origin", "right_state")}
        model = ReactionModel("custom_spec", n, n1, n - n1, D, params["R"], params["dR"],
                              params["A1"], extra, params.get("origin"),
                              params.get("right_state"))
        rep = check_product_structure(model, 64)
        if not rep["pass"]:
            raise ValueError(f"custom model violates R(U,0)=(A1 U,0): "
                             f"max violation {rep['max_violation']:.3e}")
        return model
    raise ValueError(f"unknown model {name!r}; choose gasless_combustion, exo_endo, custom_spec")


def check_product_structure(model: ReactionModel, sample_count: int = 100,
                            box: float = 2.0, seed: int = 0) -> dict:
    """Sample ``U`` in ``[-box, box]^n1`` and measure ``|R(U,0) - (A1 U, 0)|``."""
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    Y = np.zeros((sample_count, model.n))
    U = rng.uniform(-box, box, size=(sample_count, model.n1))
    Y[:, : model.n1] = U
    R = eval_reaction(model, Y)
    target = np.zeros_like(R)
    AU = U @ model.A1.T
    target[:, : model.n1] = AU
    viol = np.max(np.abs(R - target), axis=1)
    scale = 1.0 + (np.max(np.abs(AU), axis=1) if model.n1 else 0.0)
    ok = bool(np.all(viol <= 1e-12 * scale))
    return {"max_violation": float(viol.max()), "pass": ok}
