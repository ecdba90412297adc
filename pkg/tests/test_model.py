import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from frontlab.model import (BUILTIN_DEFAULTS, ReactionModel, builtin_model,
                            check_product_structure, eval_jacobian, eval_reaction, ignition)
from oracles import fd_jacobian


def test_ignition_values_and_cutoff():
    assert ignition(2.0) == pytest.approx(np.exp(-0.5), rel=1e-15)
    assert ignition(0.0) == 0.0
    assert ignition(-1.0) == 0.0
    # exponent below the normal range underflows to exactly zero
    assert ignition(1e-5) == 0.0
    with pytest.raises(ValueError):
        ignition(1.0, deriv=3)


@pytest.mark.parametrize("deriv", [1, 2])
def test_ignition_derivatives(deriv):
    u = np.linspace(0.2, 3.0, 50)
    h = 1e-6
    fd = (ignition(u + h, 1.3, deriv - 1) - ignition(u - h, 1.3, deriv - 1)) / (2 * h)
    assert np.allclose(ignition(u, 1.3, deriv), fd, rtol=1e-7, atol=1e-9)


def test_gasless_end_states_are_equilibria(gasless):
    assert np.all(eval_reaction(gasless, np.zeros(2)) == 0)
    assert np.allclose(eval_reaction(gasless, gasless.right_state), 0, atol=1e-300)
    assert gasless.unshift(np.zeros(2)) == pytest.approx([2.0, 0.0])
    # mass balance: beta R1 + R2 = 0
    Y = np.array([[0.3, 0.7], [-1.0, 0.2]])
    R = eval_reaction(gasless, Y)
    assert np.allclose(0.5 * R[:, 0] + R[:, 1], 0, atol=1e-16)


@pytest.mark.parametrize("name", ["gasless_combustion", "exo_endo"])
@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_jacobian_matches_finite_differences(name, data):
    m = builtin_model(name)
    # stay away from the ignition cutoff u = -origin[0] where R is only C^inf one-sided
    Y = data.draw(arrays(float, (5, m.n), elements=st.floats(-0.4, 1.5)))
    Y[:, 0] = np.abs(Y[:, 0]) + 0.05 - m.origin[0] * 0.5
    J = eval_jacobian(m, Y)
    assert np.allclose(J, fd_jacobian(m.R, Y), rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize("name", ["gasless_combustion", "exo_endo"])
def test_builtin_product_structure(name):
    rep = check_product_structure(builtin_model(name))
    assert rep["pass"] and rep["max_violation"] == 0.0


def test_exo_endo_defaults_and_validation():
    m = builtin_model("exo_endo")
    assert m.n == 3 and m.n1 == 1 and m.n2 == 2
    assert m.origin[0] == pytest.approx(1 - 0.5 / 1.0)
    assert set(m.params) == set(BUILTIN_DEFAULTS["exo_endo"])
    with pytest.raises(ValueError, match="positive"):
        builtin_model("exo_endo", tau=-1.0)
    with pytest.raises(ValueError, match="unknown"):
        builtin_model("gasless_combustion", gamma=1.0)
    with pytest.raises(ValueError, match="unknown model"):
        builtin_model("nope")


def test_custom_model_must_have_product_structure():
    lin = lambda Y: np.stack([Y[..., 0] * Y[..., 1], -Y[..., 1] + Y[..., 0]], axis=-1)
    dlin = lambda Y: np.zeros(Y.shape + (2,))
    with pytest.raises(ValueError, match="violates"):
        builtin_model("custom_spec", R=lin, dR=dlin, A1=[[0.0]], D=[1.0, 0.0], n1=1)
    good = lambda Y: np.stack([-Y[..., 0] + Y[..., 1], -Y[..., 1]], axis=-1)
    m = builtin_model("custom_spec", R=good, dR=dlin, A1=[[-1.0]], D=[1.0, 1.0], n1=1)
    assert m.name == "custom_spec"
    with pytest.raises(TypeError):
        m.to_config()
    with pytest.raises(ValueError, match="needs"):
        builtin_model("custom_spec", R=good)


def test_model_arrays_are_read_only(gasless):
    with pytest.raises(ValueError):
        gasless.D[0] = 3.0
    with pytest.raises(ValueError):
        ReactionModel("x", 2, 2, 0, [1, 1], None, None, np.eye(2))


def test_config_round_trip(gasless):
    cfg = gasless.to_config()
    m = builtin_model(cfg.pop("name"), cfg)
    Y = np.random.default_rng(0).uniform(-1, 1, (4, 2))
    assert np.array_equal(eval_reaction(m, Y), eval_reaction(gasless, Y))
