import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geogates.controls import hamiltonian_from_controls, synthesize_controls
from geogates.dynamics import propagator
from geogates.gates import (
    TARGETS,
    GateSpec,
    cphase_operator,
    evolution_operator_general,
    evolution_operator_simplified,
    gate_distance_up_to_phase,
    params_for_gate,
    path_evolution_operator,
    write_matrix_csv,
)
from geogates.paths import PathParams, aux_states, geometric_phase

angle = st.floats(-10, 10)


def test_parameter_table():
    assert params_for_gate("H") == (np.pi / 4, 0.0, 3 * np.pi)
    assert params_for_gate("T") == (0.0, 0.0, 9 * np.pi / 4)
    assert params_for_gate("s") == (0.0, 0.0, 5 * np.pi / 2)
    with pytest.raises(KeyError):
        params_for_gate("X")


def test_simplified_examples():
    h = evolution_operator_simplified(np.pi / 4, 0.0, 3 * np.pi)
    np.testing.assert_allclose(h, -1j * TARGETS["H"], atol=1e-15)
    t = evolution_operator_simplified(0.0, 0.0, 9 * np.pi / 4)
    np.testing.assert_allclose(t, np.diag([-np.exp(-9j * np.pi / 8), -np.exp(9j * np.pi / 8)]), atol=1e-15)
    assert gate_distance_up_to_phase(t, TARGETS["T"]) < 1e-14
    assert gate_distance_up_to_phase(evolution_operator_simplified(0, 0, 5 * np.pi / 2), TARGETS["S"]) < 1e-14


@given(angle, angle)
def test_full_sweep_is_identity(g, xi):
    np.testing.assert_allclose(evolution_operator_simplified(g, xi, 2 * np.pi), np.eye(2), atol=1e-14)


@given(angle, angle, angle)
def test_simplified_unit_determinant(g, xi, span):
    u = evolution_operator_simplified(g, xi, span)
    assert abs(abs(np.linalg.det(u)) - 1) < 1e-13


def test_general_identity_without_evolution():
    u = evolution_operator_general(0.3, 0.5, 1.1, 1.1, 0.7, 0.7, 0.0)
    np.testing.assert_allclose(u, np.eye(2), atol=1e-14)


@given(angle, angle, angle, angle, angle, angle, angle)
def test_general_unitary(g, xi, t0, t1, p0, p1, gam):
    u = evolution_operator_general(g, xi, t0, t1, p0, p1, gam)
    assert np.abs(u.conj().T @ u - np.eye(2)).max() < 1e-13


def test_general_matches_simplified_random():
    rng = np.random.default_rng(3)
    for _ in range(200):
        g, xi = rng.uniform(0, 2 * np.pi, 2)
        span = rng.choice([-1, 1]) * rng.uniform(2 * np.pi * (1 + 1e-9), 4 * np.pi)
        p = PathParams(g, xi, span, phi0=rng.uniform(-3, 3))
        a = path_evolution_operator(p)
        b = evolution_operator_simplified(g, xi, span)
        assert np.abs(a - b).max() < 1e-10


def test_general_equals_sum_over_auxiliary_states():
    """sum_k e^{i gamma_k} |psi_k(t)><psi_k(0)| at intermediate times."""
    p = PathParams(0.9, 0.4, -2.7 * np.pi, tau=1.0, phi0=0.3)
    a0, b0 = aux_states(p, 0.0)
    for t in np.linspace(0, 1, 9):
        a, b = aux_states(p, t)
        g = geometric_phase(p, t)
        direct = np.exp(1j * g) * np.outer(a, a0.conj()) + np.exp(-1j * g) * np.outer(b, b0.conj())
        np.testing.assert_allclose(path_evolution_operator(p, t), direct, atol=1e-13)


def test_general_matches_numerical_propagation_midway():
    p = PathParams(np.pi / 4, 0.0, 3 * np.pi)
    c = synthesize_controls(p)
    for t in (0.25, 0.5, 0.8):
        u = propagator(lambda s: hamiltonian_from_controls(c, s), t, 20_000)
        assert np.abs(u - path_evolution_operator(p, t)).max() < 1e-9


@pytest.mark.parametrize("name", ["H", "T", "S"])
def test_integrated_propagator_matches_closed_form(name):
    spec = GateSpec.named(name)
    c = synthesize_controls(spec.path())
    u = propagator(lambda t: hamiltonian_from_controls(c, t), 1.0, 20_000)
    assert gate_distance_up_to_phase(u, evolution_operator_simplified(*spec.params)) < 1e-6
    assert gate_distance_up_to_phase(u, spec.target) < 1e-6


def test_distance_examples():
    h = TARGETS["H"]
    assert gate_distance_up_to_phase(h, h) < 1e-15
    assert gate_distance_up_to_phase(h, -1j * h) < 1e-15
    assert gate_distance_up_to_phase(np.eye(2), np.array([[0, 1], [1, 0]])) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        gate_distance_up_to_phase(np.eye(2), np.eye(4))


@given(angle, angle, angle)
def test_distance_closed_form(a, b, c):
    u = evolution_operator_simplified(a, b, 2 * np.pi + abs(c))
    v = evolution_operator_simplified(b, c, 2 * np.pi + abs(a))
    expected = np.sqrt(max(0.0, 2 * 2 - 2 * abs(np.trace(v.conj().T @ u))))
    assert gate_distance_up_to_phase(u, v) == pytest.approx(expected, abs=1e-7)


def test_cphase_examples():
    np.testing.assert_array_equal(cphase_operator(0.0), np.eye(4))
    np.testing.assert_allclose(cphase_operator(np.pi / 2), np.diag([1, 1, 1, 1j]), atol=1e-16)
    np.testing.assert_allclose(cphase_operator(np.pi), np.diag([1, 1, 1, -1]), atol=1e-15)
    assert np.allclose(GateSpec("CPHASE", (np.pi / 2,)).target, cphase_operator(np.pi / 2))


def test_matrix_csv(tmp_path):
    f = tmp_path / "u.csv"
    write_matrix_csv(f, TARGETS["S"])
    rows = f.read_text().splitlines()
    assert rows[0] == "row,col,re,im" and rows[-1] == "1,1,0,1"
