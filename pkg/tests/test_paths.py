import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geogates.paths import (
    DegenerateScheduleError,
    PathParams,
    SuperpositionLabel,
    aux_states,
    aux_states_at,
    dynamical_phase,
    dynamical_phase_integral,
    geometric_phase,
    mu_basis,
    phi_schedule,
)

angles = st.floats(-10.0, 10.0, allow_nan=False)
spans = st.one_of(st.floats(2 * np.pi, 6 * np.pi), st.floats(-6 * np.pi, -2 * np.pi))

GATE_TRIPLES = [(np.pi / 4, 0.0, 3 * np.pi), (0.0, 0.0, 9 * np.pi / 4), (0.0, 0.0, 5 * np.pi / 2)]


def test_mu_basis_trivial_angles():
    mu1, mu2 = mu_basis(PathParams(0.0, 0.0, 3 * np.pi))
    np.testing.assert_allclose(mu1, [1, 0], atol=1e-15)
    np.testing.assert_allclose(mu2, [0, -1], atol=1e-15)


def test_mu_basis_quarter_turn():
    mu1, mu2 = mu_basis(PathParams(np.pi / 2, 0.0, 3 * np.pi))
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(mu1, [s, s], atol=1e-15)
    np.testing.assert_allclose(mu2, [s, -s], atol=1e-15)


@given(angles, angles)
def test_mu_basis_orthonormal(g, xi):
    mu1, mu2 = mu_basis(PathParams(g, xi, 3 * np.pi))
    assert abs(np.vdot(mu1, mu1) - 1) < 1e-14
    assert abs(np.vdot(mu2, mu2) - 1) < 1e-14
    assert abs(np.vdot(mu1, mu2)) < 1e-14


def test_aux_states_examples():
    p = PathParams(0.0, 0.0, 3 * np.pi)
    psi1, _ = aux_states_at(p, 0.0, 0.7)
    np.testing.assert_allclose(psi1, [np.exp(-0.35j), 0], atol=1e-15)
    psi1, _ = aux_states_at(p, np.pi, 0.0)
    np.testing.assert_allclose(psi1, [0, -1], atol=1e-15)


def test_aux_states_orthonormal_random_draws():
    rng = np.random.default_rng(7)
    for g, xi, th, ph in rng.uniform(-2 * np.pi, 2 * np.pi, size=(1000, 4)):
        psi1, psi2 = aux_states_at(PathParams(g, xi, 3 * np.pi), th, ph)
        gram = np.array([[np.vdot(a, b) for b in (psi1, psi2)] for a in (psi1, psi2)])
        assert np.abs(gram - np.eye(2)).max() < 1e-13


def test_phi_schedule_endpoints():
    p = PathParams(0.0, 0.0, 3 * np.pi, tau=2.0, phi0=0.4)
    assert phi_schedule(p, 0.0) == pytest.approx(0.4, abs=1e-15)
    assert phi_schedule(p, 2.0) == pytest.approx(0.4 + 3 * np.pi, abs=1e-12)
    assert p.cos_theta == pytest.approx(2 / 3, abs=1e-15)
    cyclic = PathParams(0.0, 0.0, 2 * np.pi, phi0=0.1)
    assert phi_schedule(cyclic, 1.0) == pytest.approx(0.1 + 2 * np.pi, abs=1e-12)


def test_span_below_two_pi_rejected():
    with pytest.raises(ValueError):
        PathParams(0.0, 0.0, 1.5 * np.pi)


def test_nonpositive_tau_rejected():
    with pytest.raises(ValueError):
        PathParams(0.0, 0.0, 3 * np.pi, tau=-1.0)


def test_theta_consistency_check():
    PathParams(0.0, 0.0, 3 * np.pi, theta=float(np.arccos(2 / 3)))
    with pytest.raises(ValueError):
        PathParams(0.0, 0.0, 3 * np.pi, theta=1.0)


def test_degenerate_schedule_error():
    with pytest.raises(DegenerateScheduleError):
        PathParams(0.0, 0.0, 1e12)


def test_geometric_phase_examples():
    p = PathParams(0.0, 0.0, 3 * np.pi)
    assert geometric_phase(p, 0.0) == 0.0
    assert geometric_phase(p, 0.5) == pytest.approx(np.pi / 2, abs=1e-14)


@given(spans, st.floats(0.1, 10.0))
def test_geometric_phase_is_pi_at_tau(span, tau):
    p = PathParams(0.3, 0.2, span, tau=tau)
    assert abs(geometric_phase(p, tau) - np.pi) < 1e-12


def test_dynamical_phase_trivial_cases():
    p = PathParams(np.pi / 4, 0.0, 3 * np.pi)
    assert dynamical_phase(p, SuperpositionLabel(0.0, 1.3)) == 0.0
    t = np.linspace(0, 1, 101)
    assert dynamical_phase_integral(t, 0.5, 0.0, 0.0, np.zeros_like(t), SuperpositionLabel(1.0, 0.2)) == 0.0


def test_dynamical_phase_vanishes_on_schedule():
    p = PathParams(np.pi / 4, 0.0, 3 * np.pi)
    assert abs(dynamical_phase(p, SuperpositionLabel(np.pi / 2, 0.37))) < 1e-8


def test_dynamical_phase_nonzero_before_tau():
    # Cancellation needs the full sweep; a quarter of it leaves a residue.
    p = PathParams(0.0, 0.0, 3 * np.pi)
    t = np.linspace(0, 0.25, 10_001)
    val = dynamical_phase_integral(t, p.theta, 0.0, p.phi_rate, geometric_phase(p, t), SuperpositionLabel(np.pi / 2, 0.0))
    # closed form: phi_dot sin(theta) / 2 * (sin(pi / 2) / (2 pi)) * tau
    assert val == pytest.approx(p.phi_rate * np.sin(p.theta) / (4 * np.pi), rel=1e-10)


def test_dynamical_phase_random_paths_and_labels():
    rng = np.random.default_rng(11)
    for _ in range(20):
        span = rng.choice([-1, 1]) * rng.uniform(2 * np.pi, 6 * np.pi)
        p = PathParams(*rng.uniform(0, 2 * np.pi, 2), span, tau=rng.uniform(0.1, 3), phi0=rng.uniform(0, 6))
        for lam, zeta in rng.uniform(0, 2 * np.pi, size=(100, 2)):
            assert abs(dynamical_phase(p, SuperpositionLabel(lam, zeta))) < 1e-8


def test_quadrature_floor():
    with pytest.raises(ValueError):
        dynamical_phase(PathParams(0.0, 0.0, 3 * np.pi), SuperpositionLabel(1, 1), quadrature_steps=50)


@settings(max_examples=50)
@given(angles, angles, st.sampled_from([2 * np.pi, -2 * np.pi]))
def test_cyclic_reduction(g, xi, span):
    p = PathParams(g, xi, span)
    a0, b0 = aux_states(p, 0.0)
    a1, b1 = aux_states(p, 1.0)
    assert abs(abs(np.vdot(a0, a1)) - 1) < 1e-12
    assert abs(abs(np.vdot(b0, b1)) - 1) < 1e-12


@pytest.mark.parametrize("triple", GATE_TRIPLES)
def test_noncyclic_endpoints(triple):
    p = PathParams(*triple)
    a0, _ = aux_states(p, 0.0)
    a1, _ = aux_states(p, 1.0)
    assert abs(np.vdot(a0, a1)) < 1 - 1e-6


def test_aux_states_solve_schroedinger_equation():
    """The synthesized Hamiltonian transports |psi1> up to the phase e^{i gamma}."""
    from scipy.integrate import solve_ivp

    from geogates.controls import hamiltonian_from_controls, synthesize_controls

    p = PathParams(0.7, 0.4, -3.3 * np.pi, tau=1.3, phi0=0.2)
    c = synthesize_controls(p)
    psi0, _ = aux_states(p, 0.0)
    ts = np.linspace(0, p.tau, 50)
    sol = solve_ivp(
        lambda t, y: -1j * hamiltonian_from_controls(c, t) @ y,
        (0, p.tau), psi0.astype(complex), t_eval=ts, rtol=1e-12, atol=1e-12, method="DOP853",
    )
    for k, t in enumerate(ts):
        expected = np.exp(1j * geometric_phase(p, t)) * aux_states(p, t)[0]
        assert 1 - abs(np.vdot(expected, sol.y[:, k])) ** 2 < 1e-8
        assert abs(np.vdot(expected, sol.y[:, k]) - 1) < 1e-6
