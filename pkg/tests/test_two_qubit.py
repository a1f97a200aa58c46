import logging

import numpy as np
import pytest
from scipy.special import j1

from geogates.dynamics import propagate_state, propagator
from geogates.gates import cphase_operator, gate_distance_up_to_phase
from geogates.transmon import mhz
from geogates.two_qubit import (
    COMPUTATIONAL,
    J1_FIRST_ZERO,
    CPhaseSchedule,
    FrameCalibration,
    InfeasibleDesignError,
    TwoQubitParams,
    bessel_j1,
    build_interaction_hamiltonian,
    calibrate,
    calibrate_frame,
    computational_channel,
    design_cphase,
    effective_hamiltonian,
    projected_propagator,
    simulate_two_qubit,
)

I02, I11 = 2, 4


def test_bessel_examples():
    assert bessel_j1(0.0) == 0.0
    # scipy.special.j1(1.7) = 0.5777652...
    assert bessel_j1(1.7) == pytest.approx(0.577765, abs=1e-5)
    for b in (0.5, 1.7, 3.0):
        assert bessel_j1(-b) == -bessel_j1(b)


@pytest.mark.parametrize("beta", np.linspace(-6, 6, 25))
def test_bessel_matches_scipy(beta):
    assert bessel_j1(beta) == pytest.approx(j1(beta), abs=1e-14)


def test_first_zero():
    assert abs(bessel_j1(J1_FIRST_ZERO)) < 1e-12


def test_params_validation():
    with pytest.raises(InfeasibleDesignError):
        TwoQubitParams(beta=4.0)
    with pytest.raises(ValueError):
        TwoQubitParams(g12=-1.0)
    with pytest.raises(ValueError):
        TwoQubitParams(kappa2p=-1.0)


def test_interaction_hamiltonian_examples():
    assert np.all(build_interaction_hamiltonian(TwoQubitParams(g12=0.0), 0.3) == 0)
    p = TwoQubitParams(beta=0.0)
    h = build_interaction_hamiltonian(p, 0.0)
    assert h[1, 3] == p.g12
    assert h[I02, I11] == pytest.approx(np.sqrt(2) * p.g12, rel=1e-15)
    assert h[I11, 6] == pytest.approx(np.sqrt(2) * p.g12, rel=1e-15)
    assert np.count_nonzero(h) == 6


def test_interaction_hamiltonian_hermitian():
    t = np.random.default_rng(0).uniform(0, 1, 100)
    p = TwoQubitParams(eta=lambda s: 3.0 * s)
    h = build_interaction_hamiltonian(p, t)
    assert np.abs(h - np.conj(np.swapaxes(h, -1, -2))).max() < 1e-14


def test_effective_hamiltonian_examples():
    p = TwoQubitParams()
    assert p.omega12 == pytest.approx(mhz(8.17), rel=1e-3)
    assert p.delta_prime == pytest.approx(mhz(-6.9), rel=1e-9)
    assert TwoQubitParams(nu=mhz(600 - 280)).delta_prime == 0.0
    h = effective_hamiltonian(p, np.array([0.0, 0.1]))
    assert np.abs(h[..., 0, 1]).max() == pytest.approx(p.omega12 / 2)
    assert h[0, 0, 0] == pytest.approx(-p.delta_prime / 2)


def test_path_frame_design_example():
    p = TwoQubitParams()
    s = design_cphase(p, np.pi / 2, frame="path", phi_span=3 * np.pi)
    assert s.tau == pytest.approx(np.sqrt(5) / (3 * 8.17), rel=2e-3)
    q = s.apply(p)
    assert q.delta_prime / q.omega12 == pytest.approx(-np.sqrt(5) / 2, rel=1e-12)


def test_interaction_frame_design():
    p = TwoQubitParams()
    s = design_cphase(p, np.pi / 2)
    assert s.tau == pytest.approx(np.sqrt(3) * np.pi / p.omega12, rel=1e-12)
    # generalised Rabi cycle: (Omega tau)^2 + (w tau)^2 = (2 pi)^2
    w = s.eta_rate + s.apply(p).delta_prime
    assert (p.omega12 * s.tau) ** 2 + (w * s.tau) ** 2 == pytest.approx(4 * np.pi**2, rel=1e-12)
    assert s.nu == p.nu


def test_design_infeasible_cases():
    with pytest.raises(InfeasibleDesignError):
        design_cphase(TwoQubitParams(g12=0.0), np.pi / 2)
    with pytest.raises(InfeasibleDesignError):
        design_cphase(TwoQubitParams(), np.pi)
    with pytest.raises(InfeasibleDesignError):
        design_cphase(TwoQubitParams(), 0.0)
    with pytest.raises(ValueError):
        design_cphase(TwoQubitParams(), np.pi / 2, phi_span=3 * np.pi)
    with pytest.raises(ValueError):
        design_cphase(TwoQubitParams(), np.pi / 2, frame="lab")


def test_identity_channel_without_coupling_or_noise():
    p = TwoQubitParams(g12=0.0, kappa1=0.0, kappa2=0.0, kappa1p=0.0, kappa2p=0.0)
    chan, _ = computational_channel(p, 0.1, 2000)
    ident = np.zeros((81, 16), dtype=complex)
    cols = [a * 9 + b for a in COMPUTATIONAL for b in COMPUTATIONAL]
    ident[cols, np.arange(16)] = 1.0
    assert np.abs(chan - ident).max() < 1e-8


def test_calibrate_frame_recovers_phases():
    u = np.diag(np.exp(1j * np.array([0.3, 0.3 + 0.2, 0.3 - 0.4, 0.3 + 0.2 - 0.4 + np.pi / 2])))
    cal = calibrate_frame(u, np.pi / 2)
    assert (cal.z1, cal.z2) == (pytest.approx(-0.4), pytest.approx(0.2))
    assert cal.conditional_phase == pytest.approx(np.pi / 2)
    assert cal.distance < 1e-12
    assert gate_distance_up_to_phase(FrameCalibration(0, 0, 0, 1, 0).reference(1.0), cphase_operator(1.0)) == 0


@pytest.fixture(scope="module")
def closed_gate():
    p = TwoQubitParams(kappa1=0.0, kappa2=0.0, kappa1p=0.0, kappa2p=0.0)
    sched, cal = calibrate(p, design_cphase(p, np.pi / 2))
    return p, sched, cal


def test_calibration_logs_both_senses(caplog):
    p = TwoQubitParams()
    with caplog.at_level(logging.INFO, logger="geogates.two_qubit"):
        calibrate(p, design_cphase(p, np.pi / 2), steps=4000)
    assert caplog.text.count("eta sense") == 2


def test_effective_model_validity(closed_gate):
    p, sched, _ = closed_gate
    q = sched.apply(p)
    times = np.linspace(0, sched.tau, 101)
    full = [propagate_state(lambda t: build_interaction_hamiltonian(q, t), np.eye(9)[I11], t, 4000) for t in times[1:]]
    eff = [propagate_state(lambda t: effective_hamiltonian(q, t), [0, 1], t, 4000) for t in times[1:]]
    for a, b in zip(full, eff):
        assert abs(abs(a[I11]) ** 2 - abs(b[1]) ** 2) < 2e-2
        assert abs(abs(a[I02]) ** 2 - abs(b[0]) ** 2) < 2e-2


def test_computational_survival(closed_gate):
    p, sched, _ = closed_gate
    u = propagator(lambda t: build_interaction_hamiltonian(sched.apply(p), t), sched.tau, 20_000)
    for i in (0, 1, 3):
        assert abs(u[i, i]) ** 2 > 1 - 1e-3


def test_gate_action_distance(closed_gate):
    p, sched, cal = closed_gate
    u4 = projected_propagator(sched.apply(p), sched.tau)
    assert gate_distance_up_to_phase(u4, cal.reference(np.pi / 2)) < 0.05


@pytest.fixture(scope="module")
def reference_run():
    p = TwoQubitParams()
    return simulate_two_qubit(p, design_cphase(p, np.pi / 2))


def test_leakage_bound(reference_run):
    assert reference_run["peak_outside"] < 5e-3
    assert reference_run.series["outside"].max() == pytest.approx(reference_run["peak_outside"])


def test_sampling_modes_agree(reference_run):
    assert abs(reference_run["F2"] - reference_run["F2_corners"]) < 1e-5


def test_reference_state_fidelity(reference_run):
    assert reference_run["Fs"] == pytest.approx(0.9980, abs=5e-4)


def test_reference_average_fidelity(reference_run):
    assert reference_run["F2"] >= 0.9987


def test_schedule_as_dict():
    s = CPhaseSchedule(np.pi / 2, 0.1, 1.0, 2.0)
    assert s.as_dict()["frame"] == "interaction"
    assert s.eta(0.5) == pytest.approx(1.0)
