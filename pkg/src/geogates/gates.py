"""Closed-form gate operators, the named-gate table and phase-blind comparison."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .paths import PathParams, geometric_phase, phi_schedule

GATE_PARAMS = {
    "H": (np.pi / 4, 0.0, 3 * np.pi),
    "T": (0.0, 0.0, 9 * np.pi / 4),
    "S": (0.0, 0.0, 5 * np.pi / 2),
}

TARGETS = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]),
    "S": np.diag([1, 1j]),
}


@dataclass(frozen=True)
class GateSpec:
    """A named gate: single-qubit names carry (Gamma, xi, phi_span), CPHASE its angle."""

    name: str
    params: tuple

    @classmethod
    def named(cls, name: str) -> "GateSpec":
        if name.upper().startswith("CPHASE"):
            raise ValueError("use GateSpec('CPHASE', (angle,)) for two-qubit gates")
        return cls(name.upper(), params_for_gate(name))

    def path(self, tau: float = 1.0, phi0: float = 0.0) -> PathParams:
        g, xi, span = self.params
        return PathParams(g, xi, span, tau=tau, phi0=phi0)

    @property
    def target(self) -> np.ndarray:
        if self.name == "CPHASE":
            return cphase_operator(self.params[0])
        return TARGETS[self.name]


def params_for_gate(name: str):
    try:
        return GATE_PARAMS[name.upper()]
    except KeyError:
        raise KeyError(f"unknown gate {name!r}; expected one of {sorted(GATE_PARAMS)}") from None


def _su2(u1, u2):
    return np.array([[u1, u2], [-np.conj(u2), np.conj(u1)]])


def evolution_operator_general(gamma_big, xi, theta0, theta_tau, phi0, phi_tau, gamma):
    """Noncyclic geometric evolution operator between two points of a path.

    Evaluates sum_k e^{i gamma_k} |psi_k(end)><psi_k(0)| with gamma_1 = -gamma_2 = gamma
    in closed form.
    """
    # The printed closed form is written for the opposite sign of the phase.
    g = -gamma
    pp = phi_tau + phi0
    s0, c0 = np.sin(theta0 / 2), np.cos(theta0 / 2)
    st, ct = np.sin(theta_tau / 2), np.cos(theta_tau / 2)
    cg2, sg2, sg = np.cos(gamma_big / 2) ** 2, np.sin(gamma_big / 2) ** 2, np.sin(gamma_big)
    e = np.exp
    u1 = 0.5 * e(-0.5j * (pp + 2 * g)) * (
        s0
        * (
            -ct * sg * (-1 + e(1j * (pp + 2 * g)))
            + 2 * e(1j * (phi0 + 2 * g)) * cg2 * st
            + 2 * e(1j * phi_tau) * st * sg2
        )
        + c0
        * (
            2 * e(1j * (phi_tau + 2 * g)) * ct * sg2
            + 2 * e(1j * phi0) * ct * cg2
            + (e(1j * pp) - e(2j * g)) * st * sg
        )
    )
    u2 = 0.5 * e(-0.5j * (pp + 2 * (g + xi))) * (
        -ct
        * (
            2 * e(1j * (pp + 2 * g)) * s0 * sg2
            + 2 * cg2 * s0
            - (e(1j * phi0) - e(1j * (phi_tau + 2 * g))) * c0 * sg
        )
        + st
        * (
            2 * e(1j * pp) * c0 * sg2
            + 2 * e(2j * g) * c0 * cg2
            - (e(1j * phi_tau) - e(1j * (phi0 + 2 * g))) * s0 * sg
        )
    )
    return _su2(u1, u2)


def path_evolution_operator(p: PathParams, t: float | None = None) -> np.ndarray:
    """Evolution operator from 0 to ``t`` (default tau) along the scheduled path."""
    t = p.tau if t is None else t
    return evolution_operator_general(
        p.gamma_big,
        p.xi,
        p.theta,
        p.theta,
        p.phi0,
        float(phi_schedule(p, t)),
        float(geometric_phase(p, t)),
    )


def evolution_operator_simplified(gamma_big, xi, phi_span) -> np.ndarray:
    """Gate realised at t = tau by the zero-dynamical-phase schedule."""
    h = phi_span / 2
    u1 = -np.cos(h) + 1j * np.cos(gamma_big) * np.sin(h)
    u2 = np.sin(gamma_big) * np.sin(h) * (np.sin(xi) + 1j * np.cos(xi))
    return _su2(u1, u2)


def gate_distance_up_to_phase(u, v) -> float:
    """min over phi of ||u - e^{i phi} v||_F, in closed form."""
    u, v = np.asarray(u), np.asarray(v)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch {u.shape} vs {v.shape}")
    # The minimiser is the phase of tr(v^+ u); evaluate the norm there directly.
    overlap = np.vdot(v, u)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(u - phase * v))


def cphase_operator(gamma_g: float) -> np.ndarray:
    """diag(1, 1, 1, e^{i gamma_g}) in the |q1 q2> lexicographic basis."""
    return np.diag([1, 1, 1, np.exp(1j * gamma_g)])


def write_matrix_csv(path, u) -> None:
    u = np.asarray(u)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "col", "re", "im"])
        for (i, j), z in np.ndenumerate(u):
            w.writerow([i, j, f"{z.real:.17g}", f"{z.imag:.17g}"])
