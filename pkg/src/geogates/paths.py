"""Evolution paths on the Bloch sphere and the phases they accumulate.

A path is fixed by two constant frame angles (Gamma, xi) that pick the
``mu`` basis, a constant polar angle theta and a linear azimuth schedule
phi(t).  The schedule ``phi(t) = 2 pi t / (tau cos theta) + phi0`` removes the
dynamical phase for every superposition of the two auxiliary states.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

TWO_PI = 2.0 * np.pi
_COS_FLOOR = 1e-9


class DegenerateScheduleError(ValueError):
    """Raised when cos(theta) is too small for the zero-dynamical-phase schedule."""


@dataclass(frozen=True)
class PathParams:
    """Degrees of freedom of one gate path.

    ``phi_span`` is the total azimuth swept, phi(tau) - phi(0).  When ``theta``
    is omitted it is derived from ``cos theta = 2 pi / phi_span``.
    """

    gamma_big: float
    xi: float
    phi_span: float
    tau: float = 1.0
    phi0: float = 0.0
    theta: float | None = field(default=None)

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if abs(self.phi_span) < TWO_PI * (1 - 1e-12):
            raise ValueError(
                f"|phi_span| = {abs(self.phi_span):.6g} < 2 pi: no real theta realises the schedule"
            )
        cos_theta = float(np.clip(TWO_PI / self.phi_span, -1.0, 1.0))
        derived = float(np.arccos(cos_theta))
        if self.theta is None:
            object.__setattr__(self, "theta", derived)
        elif abs(self.theta - derived) > 1e-12:
            raise ValueError(
                f"theta={self.theta!r} inconsistent with phi_span (expected {derived!r})"
            )
        if abs(cos_theta) < _COS_FLOOR:
            raise DegenerateScheduleError("cos(theta) vanishes; drive rate diverges")

    @property
    def cos_theta(self) -> float:
        return float(np.cos(self.theta))

    @property
    def phi_rate(self) -> float:
        """Constant azimuth velocity phi_dot."""
        return self.phi_span / self.tau

    @property
    def phi_tau(self) -> float:
        return self.phi0 + self.phi_span

    def with_tau(self, tau: float) -> "PathParams":
        return PathParams(self.gamma_big, self.xi, self.phi_span, tau, self.phi0)


@dataclass(frozen=True)
class SuperpositionLabel:
    """Mixing angle and relative phase of a general evolving state."""

    lambda_big: float
    zeta: float


def mu_basis(p: PathParams):
    """Return the constant orthonormal pair (|mu1>, |mu2>)."""
    c, s = np.cos(p.gamma_big / 2), np.sin(p.gamma_big / 2)
    lo, hi = np.exp(-0.5j * p.xi), np.exp(0.5j * p.xi)
    return np.array([c * lo, s * hi]), np.array([s * lo, -c * hi])


def phi_schedule(p: PathParams, t):
    """Azimuth that makes the accumulated dynamical phase vanish."""
    ct = p.cos_theta
    if abs(ct) < _COS_FLOOR:
        raise DegenerateScheduleError("cos(theta) vanishes; drive rate diverges")
    return TWO_PI * np.asarray(t, dtype=float) / (p.tau * ct) + p.phi0


def aux_states_at(p: PathParams, theta, phi):
    """Auxiliary pair for explicit angles; broadcasts over ``phi``.

    Returns two arrays of shape ``phi.shape + (2,)``.
    """
    mu1, mu2 = mu_basis(p)
    phi = np.asarray(phi, dtype=float)[..., None]
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    em, ep = np.exp(-0.5j * phi), np.exp(0.5j * phi)
    psi1 = c * em * mu1 + s * ep * mu2
    psi2 = s * em * mu1 - c * ep * mu2
    return psi1, psi2


def aux_states(p: PathParams, t):
    """Auxiliary states |psi1(t)>, |psi2(t)> along the scheduled path."""
    return aux_states_at(p, p.theta, phi_schedule(p, t))


def geometric_phase(p: PathParams, t):
    """gamma(t) = cos(theta) (phi(t) - phi0) / 2; equals pi at t = tau."""
    return 0.5 * p.cos_theta * (phi_schedule(p, t) - p.phi0)


def dynamical_phase_integral(t, theta, theta_dot, phi_dot, gamma, s: SuperpositionLabel) -> float:
    """Simpson integral of the dynamical-phase density along a sampled path.

    All array arguments are sampled on the uniform grid ``t`` (odd length).
    """
    two_gamma = 2.0 * np.asarray(gamma)
    integrand = 0.5 * np.sin(s.lambda_big) * (
        np.cos(s.zeta + two_gamma) * phi_dot * np.sin(theta)
        - np.sin(s.zeta + two_gamma) * theta_dot
    )
    return float(simpson(np.broadcast_to(integrand, np.shape(t)), x=t))


def dynamical_phase(p: PathParams, s: SuperpositionLabel, quadrature_steps: int = 10_000) -> float:
    """Dynamical phase of e^{-i zeta} cos(L/2)|Phi1> + sin(L/2)|Phi2> over [0, tau].

    Composite Simpson with ``quadrature_steps`` intervals (rounded up to even).
    """
    if quadrature_steps < 100:
        raise ValueError("quadrature_steps must be >= 100")
    n = quadrature_steps + (quadrature_steps % 2)
    t = np.linspace(0.0, p.tau, n + 1)
    return dynamical_phase_integral(t, p.theta, 0.0, p.phi_rate, geometric_phase(p, t), s)
