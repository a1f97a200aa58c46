"""Three-level transmon realisation of the single-qubit gates, with DRAG correction.

Units: angular frequencies in rad/us, times in us.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .controls import ControlField, dg_gate_controls, synthesize_controls
from .dynamics import (
    DEFAULT_STEPS,
    LindbladModel,
    StepRefinementError,
    lindblad_channel,
    propagator_checkpoints,
)
from .gates import GateSpec, path_evolution_operator
from .metrics import gate_fidelity_F1, superoperator_channel
from .paths import TWO_PI
from .report import GateReport

SAMPLES = 501  # time points for population / fidelity traces

# ladder operators of the three lowest levels
SX = np.array([[0, 1, 0], [1, 0, np.sqrt(2)], [0, np.sqrt(2), 0]], dtype=complex)
SY = np.array([[0, -1j, 0], [1j, 0, -1j * np.sqrt(2)], [0, 1j * np.sqrt(2), 0]], dtype=complex)
SZ = np.diag([1.0, -1.0, -3.0]).astype(complex)
C_MINUS = np.array([[0, 1, 0], [0, 0, np.sqrt(2)], [0, 0, 0]], dtype=complex)
C_Z = np.diag([0.0, 1.0, 2.0]).astype(complex)


def mhz(f: float) -> float:
    """Angular frequency of ``f`` MHz in rad/us."""
    return TWO_PI * f


@dataclass(frozen=True)
class TransmonParams:
    alpha: float = mhz(280.0)
    kappa1: float = mhz(2e-3)
    kappa2: float = mhz(2e-3)
    omega_max: float = mhz(51.0)

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.kappa1 < 0 or self.kappa2 < 0:
            raise ValueError("decoherence rates must be nonnegative")
        if not self.omega_max > 0:
            raise ValueError("omega_max must be positive")


Sampler = Callable[[np.ndarray], np.ndarray]


def _zero(t):
    return np.zeros(np.shape(t))


@dataclass(frozen=True)
class FieldVector:
    """Real field components (bx, by, bz) with optional time derivatives."""

    bx: Sampler
    by: Sampler
    bz: Sampler
    dbx: Sampler | None = None
    dby: Sampler | None = None

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return tuple(np.broadcast_to(f(t), t.shape).astype(float) for f in (self.bx, self.by, self.bz))

    @classmethod
    def zero(cls) -> "FieldVector":
        return cls(_zero, _zero, _zero, _zero, _zero)


def b0_from_controls(c: ControlField) -> FieldVector:
    """Field vector of the qubit drive: bx = Re Omega, by = -Im Omega, bz = -Delta."""
    return FieldVector(
        bx=lambda t: np.real(c.omega(t)),
        by=lambda t: -np.imag(c.omega(t)),
        bz=lambda t: -np.asarray(c.delta(t), dtype=float),
        dbx=lambda t: np.real(c.derivatives(t)[1]),
        dby=lambda t: -np.imag(c.derivatives(t)[1]),
    )


# Overall sign of the correction.  With the S operators below, -1 reproduces
# the corrected pulse Omega' - (i dOmega'/dt + Omega' dphi/dt + Delta Omega') / (2 alpha);
# +1 is the field-vector formula taken literally, which increases leakage.
DRAG_SIGN = -1.0


def drag_correction(b0: FieldVector, alpha: float, sign: float = DRAG_SIGN) -> FieldVector:
    """First-order DRAG field (bdz = 0).

    bdx = s (dby/dt - bz bx) / (2 alpha), bdy = -s (dbx/dt + bz by) / (2 alpha).
    """
    k = sign / (2.0 * alpha)

    def bdx(t):
        bx, _, bz = b0(t)
        return k * (np.asarray(b0.dby(t)) - bz * bx)

    def bdy(t):
        _, by, bz = b0(t)
        return -k * (np.asarray(b0.dbx(t)) + bz * by)

    return FieldVector(bdx, bdy, _zero)


def build_three_level_hamiltonian(b0: FieldVector, bd: FieldVector, alpha: float, t) -> np.ndarray:
    """1/2 (B0 + Bd) . S - alpha |2><2|, shape ``t.shape + (3, 3)``."""
    x0, y0, z0 = b0(t)
    x1, y1, z1 = bd(t)
    bx, by, bz = (x0 + x1)[..., None, None], (y0 + y1)[..., None, None], (z0 + z1)[..., None, None]
    h = 0.5 * (bx * SX + by * SY + bz * SZ)
    h[..., 2, 2] -= alpha
    return h


def gate_controls(gate: str, omega_max: float, scheme: str = "NPGQC") -> ControlField:
    """Controls for ``gate`` with peak |Omega| equal to ``omega_max``."""
    scheme = scheme.upper()
    if scheme == "DG":
        return dg_gate_controls(gate, omega_max)
    if scheme != "NPGQC":
        raise ValueError(f"unknown scheme {scheme!r}")
    unit = GateSpec.named(gate).path(tau=1.0)
    peak = synthesize_controls(unit).peak_drive()
    return synthesize_controls(unit.with_tau(peak / omega_max))


def transmon_model(c: ControlField, tp: TransmonParams, drag: bool = True) -> LindbladModel:
    b0 = b0_from_controls(c)
    bd = drag_correction(b0, tp.alpha) if drag else FieldVector.zero()
    return LindbladModel(
        3,
        lambda t: build_three_level_hamiltonian(b0, bd, tp.alpha, t),
        ((C_MINUS, tp.kappa1), (C_Z, tp.kappa2)),
    )


def _initial_state(gate: str) -> np.ndarray:
    if gate == "H":
        return np.array([1, 0], dtype=complex)
    return np.array([1, 1], dtype=complex) / np.sqrt(2)


def _steps_for(steps: int, intervals: int) -> int:
    return -(-steps // intervals) * intervals


def simulate_single_qubit(
    gate,
    tp: TransmonParams,
    steps: int = DEFAULT_STEPS,
    drag: bool = True,
    scheme: str = "NPGQC",
    samples: int = SAMPLES,
    points: int = 1001,
) -> GateReport:
    """Lindblad simulation of ``gate`` (name or :class:`GateSpec`) on the transmon.

    Scalars: ``F1``, ``Fs`` (state fidelity of the reference input: |0> for H,
    |+> otherwise), ``tau``, ``peak_P2``.  Series on ``samples`` uniform
    times: populations P0..P2, state fidelity Fs and the running F1, both
    against the ideal evolution up to that time.
    """
    spec = gate if isinstance(gate, GateSpec) else GateSpec.named(gate)
    c = gate_controls(spec.name, tp.omega_max, scheme)
    model = transmon_model(c, tp, drag)
    intervals = samples - 1
    n = _steps_for(steps, intervals)
    sups = propagator_checkpoints(model.generator(), c.tau, n, intervals)
    drift = np.abs(sups[-1][[0, 4, 8], :].sum(axis=0) - np.eye(3).reshape(-1)).max()
    if drift > 1e-6:
        raise StepRefinementError(f"trace drift {drift:.3g}; increase steps")
    times = np.linspace(0.0, c.tau, samples)

    # ideal reference along the way: the geometric path, or the target at the end for DG
    if scheme.upper() == "NPGQC":
        path = spec.path(tau=c.tau)
        ideal = np.array([path_evolution_operator(path, t) for t in times])
    else:
        ideal = np.array([np.eye(2)] * (samples - 1) + [spec.target])

    psi0 = np.zeros(3, dtype=complex)
    psi0[:2] = _initial_state(spec.name)
    rho0 = np.outer(psi0, psi0.conj()).reshape(-1)
    rhos = (sups @ rho0).reshape(samples, 3, 3)
    pops = np.real(np.diagonal(rhos, axis1=1, axis2=2))
    targets = np.zeros((samples, 3), dtype=complex)
    targets[:, :2] = ideal @ psi0[:2]
    fs = np.real(np.einsum("ni,nij,nj->n", targets.conj(), rhos, targets))
    f1_trace = np.array(
        [gate_fidelity_F1(u, superoperator_channel(s), points) for u, s in zip(ideal, sups)]
    )
    f1 = gate_fidelity_F1(spec.target, superoperator_channel(sups[-1]), points)
    return GateReport(
        scalars={
            "F1": float(f1),
            "Fs": float(fs[-1]),
            "tau": float(c.tau),
            "peak_P2": float(pops[:, 2].max()),
        },
        series={"t": times, "P0": pops[:, 0], "P1": pops[:, 1], "P2": pops[:, 2], "Fs": fs, "F1": f1_trace},
        params={"gate": spec.name, "scheme": scheme.upper(), "drag": drag, **tp.__dict__, "steps": n},
    )


def _sweep_point(args):
    gate, tp, steps, points = args
    c = gate_controls(gate, tp.omega_max)
    sup = lindblad_channel(transmon_model(c, tp), c.tau, steps)
    return gate_fidelity_F1(GateSpec.named(gate).target, superoperator_channel(sup), points)


def omega_max_sweep(gate: str, tp: TransmonParams, omegas, steps: int = DEFAULT_STEPS, points: int = 1001, jobs: int = 1):
    """Final F1 for each peak amplitude in ``omegas`` (rad/us)."""
    tasks = [(gate, replace(tp, omega_max=float(om)), steps, points) for om in omegas]
    if jobs <= 1:
        return np.array([_sweep_point(t) for t in tasks])
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return np.array(list(pool.map(_sweep_point, tasks)))
