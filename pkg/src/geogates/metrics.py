"""State and gate fidelities, and the decoherence / systematic-error sweeps."""
from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .controls import ControlField, dg_gate_controls, synthesize_controls
from .dynamics import (
    DEFAULT_STEPS,
    StepRefinementError,
    _left,
    _right,
    dissipator_superoperator,
    propagator_from_generator,
)
from .gates import TARGETS, GateSpec

SCHEMES = ("NPGQC", "DG")
KAPPA_UNIT = 1e-4  # decoherence rates are quoted in units of omega_bar / 1e4

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


def state_fidelity(psi_ideal, rho) -> float:
    """<psi|rho|psi>."""
    psi = np.asarray(psi_ideal)
    rho = np.asarray(rho)
    if rho.shape != (psi.size, psi.size):
        raise ValueError(f"dimension mismatch: state {psi.size}, rho {rho.shape}")
    return float(np.real(np.vdot(psi, rho @ psi)))


def _fidelities(ideal: np.ndarray, rhos: np.ndarray) -> np.ndarray:
    """Batched <psi|rho|psi>; ``ideal`` (..., N, d), ``rhos`` (..., N, d, d)."""
    return np.real(np.einsum("...i,...ij,...j->...", ideal.conj(), rhos, ideal))


def theta_grid(points: int = 1001) -> np.ndarray:
    """Equally spaced angles on [0, 2 pi).

    The integrand is periodic, so leaving out the duplicate endpoint turns the
    plain mean into a periodic trapezoid rule with spectral convergence.
    """
    return np.linspace(0.0, 2 * np.pi, points, endpoint=False)


def qubit_states(thetas) -> np.ndarray:
    thetas = np.asarray(thetas)
    return np.stack([np.cos(thetas), np.sin(thetas)], axis=-1).astype(complex)


def embed(kets: np.ndarray, dim: int) -> np.ndarray:
    """Pad qubit kets with zeros up to ``dim`` levels."""
    out = np.zeros(kets.shape[:-1] + (dim,), dtype=complex)
    out[..., : kets.shape[-1]] = kets
    return out


def superoperator_channel(sup: np.ndarray, dim: int | None = None):
    """Channel callable (kets of shape (N, k)) -> rho of shape (..., N, d, d).

    ``sup`` is a (d^2, d^2) superoperator (or a batch of them); input kets
    with k < d are embedded in the lowest levels.
    """
    d = int(round(np.sqrt(sup.shape[-1])))

    def channel(kets):
        kets = embed(np.asarray(kets), d)
        rho0 = np.einsum("ni,nj->nij", kets, kets.conj()).reshape(len(kets), d * d)
        return np.einsum("...ab,nb->...na", sup, rho0).reshape(sup.shape[:-2] + (len(kets), d, d))

    return channel


def unitary_channel(u: np.ndarray):
    def channel(kets):
        out = np.asarray(kets) @ np.asarray(u).T
        return np.einsum("ni,nj->nij", out, out.conj())

    return channel


def gate_fidelity_F1(gate, channel, points: int = 1001):
    """Average of <Psi_tau|rho|Psi_tau> over Psi(0) = cos T|0> + sin T|1>, T on [0, 2 pi].

    ``channel`` maps an (N, 2) array of initial kets to final density
    matrices; leading batch axes in its output are kept.
    """
    kets = qubit_states(theta_grid(points))
    rhos = np.asarray(channel(kets))
    ideal = embed(kets @ np.asarray(gate).T, rhos.shape[-1])
    return _fidelities(ideal, rhos).mean(axis=-1)


def two_qubit_thetas(mode: str = "tensor"):
    """(Theta1, Theta2) sample pairs for the two-qubit average.

    ``tensor``: 101 x 101 product lattice.  ``corners``: 101 x 99 lattice plus
    the corners (0, 0) and (2 pi, 2 pi), 10001 pairs in total.
    """
    if mode == "tensor":
        a = theta_grid(101)
        t1, t2 = np.meshgrid(a, a, indexing="ij")
        return t1.ravel(), t2.ravel()
    if mode == "corners":
        t1, t2 = np.meshgrid(theta_grid(101), theta_grid(99), indexing="ij")
        t1 = np.concatenate([t1.ravel(), [0.0, 2 * np.pi]])
        t2 = np.concatenate([t2.ravel(), [0.0, 2 * np.pi]])
        return t1, t2
    raise ValueError(f"unknown sampling mode {mode!r}")


def product_states(t1, t2) -> np.ndarray:
    a, b = qubit_states(t1), qubit_states(t2)
    return np.einsum("ni,nj->nij", a, b).reshape(len(a), 4)


def gate_fidelity_F2(gate, channel, mode: str = "tensor"):
    """Average two-qubit state fidelity over product initial states."""
    kets = product_states(*two_qubit_thetas(mode))
    rhos = np.asarray(channel(kets))
    ideal = kets @ np.asarray(gate).T
    if rhos.shape[-1] != 4:
        raise ValueError("two-qubit channel must return 4x4 computational-subspace states")
    return _fidelities(ideal, rhos).mean(axis=-1)


# --- single-qubit Lindblad channels ---------------------------------------


def scheme_controls(scheme: str, gate: str) -> ControlField:
    """Dimensionless control field for ``gate`` under ``scheme`` (NPGQC: tau = 1; DG: peak = 1)."""
    scheme = scheme.upper()
    if scheme == "NPGQC":
        return synthesize_controls(GateSpec.named(gate).path())
    if scheme == "DG":
        return dg_gate_controls(gate, 1.0)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def qubit_superoperators(c: ControlField, kappa1, kappa2, delta_frac=0.0, eps_frac=0.0, steps: int = DEFAULT_STEPS):
    """RK4 superoperators of the two-level master equation, batched over the
    broadcast shape of the rate and error arguments."""
    k1, k2, dfr, efr = np.broadcast_arrays(
        np.atleast_1d(np.asarray(kappa1, float)),
        np.atleast_1d(np.asarray(kappa2, float)),
        np.atleast_1d(np.asarray(delta_frac, float)),
        np.atleast_1d(np.asarray(eps_frac, float)),
    )
    shape = k1.shape
    k1, k2, dfr, efr = (x.ravel() for x in (k1, k2, dfr, efr))
    diss_minus = dissipator_superoperator([(SIGMA_MINUS, 1.0)])
    diss_z = dissipator_superoperator([(SIGMA_Z, 1.0)])
    diss = k1[:, None, None, None] * diss_minus + k2[:, None, None, None] * diss_z
    shift = (dfr * c.omega_bar)[:, None]
    scale = (1.0 + efr)[:, None]

    def gen(t):
        d, o = c.sample(t)
        dd = d[None, :] + shift
        oo = o[None, :] * scale
        h = np.empty(dd.shape + (2, 2), dtype=complex)
        h[..., 0, 0] = -0.5 * dd
        h[..., 1, 1] = 0.5 * dd
        h[..., 0, 1] = 0.5 * oo
        h[..., 1, 0] = 0.5 * oo.conj()
        return -1j * (_left(h) - _right(h)) + diss

    sup = propagator_from_generator(gen, c.tau, steps)
    drift = np.abs(sup[:, [0, 3], :].sum(axis=1) - np.array([1, 0, 0, 1])).max()
    if drift > 1e-6:
        raise StepRefinementError(f"trace drift {drift:.3g}; increase steps")
    return sup.reshape(shape + (4, 4))


def scheme_F1(scheme: str, gate: str, kappa, delta_frac=0.0, eps_frac=0.0, steps: int = DEFAULT_STEPS, points: int = 1001):
    """F1 of ``gate`` under ``scheme`` with kappa1 = kappa2 = kappa (units of omega_bar / 1e4)."""
    c = scheme_controls(scheme, gate)
    rate = np.asarray(kappa, float) * KAPPA_UNIT * c.omega_bar
    sup = qubit_superoperators(c, rate, rate, delta_frac, eps_frac, steps)
    return gate_fidelity_F1(TARGETS[gate.upper()], superoperator_channel(sup), points)


def _job(args):
    return scheme_F1(*args)


def _run_jobs(tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [_job(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_job, tasks))


@dataclass
class SweepGrid:
    """Fidelity over one or two named axes."""

    axes: list  # [(name, values)]
    results: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = tuple(len(v) for _, v in self.axes)
        if any(n < 2 for n in shape):
            raise ValueError("every sweep axis needs at least two points")
        if self.results.shape != shape:
            raise ValueError(f"results shape {self.results.shape} != axes {shape}")

    def area_fraction(self, threshold: float = 0.999) -> float:
        return float(np.mean(self.results >= threshold))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if len(self.axes) == 1:
                name, vals = self.axes[0]
                w.writerow([name, "F1"])
                for v, f in zip(vals, self.results):
                    w.writerow([f"{v:.17g}", f"{f:.17g}"])
            else:
                (rname, rvals), (cname, cvals) = self.axes
                w.writerow([f"{rname}\\{cname}"] + [f"{v:.17g}" for v in cvals])
                for v, row in zip(rvals, self.results):
                    w.writerow([f"{v:.17g}"] + [f"{f:.17g}" for f in row])


def sweep_decoherence(scheme: str, gate: str, kappa_grid, steps: int = DEFAULT_STEPS, jobs: int = 1) -> SweepGrid:
    """F1 versus kappa1 = kappa2 = kappa, kappa in units of omega_bar / 1e4."""
    kappas = np.asarray(kappa_grid, float)
    parts = np.array_split(kappas, max(1, min(jobs, len(kappas))))
    tasks = [(scheme, gate, part, 0.0, 0.0, steps) for part in parts]
    f = np.concatenate([np.atleast_1d(r) for r in _run_jobs(tasks, jobs)])
    return SweepGrid([("kappa", kappas)], f, {"scheme": scheme, "gate": gate})


def sweep_systematic(
    scheme: str,
    gate: str,
    delta_grid,
    eps_grid,
    kappa: float = 2.0,
    steps: int = DEFAULT_STEPS,
    jobs: int = 1,
) -> SweepGrid:
    """F1 over the (delta, eps) error grid at fixed kappa (units of omega_bar / 1e4)."""
    deltas = np.asarray(delta_grid, float)
    epss = np.asarray(eps_grid, float)
    tasks = [(scheme, gate, kappa, d, epss, steps) for d in deltas]
    rows = _run_jobs(tasks, jobs)
    return SweepGrid(
        [("delta", deltas), ("eps", epss)],
        np.array(rows),
        {"scheme": scheme, "gate": gate, "kappa": kappa},
    )
