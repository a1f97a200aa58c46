"""Fixed-step RK4 propagation of Schroedinger and Lindblad equations.

Every equation here is linear, y' = A(t) y.  One RK4 step is therefore a
matrix M_n that depends only on A at t_n, t_n + h/2 and t_n + h, so a whole
propagator is the ordered product of the M_n.  For small generators the step
matrices are built in vectorised chunks and multiplied pairwise; for large
generators acting on a few columns the classic stage-by-stage update is
cheaper.  Both routes are the same RK4 scheme.

Generators are callables mapping a 1-D array of times to an array of shape
``batch + (len(t), D, D)``; ``batch`` may be empty.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

Generator = Callable[[np.ndarray], np.ndarray]

DEFAULT_STEPS = 20_000
_CHUNK_ELEMENTS = 4_000_000


class StepRefinementError(RuntimeError):
    """Trace drift shows the step count is too small for the dynamics."""


def _chunk_len(shape_tail: int, batch: int = 1) -> int:
    return max(16, _CHUNK_ELEMENTS // max(1, shape_tail * batch))


def _samples(gen: Generator, t0: float, h: float, n: int):
    """Generator on the half-step grid t0, t0 + h/2, ..., t0 + n h."""
    a = np.asarray(gen(t0 + 0.5 * h * np.arange(2 * n + 1)))
    return a[..., 0:-1:2, :, :], a[..., 1::2, :, :], a[..., 2::2, :, :]


def rk4_step_matrices(gen: Generator, t0: float, h: float, n: int) -> np.ndarray:
    """Matrices M_k with y_{k+1} = M_k y_k for ``n`` RK4 steps starting at t0."""
    a0, ah, a1 = _samples(gen, t0, h, n)
    k2 = ah + 0.5 * h * (ah @ a0)
    k3 = ah + 0.5 * h * (ah @ k2)
    k4 = a1 + h * (a1 @ k3)
    m = (h / 6.0) * (a0 + 2.0 * k2 + 2.0 * k3 + k4)
    dim = m.shape[-1]
    m[..., np.arange(dim), np.arange(dim)] += 1.0
    return m


def ordered_product(m: np.ndarray) -> np.ndarray:
    """M_{n-1} ... M_1 M_0 along axis -3, by pairwise reduction."""
    while m.shape[-3] > 1:
        if m.shape[-3] % 2:
            last = m[..., -1:, :, :]
            rest = m[..., :-1, :, :]
            paired = rest[..., 1::2, :, :] @ rest[..., 0::2, :, :]
            m = np.concatenate([paired, last], axis=-3)
        else:
            m = m[..., 1::2, :, :] @ m[..., 0::2, :, :]
    return m[..., 0, :, :]


def propagator_from_generator(gen: Generator, tau: float, steps: int, t0: float = 0.0) -> np.ndarray:
    """Full RK4 propagator of y' = A(t) y over [t0, t0 + tau]."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    h = tau / steps
    probe = np.asarray(gen(np.array([t0])))
    dim = probe.shape[-1]
    batch = int(np.prod(probe.shape[:-3], dtype=int))
    chunk = _chunk_len(dim * dim, batch)
    u = None
    done = 0
    while done < steps:
        n = min(chunk, steps - done)
        p = ordered_product(rk4_step_matrices(gen, t0 + done * h, h, n))
        u = p if u is None else p @ u
        done += n
    return u


def evolve(
    gen: Generator,
    y0: np.ndarray,
    tau: float,
    steps: int,
    t0: float = 0.0,
    record_every: int | None = None,
):
    """Stage-by-stage RK4 for y' = A(t) y with y of shape (D, K).

    Returns ``(y_final, records)`` where ``records`` holds y at steps
    0, record_every, 2 record_every, ... (and the final step) when requested.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    h = tau / steps
    y = np.array(y0, dtype=complex)
    dim = y.shape[0]
    chunk = _chunk_len(dim * dim)
    records = [y.copy()] if record_every else None
    done = 0
    while done < steps:
        n = min(chunk, steps - done)
        a0, ah, a1 = _samples(gen, t0 + done * h, h, n)
        for k in range(n):
            ahk = ah[k]
            k1 = a0[k] @ y
            k2 = ahk @ (y + 0.5 * h * k1)
            k3 = ahk @ (y + 0.5 * h * k2)
            k4 = a1[k] @ (y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            step = done + k + 1
            if record_every and (step % record_every == 0 or step == steps):
                records.append(y.copy())
        done += n
    return y, (np.array(records) if record_every else None)


# --- Schroedinger ---------------------------------------------------------


def schroedinger_generator(hamiltonian: Generator) -> Generator:
    return lambda t: -1j * np.asarray(hamiltonian(t))


def propagator(hamiltonian: Generator, tau: float, steps: int = DEFAULT_STEPS, t0: float = 0.0):
    """Time-ordered exponential of -i H(t) over [t0, t0 + tau]."""
    return propagator_from_generator(schroedinger_generator(hamiltonian), tau, steps, t0)


def propagate_state(hamiltonian: Generator, psi0, tau: float, steps: int = DEFAULT_STEPS, t0: float = 0.0):
    psi0 = np.asarray(psi0, dtype=complex)
    norm = np.linalg.norm(psi0)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"initial state not normalised (norm={norm})")
    u = propagator(hamiltonian, tau, steps, t0)
    return u @ psi0


# --- Lindblad -------------------------------------------------------------


def chi(c, rho):
    """Dissipator 2 c rho c^+ - c^+ c rho - rho c^+ c."""
    cd = np.conj(np.swapaxes(c, -1, -2))
    return 2 * c @ rho @ cd - cd @ c @ rho - rho @ cd @ c


def _left(a):
    """Superoperator of rho -> a rho for row-major vec."""
    d = a.shape[-1]
    return np.einsum("...ij,kl->...ikjl", a, np.eye(d)).reshape(a.shape[:-2] + (d * d, d * d))


def _right(a):
    """Superoperator of rho -> rho a for row-major vec."""
    d = a.shape[-1]
    return np.einsum("ij,...kl->...iljk", np.eye(d), a).reshape(a.shape[:-2] + (d * d, d * d))


def dissipator_superoperator(collapses) -> np.ndarray | None:
    total = None
    for op, rate in collapses:
        op = np.asarray(op, dtype=complex)
        cd = op.conj().T
        cdc = cd @ op
        d = op.shape[0]
        sandwich = np.einsum("ij,kl->ikjl", op, op.conj()).reshape(d * d, d * d)
        term = rate * (2 * sandwich - _left(cdc) - _right(cdc))
        total = term if total is None else total + term
    return total


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian sampler plus (collapse operator, rate) pairs."""

    dim: int
    hamiltonian: Generator
    collapses: Sequence[tuple] = field(default_factory=tuple)

    def __post_init__(self):
        for op, rate in self.collapses:
            if rate < 0:
                raise ValueError("collapse rates must be nonnegative")
            if np.shape(op) != (self.dim, self.dim):
                raise ValueError("collapse operator dimension mismatch")

    def generator(self) -> Generator:
        diss = dissipator_superoperator(self.collapses)

        def gen(t):
            h = np.asarray(self.hamiltonian(t))
            out = -1j * (_left(h) - _right(h))
            if diss is not None:
                out = out + diss
            return out

        return gen


def check_density_matrix(rho, herm_tol=1e-12, trace_tol=1e-10, eig_tol=-1e-9) -> None:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if np.abs(rho - rho.conj().T).max() > herm_tol:
        raise ValueError("density matrix not Hermitian")
    if abs(np.trace(rho) - 1) > trace_tol:
        raise ValueError("density matrix trace differs from 1")
    if np.linalg.eigvalsh(rho).min() < eig_tol:
        raise ValueError("density matrix not positive")


def _check_trace(rhos, expected, tol=1e-6):
    drift = np.abs(np.trace(rhos, axis1=-2, axis2=-1) - expected).max()
    if drift > tol:
        raise StepRefinementError(f"trace drift {drift:.3g} exceeds {tol}; increase steps")


def propagate_lindblad(
    m: LindbladModel,
    rho0,
    tau: float,
    steps: int = DEFAULT_STEPS,
    record_every: int | None = None,
):
    """Evolve ``rho0`` under the master equation; optionally return snapshots."""
    rho0 = np.asarray(rho0, dtype=complex)
    check_density_matrix(rho0, herm_tol=1e-10, trace_tol=1e-8)
    d = m.dim
    y, rec = evolve(m.generator(), rho0.reshape(d * d, 1), tau, steps, record_every=record_every)
    rho = y.reshape(d, d)
    _check_trace(rho, 1.0)
    rho = 0.5 * (rho + rho.conj().T)
    if record_every:
        return rho, rec.reshape(-1, d, d)
    return rho


def lindblad_channel(m: LindbladModel, tau: float, steps: int = DEFAULT_STEPS, inputs=None):
    """Linear map of the master equation over [0, tau].

    With ``inputs=None`` returns the full (d^2, d^2) superoperator.  Otherwise
    ``inputs`` lists level indices spanning the input subspace and the result
    has shape (d^2, k^2): column (a, b) is the image of |a><b|.
    """
    d = m.dim
    gen = m.generator()
    diag = np.arange(d) * (d + 1)
    if inputs is None:
        out = propagator_from_generator(gen, tau, steps)
        expected = np.eye(d).reshape(-1)
    else:
        idx = list(inputs)
        cols = np.array([a * d + b for a in idx for b in idx])
        y0 = np.zeros((d * d, len(cols)), dtype=complex)
        y0[cols, np.arange(len(cols))] = 1.0
        out, _ = evolve(gen, y0, tau, steps)
        expected = np.eye(len(idx)).reshape(-1)
    drift = np.abs(out[diag].sum(axis=0) - expected).max()
    if drift > 1e-6:
        raise StepRefinementError(f"trace drift {drift:.3g} exceeds 1e-06; increase steps")
    return out


def apply_channel(channel: np.ndarray, rhos: np.ndarray, inputs=None) -> np.ndarray:
    """Apply a map from :func:`lindblad_channel` to a batch of input matrices."""
    rhos = np.asarray(rhos)
    k = rhos.shape[-1]
    if inputs is None:
        d = k
    else:
        d = int(round(np.sqrt(channel.shape[0])))
    out = rhos.reshape(rhos.shape[:-2] + (k * k,)) @ channel.T
    return out.reshape(rhos.shape[:-2] + (d, d))


def propagator_checkpoints(gen: Generator, tau: float, steps: int, intervals: int) -> np.ndarray:
    """Cumulative RK4 propagators at ``intervals + 1`` uniform times on [0, tau].

    ``steps`` must be a multiple of ``intervals``.
    """
    if steps % intervals:
        raise ValueError("steps must be a multiple of intervals")
    per = steps // intervals
    h = tau / steps
    dim = np.asarray(gen(np.array([0.0]))).shape[-1]
    block = max(1, _CHUNK_ELEMENTS // (per * dim * dim))
    out = [np.eye(dim, dtype=complex)]
    done = 0
    while done < intervals:
        k = min(block, intervals - done)
        m = rk4_step_matrices(gen, done * per * h, h, k * per)
        for p in ordered_product(m.reshape((k, per) + m.shape[-2:])):
            out.append(p @ out[-1])
        done += k
    return np.array(out)
