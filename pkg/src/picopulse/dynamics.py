"""Numerical propagation over piecewise-constant control schedules.

The normative propagator exponentiates each constant segment exactly through
the eigendecomposition of its Hamiltonian, which is exact for
piecewise-constant controls.  A classic 4th-order explicit stepper is kept as
an independent cross-check (deliberately without renormalization), and a
cosine-driven lab-frame integrator covers the one genuinely time-dependent
case.  Open-system evolution integrates the master equation

    drho/dt = i[rho, H(t)] + gamma (s- rho s+ - 1/2 {s+ s-, rho})
              + gamma_phi (sz rho sz - rho)

with s+ = |1><0|, so the relaxation channel drives |1> -> |0>.  Temperature
effects are neglected and the dissipators act at all times, including during
pulses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import (
    ID2,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SZ,
    check_density_matrix,
    check_state,
    make_single_qubit_hamiltonian,
    make_two_qubit_hamiltonian,
)


@dataclass(frozen=True)
class Segment:
    """One piecewise-constant control segment (all angular frequencies, rad/ns)."""

    duration: float
    e1: float = 0.0
    e2: float = 0.0
    j: float = 0.0

    def __post_init__(self):
        if not (self.duration > 0 and math.isfinite(self.duration)):
            raise ValueError(f"segment duration must be > 0, got {self.duration}")
        if not all(math.isfinite(v) for v in (self.e1, self.e2, self.j)):
            raise ValueError("segment controls must be finite")


@dataclass(frozen=True)
class Schedule:
    """Ordered control segments for a qubit (dimension 2) or register (dimension 4)."""

    delta1: float
    segments: tuple[Segment, ...]
    delta2: float = 0.0
    dimension: int = 2

    def __post_init__(self):
        if self.dimension not in (2, 4):
            raise ValueError(f"dimension must be 2 or 4, got {self.dimension}")
        object.__setattr__(self, "segments", tuple(self.segments))
        if self.dimension == 2:
            for seg in self.segments:
                if seg.e2 != 0.0 or seg.j != 0.0:
                    raise ValueError("dimension-2 schedules may only use the e1 control")

    @property
    def total_duration(self) -> float:
        return sum(seg.duration for seg in self.segments)

    def hamiltonian(self, seg: Segment) -> np.ndarray:
        if self.dimension == 2:
            return make_single_qubit_hamiltonian(self.delta1, seg.e1)
        return make_two_qubit_hamiltonian(self.delta1, self.delta2,
                                          seg.e1, seg.e2, seg.j)

    def boundaries(self) -> np.ndarray:
        """Cumulative segment end times, starting at 0."""
        return np.concatenate([[0.0], np.cumsum([s.duration for s in self.segments])])


@dataclass(frozen=True)
class Trajectory:
    """Sampled evolution: times (monotone) and one state (or density matrix) per time."""

    times: np.ndarray
    states: np.ndarray
    kind: str = "state"  # "state" or "density"

    def __post_init__(self):
        if np.any(np.diff(self.times) < 0):
            raise ValueError("sample times must be monotone")
        if len(self.times) != len(self.states):
            raise ValueError("times and states must have equal length")

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def populations(self) -> np.ndarray:
        if self.kind == "state":
            return np.abs(self.states) ** 2
        return np.einsum("tii->ti", self.states).real


@dataclass(frozen=True)
class LindbladParams:
    """Energy relaxation rate gamma and pure dephasing rate gamma_phi (1/ns)."""

    gamma: float = 0.0
    gamma_phi: float = 0.0

    def __post_init__(self):
        if self.gamma < 0 or self.gamma_phi < 0:
            raise ValueError("relaxation rates must be >= 0")


def _segment_propagator(h: np.ndarray, dt: float) -> np.ndarray:
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * vals * dt)) @ vecs.conj().T


def evolve_unitary(schedule: Schedule) -> np.ndarray:
    """Ordered product of exact per-segment propagators exp(-i H_seg dt_seg)."""
    u = np.eye(schedule.dimension, dtype=complex)
    for seg in schedule.segments:
        u = _segment_propagator(schedule.hamiltonian(seg), seg.duration) @ u
    return u


def _sample_grid(schedule: Schedule, sample_dt: float) -> np.ndarray:
    if sample_dt <= 0:
        raise ValueError(f"sample_dt must be > 0, got {sample_dt}")
    total = schedule.total_duration
    uniform = np.arange(0.0, total, sample_dt)
    times = np.union1d(np.append(uniform, total), schedule.boundaries())
    return times


def evolve_state(schedule: Schedule, psi0, sample_dt: float) -> Trajectory:
    """Propagate a pure state, sampling a uniform grid plus all segment boundaries."""
    psi = check_state(psi0)
    if psi.shape[0] != schedule.dimension:
        raise ValueError("initial state dimension does not match the schedule")
    times = _sample_grid(schedule, sample_dt)
    states = np.empty((len(times), schedule.dimension), dtype=complex)
    bounds = schedule.boundaries()
    idx = 0
    for k, seg in enumerate(schedule.segments):
        t0, t1 = bounds[k], bounds[k + 1]
        vals, vecs = np.linalg.eigh(schedule.hamiltonian(seg))
        coef = vecs.conj().T @ psi
        while idx < len(times) and times[idx] <= t1 + 1e-15:
            dt = times[idx] - t0
            states[idx] = vecs @ (np.exp(-1j * vals * dt) * coef)
            idx += 1
        psi = vecs @ (np.exp(-1j * vals * (t1 - t0)) * coef)
    while idx < len(times):  # trailing duplicates of the final boundary
        states[idx] = psi
        idx += 1
    if not schedule.segments:
        states[:] = psi
    return Trajectory(times=times, states=states)


def _spectral_norm(h: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvalsh(h))))


def _rk4_step(h: np.ndarray, psi: np.ndarray, dt: float) -> np.ndarray:
    rhs = lambda p: -1j * (h @ p)
    k1 = rhs(psi)
    k2 = rhs(psi + 0.5 * dt * k1)
    k3 = rhs(psi + 0.5 * dt * k2)
    k4 = rhs(psi + dt * k3)
    return psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def evolve_state_stepper(schedule: Schedule, psi0, dt: float) -> Trajectory:
    """Independent 4th-order explicit integrator; no renormalization is applied.

    Exists purely to cross-check the exact-exponential path; the step size is
    rejected unless dt <= 0.01 / max ||H_seg||.
    """
    psi = check_state(psi0).copy()
    hmax = max((_spectral_norm(schedule.hamiltonian(s)) for s in schedule.segments),
               default=0.0)
    if hmax > 0 and dt > 0.01 / hmax:
        raise ValueError(f"dt = {dt:.3g} too large; need dt <= {0.01 / hmax:.3g}")
    times = [0.0]
    states = [psi.copy()]
    t = 0.0
    for seg in schedule.segments:
        h = schedule.hamiltonian(seg)
        nsteps = max(1, int(math.ceil(seg.duration / dt)))
        hstep = seg.duration / nsteps
        for _ in range(nsteps):
            psi = _rk4_step(h, psi, hstep)
            t += hstep
            times.append(t)
            states.append(psi.copy())
    return Trajectory(times=np.array(times), states=np.array(states))


def evolve_driven_cosine(amplitude: float, omega: float, delta: float, tau: float,
                         psi0, dt: float) -> Trajectory:
    """Full lab-frame trajectory under eps(t) = A cos(omega t), 0 <= t <= tau.

    No rotating-wave approximation is made; dt must resolve the carrier with
    at least 40 samples per period.
    """
    psi = check_state(psi0).copy()
    if psi.shape[0] != 2:
        raise ValueError("cosine drive is defined for a single qubit")
    if omega > 0 and dt > (2.0 * math.pi / omega) / 40.0:
        raise ValueError(f"dt = {dt:.3g} under-resolves the carrier; "
                         f"need dt <= {2.0 * math.pi / omega / 40.0:.3g}")
    nsteps = max(1, int(math.ceil(tau / dt)))
    h = tau / nsteps
    hz = -0.5 * delta * SZ
    times = np.linspace(0.0, tau, nsteps + 1)
    states = np.empty((nsteps + 1, 2), dtype=complex)
    states[0] = psi

    def ht(t):
        return hz - 0.5 * amplitude * math.cos(omega * t) * np.array(
            [[0.0, 1.0], [1.0, 0.0]], dtype=complex)

    for n in range(nsteps):
        t = times[n]
        k1 = -1j * (ht(t) @ psi)
        hmid = ht(t + 0.5 * h)
        k2 = -1j * (hmid @ (psi + 0.5 * h * k1))
        k3 = -1j * (hmid @ (psi + 0.5 * h * k2))
        k4 = -1j * (ht(t + h) @ (psi + h * k3))
        psi = psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[n + 1] = psi
    return Trajectory(times=times, states=states)


def lindblad_superoperator(h: np.ndarray, lp: LindbladParams) -> np.ndarray:
    """Row-major-vec superoperator of the master equation for constant H."""
    eye = ID2
    # i[rho, H] = i (rho H - H rho);  vec(A rho B) = (A kron B^T) vec(rho)
    lop = 1j * (np.kron(eye, h.T) - np.kron(h, eye))
    if lp.gamma:
        n_op = SIGMA_PLUS @ SIGMA_MINUS  # |1><1|
        lop += lp.gamma * (np.kron(SIGMA_MINUS, SIGMA_PLUS.T)
                           - 0.5 * (np.kron(n_op, eye) + np.kron(eye, n_op.T)))
    if lp.gamma_phi:
        lop += lp.gamma_phi * (np.kron(SZ, SZ.T) - np.eye(4))
    return lop


def evolve_lindblad(schedule: Schedule, rho0, lp: LindbladParams,
                    sample_dt: float) -> Trajectory:
    """Open-system evolution of a single-qubit density matrix over a schedule."""
    if schedule.dimension != 2:
        raise ValueError("open-system evolution is implemented for dimension 2 only")
    rho = check_density_matrix(rho0).copy()
    times = _sample_grid(schedule, sample_dt)
    states = np.empty((len(times), 2, 2), dtype=complex)
    bounds = schedule.boundaries()
    idx = 0
    for k, seg in enumerate(schedule.segments):
        t0, t1 = bounds[k], bounds[k + 1]
        lop = lindblad_superoperator(schedule.hamiltonian(seg), lp)
        vec0 = rho.reshape(4)
        while idx < len(times) and times[idx] <= t1 + 1e-15:
            dt = times[idx] - t0
            states[idx] = (scipy.linalg.expm(lop * dt) @ vec0).reshape(2, 2)
            idx += 1
        rho = (scipy.linalg.expm(lop * (t1 - t0)) @ vec0).reshape(2, 2)
    while idx < len(times):
        states[idx] = rho
        idx += 1
    if not schedule.segments:
        states[:] = rho
    return Trajectory(times=times, states=states, kind="density")
