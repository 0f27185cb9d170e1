"""Experiment-level scripts: parameter sweeps, delay scans, Bloch trajectories
and derivative-free pulse calibration.

Sweep axes are dimensionless by default (pulse areas and amplitudes in rad/ns
against times in ns); the CLI layer applies unit conversions.  Every sweep
cell is a deterministic function of the spec and equals an independent
propagation by :mod:`picopulse.dynamics`, which the test-suite spot checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from .core import bloch_vector, gate_fidelity, state_fidelity
from .dynamics import LindbladParams, Schedule, Segment, evolve_lindblad, evolve_state


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ValueError(f"axis {self.name!r} needs count >= 2, got {self.count}")
        if not self.start < self.stop:
            raise ValueError(f"axis {self.name!r} needs start < stop")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SweepSpec:
    axis1: Axis
    axis2: Axis
    fixed: dict = field(default_factory=dict)
    observable: int = 0


@dataclass(frozen=True)
class SweepGrid:
    """Row-major probability grid: values[i, j] for axis1 value i, axis2 value j."""

    axis1: Axis
    axis2: Axis
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != (self.axis1.count, self.axis2.count):
            raise ValueError("grid shape does not match axes")
        if np.any(self.values < -1e-12) or np.any(self.values > 1.0 + 1e-12):
            raise ValueError("grid values must lie in [0, 1]")


@dataclass(frozen=True)
class CalibrationResult:
    params: np.ndarray
    fidelity: float
    iterations: int
    converged: bool


# ---------------------------------------------------------------------------
# schedule builders

def single_pulse_schedule(amplitude: float, tau: float, delta: float,
                          tail: float = 0.0) -> Schedule:
    segs = [Segment(tau, e1=amplitude)]
    if tail > 0:
        segs.append(Segment(tail))
    return Schedule(delta1=delta, segments=tuple(segs))


def pulse_pair_schedule(amplitude: float, tau1: float, tau2: float, tau_r: float,
                        delta: float, tail: float = 0.0) -> Schedule:
    segs = [Segment(tau1, e1=amplitude)]
    if tau_r > 0:
        segs.append(Segment(tau_r))
    segs.append(Segment(tau2, e1=amplitude))
    if tail > 0:
        segs.append(Segment(tail))
    return Schedule(delta1=delta, segments=tuple(segs))


def coupler_pulse_schedule(delta: float, j: float, tau: float,
                           tail: float = 0.0) -> Schedule:
    segs = [Segment(tau, j=j)]
    if tail > 0:
        segs.append(Segment(tail))
    return Schedule(delta1=delta, delta2=delta, dimension=4, segments=tuple(segs))


def three_stage_schedule(tau1: float, tau2: float, j: float, a1: float, a2: float,
                         delta: float) -> Schedule:
    segs = [Segment(tau1, j=j), Segment(tau2, e1=a1, e2=a2), Segment(tau1, j=j)]
    return Schedule(delta1=delta, delta2=delta, dimension=4, segments=tuple(segs))


def register_pair_schedule(delta1: float, delta2: float, j: float,
                           a1: float, a2: float, tau1: float, tau2: float,
                           tau_r: float, tail: float = 0.0) -> Schedule:
    """Pulse on qubit 1, delay, pulse on qubit 2, with the coupling always on."""
    segs = [Segment(tau1, e1=a1, j=j)]
    if tau_r > 0:
        segs.append(Segment(tau_r, j=j))
    segs.append(Segment(tau2, e2=a2, j=j))
    if tail > 0:
        segs.append(Segment(tail, j=j))
    return Schedule(delta1=delta1, delta2=delta2, dimension=4, segments=tuple(segs))


# ---------------------------------------------------------------------------
# sweeps

def populations_at(schedule: Schedule, psi0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Populations |psi_k(t)|^2 at arbitrary times within the schedule.

    Times beyond the schedule end are clamped to the final state.
    """
    times = np.asarray(times, dtype=float)
    out = np.empty((len(times), schedule.dimension))
    psi = np.asarray(psi0, dtype=complex)
    bounds = schedule.boundaries()
    order = np.argsort(times, kind="stable")
    idx = 0
    for k, seg in enumerate(schedule.segments):
        t0, t1 = bounds[k], bounds[k + 1]
        vals, vecs = np.linalg.eigh(schedule.hamiltonian(seg))
        coef = vecs.conj().T @ psi
        while idx < len(times) and times[order[idx]] <= t1 + 1e-12:
            dt = max(times[order[idx]] - t0, 0.0)
            st = vecs @ (np.exp(-1j * vals * dt) * coef)
            out[order[idx]] = np.abs(st) ** 2
            idx += 1
        psi = vecs @ (np.exp(-1j * vals * (t1 - t0)) * coef)
    while idx < len(times):
        out[order[idx]] = np.abs(psi) ** 2
        idx += 1
    return out


def _ground(dimension: int) -> np.ndarray:
    psi = np.zeros(dimension, dtype=complex)
    psi[0] = 1.0
    return psi


def sweep_single_pulse(spec: SweepSpec) -> SweepGrid:
    """Population map under a single unipolar pulse: axis1 = amplitude, axis2 = time."""
    delta = spec.fixed["delta"]
    tau = spec.fixed["tau"]
    amps = spec.axis1.values()
    times = spec.axis2.values()
    tail = max(float(times[-1]) - tau, 0.0) + 1e-9
    grid = np.empty((len(amps), len(times)))
    for i, a in enumerate(amps):
        sched = single_pulse_schedule(a, tau, delta, tail=tail)
        grid[i] = populations_at(sched, _ground(2), times)[:, spec.observable]
    return SweepGrid(spec.axis1, spec.axis2, np.clip(grid, 0.0, 1.0),
                     meta={"delta": delta, "tau": tau, "observable": spec.observable})


def sweep_pulse_pair(spec: SweepSpec) -> SweepGrid:
    """Population map under a pulse pair: axis1 = amplitude, axis2 = time."""
    delta = spec.fixed["delta"]
    tau1 = spec.fixed["tau1"]
    tau2 = spec.fixed["tau2"]
    tau_r = spec.fixed["tau_r"]
    amps = spec.axis1.values()
    times = spec.axis2.values()
    tail = max(float(times[-1]) - (tau1 + tau_r + tau2), 0.0) + 1e-9
    grid = np.empty((len(amps), len(times)))
    for i, a in enumerate(amps):
        sched = pulse_pair_schedule(a, tau1, tau2, tau_r, delta, tail=tail)
        grid[i] = populations_at(sched, _ground(2), times)[:, spec.observable]
    return SweepGrid(spec.axis1, spec.axis2, np.clip(grid, 0.0, 1.0),
                     meta={"delta": delta, "tau1": tau1, "tau2": tau2,
                           "tau_r": tau_r, "observable": spec.observable})


def sweep_coupler_pulse(spec: SweepSpec) -> SweepGrid:
    """|dd> -> |uu> map for a coupler-only pulse: axis1 = coupling J, axis2 = time."""
    delta = spec.fixed["delta"]
    tau = spec.fixed["tau"]
    js = spec.axis1.values()
    times = spec.axis2.values()
    tail = max(float(times[-1]) - tau, 0.0) + 1e-9
    grid = np.empty((len(js), len(times)))
    for i, j in enumerate(js):
        sched = coupler_pulse_schedule(delta, j, tau, tail=tail)
        grid[i] = populations_at(sched, _ground(4), times)[:, 3]
    return SweepGrid(spec.axis1, spec.axis2, np.clip(grid, 0.0, 1.0),
                     meta={"delta": delta, "tau": tau})


def sweep_three_stage(spec: SweepSpec) -> SweepGrid:
    """|dd> -> |uu> map of the kick/drive/kick protocol: axis1 = drive amplitude, axis2 = tau2."""
    delta = spec.fixed["delta"]
    j = spec.fixed["j"]
    tau1 = spec.fixed["tau1"]
    amps = spec.axis1.values()
    tau2s = spec.axis2.values()
    grid = np.empty((len(amps), len(tau2s)))
    for i, a in enumerate(amps):
        for k, tau2 in enumerate(tau2s):
            sched = three_stage_schedule(tau1, tau2, j, a, a, delta)
            grid[i, k] = populations_at(sched, _ground(4),
                                        np.array([sched.total_duration]))[0, 3]
    return SweepGrid(spec.axis1, spec.axis2, np.clip(grid, 0.0, 1.0),
                     meta={"delta": delta, "j": j, "tau1": tau1})


def sweep_register_pair(spec: SweepSpec) -> tuple[SweepGrid, SweepGrid, SweepGrid, SweepGrid]:
    """Four population maps (one per basis state) for the constant-J pulse pair.

    axis1 = shared drive amplitude (A1 = A2), axis2 = time.
    """
    d1 = spec.fixed["delta1"]
    d2 = spec.fixed["delta2"]
    j = spec.fixed["j"]
    tau1 = spec.fixed["tau1"]
    tau2 = spec.fixed["tau2"]
    tau_r = spec.fixed["tau_r"]
    amps = spec.axis1.values()
    times = spec.axis2.values()
    tail = max(float(times[-1]) - (tau1 + tau_r + tau2), 0.0) + 1e-9
    grids = np.empty((4, len(amps), len(times)))
    for i, a in enumerate(amps):
        sched = register_pair_schedule(d1, d2, j, a, a, tau1, tau2, tau_r, tail=tail)
        pops = populations_at(sched, _ground(4), times)
        for b in range(4):
            grids[b, i] = pops[:, b]
    meta = {"delta1": d1, "delta2": d2, "j": j,
            "tau1": tau1, "tau2": tau2, "tau_r": tau_r}
    return tuple(
        SweepGrid(spec.axis1, spec.axis2, np.clip(grids[b], 0.0, 1.0),
                  meta={**meta, "basis_index": b})
        for b in range(4))


# ---------------------------------------------------------------------------
# scans and trajectories

def ramsey_delay_scan(amplitude: float, delta: float, tau: float,
                      tau_r_values) -> np.ndarray:
    """Columns (tau_r, W_numeric, W_analytic) for equal-duration pulse pairs."""
    rows = []
    for tau_r in np.asarray(tau_r_values, dtype=float):
        sched = pulse_pair_schedule(amplitude, tau, tau, tau_r, delta)
        psi = evolve_state(sched, _ground(2), sched.total_duration).final
        w_num = float(abs(psi[1]) ** 2)
        w_ana = analytic.ramsey_probability_unipolar(
            analytic.PulsePair(tau, tau, tau_r, amplitude), delta)
        rows.append((tau_r, w_num, w_ana))
    return np.array(rows)


def lindblad_ramsey_scan(amplitude: float, delta: float, tau: float,
                         tau_r_values, lp: LindbladParams,
                         sample_dt: float | None = None) -> np.ndarray:
    """Columns (tau_r, W) with the master equation active at all times."""
    rho0 = np.zeros((2, 2), dtype=complex)
    rho0[0, 0] = 1.0
    rows = []
    for tau_r in np.asarray(tau_r_values, dtype=float):
        sched = pulse_pair_schedule(amplitude, tau, tau, tau_r, delta)
        dt = sample_dt if sample_dt is not None else sched.total_duration
        traj = evolve_lindblad(sched, rho0, lp, dt)
        rows.append((tau_r, float(traj.final[1, 1].real)))
    return np.array(rows)


def bloch_trajectory(schedule: Schedule, psi0, sample_dt: float) -> np.ndarray:
    """Columns (t, x, y, z) of the Bloch vector along a dimension-2 schedule."""
    traj = evolve_state(schedule, psi0, sample_dt)
    rows = np.empty((len(traj.times), 4))
    rows[:, 0] = traj.times
    for i, psi in enumerate(traj.states):
        rows[i, 1:] = bloch_vector(psi / np.linalg.norm(psi))
    return rows


def fringe_contrast(values) -> float:
    """(max - min) / (max + min) over a scan window."""
    v = np.asarray(values, dtype=float)
    hi, lo = float(v.max()), float(v.min())
    if hi + lo == 0.0:
        return 0.0
    return (hi - lo) / (hi + lo)


def peak_positions(x, y) -> np.ndarray:
    """Quadratically interpolated local-maximum positions of a sampled curve."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    peaks = []
    for i in range(1, len(y) - 1):
        if y[i] >= y[i - 1] and y[i] > y[i + 1]:
            denom = y[i - 1] - 2.0 * y[i] + y[i + 1]
            shift = 0.0 if denom == 0 else 0.5 * (y[i - 1] - y[i + 1]) / denom
            peaks.append(x[i] + shift * (x[i + 1] - x[i]))
    return np.array(peaks)


# ---------------------------------------------------------------------------
# calibration

def _golden_section(f, lo: float, hi: float, rel_tol: float = 1e-7,
                    max_iter: int = 80):
    """Deterministic golden-section minimization on [lo, hi]; returns (x, f(x), evals)."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    evals = 2
    span0 = b - a
    for _ in range(max_iter):
        if b - a <= rel_tol * span0:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        evals += 1
    if fc < fd:
        return c, fc, evals
    return d, fd, evals


class _BudgetExhausted(Exception):
    """Internal flow control: the objective-evaluation budget ran out."""


def calibrate_pulse(target, template, bounds, seed, tol: float = 1e-4,
                    max_sweeps: int = 12, coarse_points: int = 25,
                    budget: int = 4000) -> CalibrationResult:
    """Derivative-free calibration of a parameterized schedule.

    ``target`` is ``("state", vector)`` or ``("unitary", matrix)``;
    ``template`` maps a parameter vector to a Schedule; ``bounds`` is a list of
    (lo, hi) pairs and ``seed`` the analytic starting point.  Each coordinate
    is refined by a coarse scan plus golden-section search.  The reported
    fidelity comes from a fresh propagation with the parameters rounded to
    output precision, not from the optimizer's internal value.
    """
    kind, goal = target
    if kind not in ("state", "unitary"):
        raise ValueError(f"unknown target kind {kind!r}")
    goal = np.asarray(goal, dtype=complex)
    params = np.array(seed, dtype=float)
    if len(params) != len(bounds):
        raise ValueError("seed and bounds lengths differ")
    if len(params) > 6:
        raise ValueError("template may have at most 6 free parameters")
    evals = 0

    def fidelity_of(p) -> float:
        from .dynamics import evolve_unitary
        u = evolve_unitary(template(np.asarray(p, dtype=float)))
        if kind == "unitary":
            return gate_fidelity(goal, u)
        psi0 = _ground(u.shape[0])
        psi = u @ psi0
        return state_fidelity(goal, psi / np.linalg.norm(psi))

    def objective(p) -> float:
        nonlocal evals
        if evals >= budget:
            raise _BudgetExhausted
        evals += 1
        return 1.0 - fidelity_of(p)

    try:
        best = objective(params)
    except _BudgetExhausted:
        best = 1.0 - fidelity_of(params)
    try:
        for _ in range(max_sweeps):
            improved = best
            for i, (lo, hi) in enumerate(bounds):
                # coarse scan keeps the oscillatory objective from trapping
                # the golden-section refinement in a secondary minimum
                xs = np.linspace(lo, hi, coarse_points)
                fs = []
                for x in xs:
                    p = params.copy()
                    p[i] = x
                    fs.append(objective(p))
                k = int(np.argmin(fs))
                blo = xs[max(k - 1, 0)]
                bhi = xs[min(k + 1, len(xs) - 1)]

                def line(x, i=i):
                    p = params.copy()
                    p[i] = x
                    return objective(p)

                x, fx, _ = _golden_section(line, blo, bhi)
                if fx < best:
                    best = fx
                    params[i] = x
            if best <= tol * 0.1 or improved - best < tol * 1e-3:
                break
    except _BudgetExhausted:
        pass

    rounded = np.array([float(f"{p:.12g}") for p in params])
    achieved = fidelity_of(rounded)
    return CalibrationResult(params=rounded, fidelity=achieved, iterations=evals,
                             converged=bool(1.0 - achieved <= tol))
