"""Time-domain simulation of the driven N-pod system.

Units: hbar = 1, times in units of the pulse width T, frequencies in 1/T.
The (N+1)-level RWA Hamiltonian has the qunit states first and the ancilla
last; the Schrödinger-picture propagator is integrated with fixed-step RK4.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass

import numpy as np

from .cnum import as_matrix, l1_deviation, unitarity_residual
from .errors import IntegratorError, InvalidInputError, UnsupportedRegimeError
from .pulse import PulseSchedule, PulseStep, cayley_klein_resonant, check_spacing, rz_phase
from .qhr import phase_gate_matrix

UNITARITY_DRIFT_LIMIT = 1e-6
RZ_AREA_TOL = 1e-9


@dataclass(frozen=True)
class SimConfig:
    """Integration controls; ``window_half_width`` and ``dt`` are in units of T."""

    window_half_width: float = 10.0
    dt: float = 1.0 / 200.0
    renormalize_area: bool = True
    record_stride: int = 10

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidInputError("dt must be positive")
        if not self.window_half_width >= 3:
            raise InvalidInputError("window half-width must be >= 3 T")
        if int(self.record_stride) < 1:
            raise InvalidInputError("record stride must be >= 1")


@dataclass
class PropagatorTrace:
    times: np.ndarray
    deviation: np.ndarray
    ancilla_population: np.ndarray
    final_propagator: np.ndarray
    full_propagator: np.ndarray = None

    @property
    def final_deviation(self) -> float:
        return float(self.deviation[-1])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t", "deviation", "ancilla_pop"])
            for row in zip(self.times, self.deviation, self.ancilla_population):
                writer.writerow([format(float(x), ".17g") for x in row])


def sech(x):
    # 2 e^{-|x|} / (1 + e^{-2|x|}) never overflows
    e = np.exp(-np.abs(x))
    return 2.0 * e / (1.0 + e * e)


def _window_area_fraction(w: float) -> float:
    """Fraction of the full sech area pi inside [-w, w]."""
    return 4.0 * math.atan(math.tanh(0.5 * w)) / math.pi


def coupling_scale(step: PulseStep, cfg: SimConfig) -> float:
    """Factor applied to all couplings so the truncated window carries the full area.

    Only resonant steps are rescaled: their propagator depends on the area
    alone. A detuned sech pulse is an exact Rosen-Zener problem only with its
    nominal amplitude, so it is integrated as given.
    """
    if cfg.renormalize_area and step.delta0 == 0.0:
        return 1.0 / _window_area_fraction(cfg.window_half_width)
    return 1.0


def hamiltonian(step: PulseStep, t: float, scale: float = 1.0) -> np.ndarray:
    n = step.dim
    h = np.zeros((n + 1, n + 1), dtype=np.complex128)
    omega = scale * step.couplings() * sech((t - step.tau) / step.T)
    h[:n, n] = 0.5 * omega
    h[n, :n] = 0.5 * omega.conj()
    h[n, n] = step.delta0
    return h


def _rk4_step_matrices(step: PulseStep, t0: float, h: float, nsteps: int, scale: float) -> np.ndarray:
    """RK4 one-step maps P_j with U(t_{j+1}) = P_j U(t_j), batched over j.

    The equation is linear, so one RK4 step applied to U equals the step
    applied to the identity, times U.
    """
    n = step.dim
    d = n + 1
    k = np.zeros((d, d), dtype=np.complex128)
    c = scale * step.couplings()
    k[:n, n] = 0.5 * c
    k[n, :n] = 0.5 * c.conj()
    diag = np.zeros((d, d), dtype=np.complex128)
    diag[n, n] = step.delta0

    t = t0 + h * np.arange(nsteps)
    f1 = sech((t - step.tau) / step.T)
    f2 = sech((t + 0.5 * h - step.tau) / step.T)
    f3 = sech((t + h - step.tau) / step.T)
    a1 = -1j * (diag + f1[:, None, None] * k)
    a2 = -1j * (diag + f2[:, None, None] * k)
    a3 = -1j * (diag + f3[:, None, None] * k)

    eye = np.eye(d, dtype=np.complex128)
    k1 = a1
    k2 = a2 + 0.5 * h * (a2 @ k1)
    k3 = a2 + 0.5 * h * (a2 @ k2)
    k4 = a3 + h * (a3 @ k3)
    return eye + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _grid(step: PulseStep, cfg: SimConfig):
    half = cfg.window_half_width * step.T
    nsteps = max(1, int(round(2.0 * half / (cfg.dt * step.T))))
    return 2.0 * half, nsteps


def propagate_step(step: PulseStep, cfg: SimConfig = SimConfig(), t_start: float = None):
    """Full (N+1) x (N+1) propagator over the window around the pulse center."""
    u, _, _ = _propagate(step, cfg, t_start, record=False)
    return u


def _propagate(step: PulseStep, cfg: SimConfig, t_start, record: bool, u0=None):
    """Integrate one pulse; optionally return snapshots every record_stride steps."""
    width, nsteps = _grid(step, cfg)
    if t_start is None:
        t_start = step.tau - 0.5 * width
    # integrate in the pulse's own frame, then label with t_start
    h = width / nsteps
    local_t0 = step.tau - 0.5 * width
    maps = _rk4_step_matrices(step, local_t0, h, nsteps, coupling_scale(step, cfg))
    d = step.dim + 1
    u = np.eye(d, dtype=np.complex128) if u0 is None else u0.copy()
    times, snaps = [], []
    stride = int(cfg.record_stride)
    for j in range(nsteps):
        u = maps[j] @ u
        if record and ((j + 1) % stride == 0 or j + 1 == nsteps):
            times.append(t_start + (j + 1) * h)
            snaps.append(u)
    drift = unitarity_residual(u)
    if drift > UNITARITY_DRIFT_LIMIT:
        raise IntegratorError(
            f"propagator unitarity drift {drift:.2e} exceeds {UNITARITY_DRIFT_LIMIT:g}; reduce dt"
        )
    return u, times, snaps


def ancilla_frame(u, delta0: float, duration: float) -> np.ndarray:
    """Remove the free ancilla phase exp(-i delta0 duration) from the last row.

    For |b| = 0 this turns the Schrödinger-picture propagator of a detuned
    pulse into the interaction-picture form whose corner is a*.
    """
    u = as_matrix(u).copy()
    u[-1, :] *= cmath.exp(1j * delta0 * duration)
    return u


def window_duration(step: PulseStep, cfg: SimConfig = SimConfig()) -> float:
    return _grid(step, cfg)[0]


def step_cayley_klein(step: PulseStep):
    """(a, b) of the bright/ancilla problem for an untruncated sech step."""
    if step.delta0 == 0.0:
        ck = cayley_klein_resonant(step.area)
        return ck.a, ck.b
    chi_t = step.rms_chi * step.T
    l = round(chi_t / 2)
    if l >= 1 and abs(chi_t - 2 * l) <= RZ_AREA_TOL:
        phi = rz_phase(step.delta0 * step.T, l)
        return cmath.exp(1j * phi), 0j
    raise UnsupportedRegimeError(
        f"no closed-form propagator for chi*T = {chi_t:.6g} with detuning {step.delta0:.6g} "
        "(phase of b unknown unless chi*T = 2l)"
    )


def analytic_step_propagator(step: PulseStep) -> np.ndarray:
    """Closed-form (N+1) x (N+1) propagator of one step, ancilla in the interaction frame.

    The qunit block is I + (a - 1)|v><v| with v the normalized coupling
    vector; the ancilla column is b v, the ancilla row -b* v^dagger and the
    corner a*.
    """
    n = step.dim
    u = np.eye(n + 1, dtype=np.complex128)
    if step.rms_chi == 0.0:
        return u
    a, b = step_cayley_klein(step)
    v = step.vector()
    u[:n, :n] += (a - 1.0) * np.outer(v, v.conj())
    u[:n, n] = b * v
    u[n, :n] = -b.conjugate() * v.conj()
    u[n, n] = a.conjugate()
    return u


def _observe(u: np.ndarray, target: np.ndarray):
    n = target.shape[0]
    dev = l1_deviation(u[:n, :n], target)
    pop = float(np.max(np.abs(u[n, :n]) ** 2))
    return dev, pop


def simulate_schedule(schedule: PulseSchedule, target, cfg: SimConfig = SimConfig()) -> PropagatorTrace:
    """Integrate the pulses in time order and track the deviation from ``target``.

    Each pulse is integrated over its own window of half-width
    ``cfg.window_half_width * T``. When neighbouring windows would overlap, the
    later window is shifted to start where the previous one ended (sequential
    composition) and a warning is issued.
    """
    target = as_matrix(target)
    n = target.shape[0]
    if target.shape[1] != n:
        raise InvalidInputError("target must be square")
    if schedule.dim is not None and schedule.dim != n:
        raise InvalidInputError(
            f"schedule acts on dimension {schedule.dim} but target is {n}x{n}"
        )
    check_spacing(schedule, cfg.window_half_width)

    u = np.eye(n + 1, dtype=np.complex128)
    if schedule.abstract_gate is not None:
        u[:n, :n] = phase_gate_matrix(schedule.abstract_gate)

    if schedule.steps:
        first = schedule.steps[0]
        cursor = first.tau - cfg.window_half_width * first.T
    else:
        cursor = 0.0
    dev, pop = _observe(u, target)
    times, devs, pops = [cursor], [dev], [pop]

    for step in schedule.steps:
        width = window_duration(step, cfg)
        start = max(step.tau - 0.5 * width, cursor)
        u, ts, snaps = _propagate(step, cfg, start, record=True, u0=u)
        for t, s in zip(ts, snaps):
            dev, pop = _observe(s, target)
            times.append(t)
            devs.append(dev)
            pops.append(pop)
        cursor = start + width

    return PropagatorTrace(
        times=np.asarray(times),
        deviation=np.asarray(devs),
        ancilla_population=np.asarray(pops),
        final_propagator=u[:n, :n].copy(),
        full_propagator=u,
    )


def peak_ancilla_population(trace: PropagatorTrace) -> float:
    if len(trace.ancilla_population) == 0:
        raise InvalidInputError("trace is empty")
    return float(np.max(trace.ancilla_population))

