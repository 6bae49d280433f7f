"""Drive parameters realizing Householder factors in an N-pod system.

Each factor ``M(v; phi)`` is produced by N simultaneous sech pulses
``Omega_n(t) = chi_n sech((t - tau)/T) exp(i beta_n)`` coupling the qunit
states to a shared ancilla, with ``chi_n = chi |v_n|`` and
``beta_n = arg v_n``. The reflection phase is set by the Cayley-Klein
parameter ``a`` of the bright/ancilla two-level problem:

* on resonance, ``a = cos(A/2)`` with rms area ``A = pi chi T``; A = 2(2k+1) pi
  gives ``a = -1`` (standard reflection);
* for the Rosen-Zener model with ``chi T = 2l``, ``|a| = 1`` and the detuning
  ``Delta_0`` selects ``phi = arg a``.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .decomp import GeneralizedDecomposition, StandardDecomposition
from .errors import DomainError, InvalidInputError, NumericalError, WrongRealizationError
from .qhr import HouseholderFactor, PhaseGate

ENVELOPE = "sech"
DETUNING_BRACKET = 1e6
POLE_GUARD = 1e-8
UNKNOWN_PHASE_LIMIT = 1e-10

# ---------------------------------------------------------------------------
# complex gamma function

# Lanczos coefficients for g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _pole_distance(z: complex) -> float:
    """Distance from z to the nearest non-positive integer (inf if Re z > 0.5)."""
    if z.real > 0.5:
        return math.inf
    return abs(z - min(0.0, round(z.real)))


def _log_sin(w: complex) -> complex:
    """log sin(w) on some branch, without overflow for large |Im w|."""
    if abs(w.imag) < 20.0:
        return cmath.log(cmath.sin(w))
    # sin w = (i/2) e^{-iw} (1 - e^{2iw}) for Im w > 0, mirrored below the axis
    if w.imag > 0:
        return cmath.log(0.5j) - 1j * w + cmath.log(1.0 - cmath.exp(2j * w))
    return cmath.log(-0.5j) + 1j * w + cmath.log(1.0 - cmath.exp(-2j * w))


def log_gamma(z: complex) -> complex:
    """log Gamma(z) on some branch; exp() of it is Gamma(z)."""
    z = complex(z)
    if z.real < 0.5:
        if _pole_distance(z) == 0.0:
            raise DomainError(f"Gamma has a pole at {z}")
        # reflection: Gamma(z) Gamma(1 - z) = pi / sin(pi z)
        return math.log(math.pi) - _log_sin(math.pi * z) - log_gamma(1.0 - z)
    z -= 1.0
    x = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        x += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


def complex_gamma(z: complex) -> complex:
    """Euler's Gamma function for complex argument."""
    return cmath.exp(log_gamma(z))


# ---------------------------------------------------------------------------
# Cayley-Klein parameters


class CayleyKlein:
    """Two-level propagator parameters [[a, b], [-b*, a*]].

    When only ``|b|`` is known (Rosen-Zener with |b| > 0), reading ``b``
    raises; ``b_modulus`` is always available.
    """

    __slots__ = ("a", "b_modulus", "_b")

    def __init__(self, a: complex, b: Optional[complex] = None, b_modulus: Optional[float] = None):
        self.a = complex(a)
        if b is not None:
            self._b = complex(b)
            self.b_modulus = abs(self._b)
        else:
            if b_modulus is None:
                b_modulus = math.sqrt(max(0.0, 1.0 - abs(self.a) ** 2))
            self.b_modulus = float(b_modulus)
            self._b = 0j if self.b_modulus < UNKNOWN_PHASE_LIMIT else None

    @property
    def b_phase_known(self) -> bool:
        return self._b is not None

    @property
    def b(self) -> complex:
        if self._b is None:
            raise NumericalError(
                f"phase of b is not determined by this model (|b| = {self.b_modulus:.3e})"
            )
        return self._b

    def __repr__(self):
        b = self._b if self._b is not None else f"|b|={self.b_modulus:.3g}"
        return f"CayleyKlein(a={self.a!r}, b={b})"


def cayley_klein_resonant(area: float) -> CayleyKlein:
    if area < 0:
        raise InvalidInputError("pulse area must be non-negative")
    return CayleyKlein(math.cos(area / 2), -1j * math.sin(area / 2))


def _sech(x: float) -> float:
    e = math.exp(-abs(x))
    return 2.0 * e / (1.0 + e * e)


def rz_a_modulus_squared(chi_t: float, delta_t: float) -> float:
    """Closed-form |a|^2 for the Rosen-Zener model."""
    return 1.0 - (math.sin(0.5 * math.pi * chi_t) * _sech(0.5 * math.pi * delta_t)) ** 2


def cayley_klein_rz(chi_t: float, delta_t: float) -> CayleyKlein:
    """Rosen-Zener ``a`` from the gamma-function expression; only |b| is known."""
    half_d = 0.5j * delta_t
    z_plus = 0.5 + 0.5 * chi_t + half_d
    z_minus = 0.5 - 0.5 * chi_t + half_d
    if _pole_distance(z_minus) < POLE_GUARD:
        raise DomainError(
            f"chi*T={chi_t}, Delta0*T={delta_t} is within {POLE_GUARD} of a Gamma pole; "
            "use rz_a_modulus_squared for |a|"
        )
    log_a = 2.0 * log_gamma(0.5 + half_d) - log_gamma(z_plus) - log_gamma(z_minus)
    # |b|^2 = 1 - |a|^2 in closed form; the subtraction loses half the digits
    b_mod = abs(math.sin(0.5 * math.pi * chi_t)) * _sech(0.5 * math.pi * delta_t)
    return CayleyKlein(cmath.exp(log_a), b_modulus=b_mod)


def rz_phase(delta_t: float, l: int) -> float:
    """Reflection phase 2 * sum_k atan2(2k+1, Delta0 T) for chi T = 2l, in (0, 2 l pi)."""
    return 2.0 * sum(math.atan2(2 * k + 1, delta_t) for k in range(l))


def solve_detuning_all(phi: float, l: int) -> list:
    """All l values of Delta0*T with arg a = phi (mod 2 pi) for chi T = 2l, ascending."""
    if l < 1:
        raise InvalidInputError("l must be >= 1")
    phi = float(phi) % (2.0 * math.pi)
    if not 0.0 < phi < 2.0 * math.pi:
        raise InvalidInputError("phi must not be a multiple of 2 pi")
    # rz_phase decreases strictly from 2 l pi to 0, so phi + 2 pi j has one root each
    roots = [_bisect_phase(phi + 2.0 * math.pi * j, l) for j in range(l)]
    return sorted(roots)


def solve_detuning(phi: float, l: int, branch: str = "largest") -> float:
    if branch not in ("largest", "smallest"):
        raise InvalidInputError(f"branch must be 'largest' or 'smallest', got {branch!r}")
    if l < 1:
        raise InvalidInputError("l must be >= 1")
    phi = float(phi) % (2.0 * math.pi)
    if not 0.0 < phi < 2.0 * math.pi:
        raise InvalidInputError("phi must not be a multiple of 2 pi")
    # largest root <-> smallest target on the decreasing map
    j = 0 if branch == "largest" else l - 1
    return _bisect_phase(phi + 2.0 * math.pi * j, l)


def _bisect_phase(target: float, l: int) -> float:
    lo, hi = -DETUNING_BRACKET, DETUNING_BRACKET
    f_lo, f_hi = rz_phase(lo, l) - target, rz_phase(hi, l) - target
    if not (f_lo > 0.0 > f_hi):
        raise NumericalError(
            f"detuning root for phase {target:.6g} (l={l}) lies outside "
            f"[{lo:g}, {hi:g}]: residuals {f_lo:.3e}, {f_hi:.3e}"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi) or hi - lo <= 1e-13 * max(1.0, abs(mid)):
            break
        if rz_phase(mid, l) - target > 0.0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    residual = abs(math.remainder(rz_phase(root, l) - target, 2.0 * math.pi))
    if residual > 1e-10:
        raise NumericalError(f"detuning solve residual {residual:.3e} for phase {target:.6g}")
    return root


# ---------------------------------------------------------------------------
# pulse steps and schedules


@dataclass(frozen=True)
class PulseStep:
    """One simultaneous sech pulse on all N couplings.

    ``chi`` are peak couplings (1/time), ``beta`` their phases, ``delta0`` the
    common detuning of the ancilla, ``T`` the sech width and ``tau`` the center.
    ``factor`` optionally records which decomposition factor (1-based) the
    step realizes.
    """

    chi: tuple
    beta: tuple
    delta0: float = 0.0
    T: float = 1.0
    tau: float = 0.0
    envelope: str = ENVELOPE
    area_index: int = 0
    factor: Optional[int] = None

    def __post_init__(self):
        chi = tuple(float(c) for c in self.chi)
        beta = tuple(float(b) for b in self.beta)
        if not chi or len(chi) != len(beta):
            raise InvalidInputError("chi and beta must be non-empty and of equal length")
        if any(c < 0 or not math.isfinite(c) for c in chi):
            raise InvalidInputError("couplings must be finite and non-negative")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise InvalidInputError("pulse width T must be positive")
        if self.envelope != ENVELOPE:
            raise InvalidInputError(f"only the {ENVELOPE!r} envelope is supported")
        if self.area_index < 0:
            raise InvalidInputError("area index must be >= 0")
        object.__setattr__(self, "chi", chi)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "delta0", float(self.delta0))
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "tau", float(self.tau))

    @property
    def dim(self) -> int:
        return len(self.chi)

    @property
    def rms_chi(self) -> float:
        return math.sqrt(sum(c * c for c in self.chi))

    @property
    def area(self) -> float:
        """rms pulse area pi * chi * T of the untruncated sech."""
        return math.pi * self.rms_chi * self.T

    def couplings(self) -> np.ndarray:
        """Complex peak Rabi frequencies chi_n exp(i beta_n)."""
        return np.asarray(self.chi) * np.exp(1j * np.asarray(self.beta))

    def vector(self) -> np.ndarray:
        """Normalized coupling vector (the realized reflection vector)."""
        chi = self.rms_chi
        if chi == 0.0:
            raise InvalidInputError("step has no coupling")
        return self.couplings() / chi

    def replace(self, **changes) -> "PulseStep":
        from dataclasses import replace

        return replace(self, **changes)

    def to_json(self) -> dict:
        out = {
            "chi": list(self.chi),
            "beta": list(self.beta),
            "delta0": self.delta0,
            "T": self.T,
            "tau": self.tau,
            "envelope": self.envelope,
            "area_index": self.area_index,
        }
        if self.factor is not None:
            out["factor"] = self.factor
        return out

    @classmethod
    def from_json(cls, obj) -> "PulseStep":
        try:
            return cls(
                chi=tuple(obj["chi"]),
                beta=tuple(obj["beta"]),
                delta0=float(obj["delta0"]),
                T=float(obj["T"]),
                tau=float(obj["tau"]),
                envelope=obj.get("envelope", ENVELOPE),
                area_index=int(obj["area_index"]),
                factor=obj.get("factor"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed pulse step JSON: {exc}") from exc


@dataclass(frozen=True)
class PulseSchedule:
    """Pulse steps in time order.

    The earliest pulse realizes the rightmost factor of the operator product.
    ``abstract_gate`` (the standard decomposition's phase gate, itself the
    rightmost factor) is applied as an exact matrix before the first pulse.
    """

    steps: tuple
    spacing: float = 10.0
    abstract_gate: Optional[PhaseGate] = None
    dim: Optional[int] = None

    def __post_init__(self):
        steps = tuple(self.steps)
        object.__setattr__(self, "steps", steps)
        dims = {s.dim for s in steps}
        if self.abstract_gate is not None:
            dims.add(self.abstract_gate.dim)
        if self.dim is not None:
            dims.add(int(self.dim))
        if len(dims) > 1:
            raise InvalidInputError(f"schedule mixes dimensions {sorted(dims)}")
        object.__setattr__(self, "dim", dims.pop() if dims else None)
        for prev, nxt in zip(steps, steps[1:]):
            if not nxt.tau > prev.tau:
                raise InvalidInputError("pulse centers must be strictly increasing")

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "spacing": self.spacing,
            "steps": [s.to_json() for s in self.steps],
            "abstract_gate": None if self.abstract_gate is None else self.abstract_gate.to_json(),
        }

    @classmethod
    def from_json(cls, obj) -> "PulseSchedule":
        try:
            gate = obj.get("abstract_gate")
            return cls(
                steps=tuple(PulseStep.from_json(s) for s in obj["steps"]),
                spacing=float(obj.get("spacing", 10.0)),
                abstract_gate=None if gate is None else PhaseGate.from_json(gate),
                dim=obj.get("dim"),
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise InvalidInputError(f"malformed pulse schedule JSON: {exc}") from exc


def _couplings_from_vector(v: np.ndarray, chi: float):
    mags = np.abs(v)
    chis = tuple(float(chi * m) for m in mags)
    betas = tuple(float(cmath.phase(z)) if m > 0 else 0.0 for z, m in zip(v, mags))
    return chis, betas


def factor_to_resonant_pulse(f: HouseholderFactor, T: float = 1.0, k: int = 0, tau: float = 0.0) -> PulseStep:
    """Resonant pulse of rms area 2(2k+1) pi realizing the standard reflection M(v)."""
    if not f.is_standard:
        raise WrongRealizationError(
            f"resonant pulses realize phi = pi only (got phi = {f.phi:.6g}); use factor_to_rz_pulse"
        )
    if not T > 0:
        raise InvalidInputError("T must be positive")
    if k < 0:
        raise InvalidInputError("k must be >= 0")
    chi = 2.0 * (2 * k + 1) / T
    chis, betas = _couplings_from_vector(f.v, chi)
    return PulseStep(chis, betas, delta0=0.0, T=T, tau=tau, area_index=k)


def factor_to_rz_pulse(
    f: HouseholderFactor, T: float = 1.0, l: int = 1, branch: str = "largest", tau: float = 0.0
) -> PulseStep:
    """Detuned sech pulse with chi T = 2l realizing the generalized reflection M(v; phi)."""
    if f.is_identity:
        raise InvalidInputError("phi = 0 factor is the identity; no pulse needed")
    if not T > 0:
        raise InvalidInputError("T must be positive")
    if l < 1:
        raise InvalidInputError("l must be >= 1")
    delta_t = solve_detuning(f.phi % (2.0 * math.pi), l, branch)
    chi = 2.0 * l / T
    chis, betas = _couplings_from_vector(f.v, chi)
    return PulseStep(chis, betas, delta0=delta_t / T, T=T, tau=tau, area_index=l)


@dataclass
class ScheduleResult:
    schedule: PulseSchedule
    notices: list = field(default_factory=list)


def schedule_from_decomposition(
    d,
    T: float = 1.0,
    k: int = 0,
    l: int = 1,
    branch: str = "largest",
    spacing: float = 10.0,
    first_center: float = -5.0,
) -> ScheduleResult:
    """Map every non-identity factor to a pulse, latest factor first in time.

    Standard reflections use resonant pulses (area index k); other phases use
    Rosen-Zener pulses (area index l). Centers are ``first_center * T`` plus
    multiples of ``spacing * T``.
    """
    if not isinstance(d, (StandardDecomposition, GeneralizedDecomposition)):
        raise InvalidInputError("expected a decomposition")
    notices = []
    steps = []
    indexed = list(enumerate(d.factors, start=1))
    for idx, f in reversed(indexed):
        if f.is_identity:
            notices.append(f"factor {idx} has phi = 0 (identity); no pulse emitted")
            continue
        tau = (first_center + spacing * len(steps)) * T
        if f.is_standard:
            step = factor_to_resonant_pulse(f, T, k, tau)
        else:
            step = factor_to_rz_pulse(f, T, l, branch, tau)
        steps.append(step.replace(factor=idx))
    if not steps:
        notices.append("decomposition is the identity up to the phase gate; schedule is empty")
    schedule = PulseSchedule(tuple(steps), spacing, d.gate, dim=d.dim)
    return ScheduleResult(schedule, notices)


def check_spacing(schedule: PulseSchedule, window_half_width: float) -> bool:
    """Warn when neighbouring integration windows would overlap."""
    ok = True
    for prev, nxt in zip(schedule.steps, schedule.steps[1:]):
        reach = window_half_width * (prev.T + nxt.T)
        if nxt.tau - prev.tau < reach:
            ok = False
    if not ok:
        warnings.warn(
            f"pulse spacing is below 2 x window half-width ({window_half_width} T); "
            "windows are composed sequentially",
            stacklevel=2,
        )
    return ok
