"""Standard and generalized quantum Householder reflections.

The generalized reflection is ``M(v; phi) = I + (exp(i phi) - 1) |v><v|``;
``phi = pi`` gives the standard reflection ``I - 2 |v><v|``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .cnum import as_vector, vector_from_json, vector_to_json
from .errors import InvalidInputError

NORM_TOL = 1e-12


def fold_phase(phi: float) -> float:
    """Map an angle into (-pi, pi]."""
    phi = float(phi)
    if not math.isfinite(phi):
        raise InvalidInputError("phase must be finite")
    r = math.remainder(phi, 2.0 * math.pi)
    return math.pi if r <= -math.pi else r


@dataclass(frozen=True, eq=False)
class HouseholderFactor:
    """Unit vector ``v`` and reflection phase ``phi``.

    ``phi`` is folded into (-pi, pi] on construction. ``phi == 0`` encodes
    an identity (skipped) factor.
    """

    v: np.ndarray
    phi: float = math.pi

    def __post_init__(self):
        v = as_vector(self.v).copy()
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidInputError(f"Householder vector must be unit norm, |v| = {norm!r}")
        v.setflags(write=False)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "phi", fold_phase(self.phi))

    @property
    def dim(self) -> int:
        return self.v.shape[0]

    @property
    def is_identity(self) -> bool:
        return self.phi == 0.0

    @property
    def is_standard(self) -> bool:
        return abs(self.phi - math.pi) <= NORM_TOL

    def projector(self) -> np.ndarray:
        return np.outer(self.v, self.v.conj())

    def inverse(self) -> "HouseholderFactor":
        return HouseholderFactor(self.v, -self.phi)

    def to_json(self) -> dict:
        return {"phi": self.phi, "v": vector_to_json(self.v)}

    @classmethod
    def from_json(cls, obj) -> "HouseholderFactor":
        try:
            return cls(vector_from_json(obj["v"]), float(obj["phi"]))
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"malformed factor JSON: {exc}") from exc

    @classmethod
    def identity(cls, n: int) -> "HouseholderFactor":
        v = np.zeros(n, dtype=np.complex128)
        v[-1] = 1.0
        return cls(v, 0.0)

    @classmethod
    def normalized(cls, v, phi: float = math.pi) -> "HouseholderFactor":
        """Build a factor from an unnormalized direction."""
        v = as_vector(v)
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise InvalidInputError("zero vector has no direction")
        return cls(v / norm, phi)


@dataclass(frozen=True, eq=False)
class PhaseGate:
    """Diagonal gate diag(exp(i phases))."""

    phases: tuple

    def __post_init__(self):
        phases = tuple(float(p) for p in self.phases)
        if not phases:
            raise InvalidInputError("phase gate needs at least one phase")
        if not all(math.isfinite(p) for p in phases):
            raise InvalidInputError("phases must be finite")
        object.__setattr__(self, "phases", phases)

    @property
    def dim(self) -> int:
        return len(self.phases)

    def to_json(self) -> dict:
        return {"phases": list(self.phases)}

    @classmethod
    def from_json(cls, obj) -> "PhaseGate":
        try:
            return cls(tuple(obj["phases"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed phase gate JSON: {exc}") from exc


def _coeff(phi: float) -> complex:
    # exact -2 for the standard reflection
    if phi == math.pi or phi == -math.pi:
        return -2.0
    return cmath.exp(1j * phi) - 1.0


def reflect_rows(v, phi: float, a) -> np.ndarray:
    """Return M(v; phi) @ a using the rank-1 update, for a vector or a matrix."""
    a = np.asarray(a, dtype=np.complex128)
    coeff = _coeff(phi)
    if a.ndim == 1:
        return a + coeff * np.vdot(v, a) * v
    return a + coeff * np.outer(v, v.conj() @ a)


def reflect_cols(a, v, phi: float) -> np.ndarray:
    """Return a @ M(v; phi)."""
    a = np.asarray(a, dtype=np.complex128)
    return a + _coeff(phi) * np.outer(a @ v, v.conj())


def reflection_matrix(f: HouseholderFactor) -> np.ndarray:
    n = f.dim
    return np.eye(n, dtype=np.complex128) + _coeff(f.phi) * f.projector()


def apply_reflection(f: HouseholderFactor, x) -> np.ndarray:
    x = as_vector(x)
    if x.shape[0] != f.dim:
        raise InvalidInputError(f"dimension mismatch: factor {f.dim}, vector {x.shape[0]}")
    return reflect_rows(f.v, f.phi, x)


def phase_gate_matrix(g: PhaseGate) -> np.ndarray:
    return np.diag(np.exp(1j * np.asarray(g.phases))).astype(np.complex128)


def householder_vector(x, start: int, mass_tol: float = 0.0):
    """Unit vector of the standard reflection taking x to |x| e^{i arg x_s} e_s.

    Only components ``start:`` of ``x`` are used; the returned vector is zero
    above ``start``. Returns None when the off-pivot mass is <= mass_tol
    (nothing to eliminate).
    """
    x = np.asarray(x, dtype=np.complex128)
    tail = x[start + 1:]
    mass2 = float(np.real(np.vdot(tail, tail)))
    if math.sqrt(mass2) <= mass_tol or mass2 == 0.0:
        return None
    pivot = x[start]
    norm = math.sqrt(abs(pivot) ** 2 + mass2)
    phase = cmath.exp(1j * cmath.phase(pivot)) if pivot != 0 else 1.0
    v = np.zeros_like(x)
    # pivot - |x| e^{i arg pivot} without cancellation
    v[start] = -mass2 / (norm + abs(pivot)) * phase
    v[start + 1:] = tail
    return v / np.linalg.norm(v)
