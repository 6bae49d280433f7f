"""Factor unitaries into Householder reflections.

Two factorizations of an N x N unitary ``U`` are provided:

* standard:    U = M(v_1) M(v_2) ... M(v_{N-1}) Phi(phi_1, ..., phi_N)
* generalized: U = M(v_1; phi_1) M(v_2; phi_2) ... M(v_N; phi_N)

Both eliminate the working matrix column by column. Because the input is
unitary, clearing column n below the diagonal also clears row n, so the
support of v_n shrinks by one at every step.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .cnum import DEFAULT_TOL, as_matrix, unitarity_residual
from .errors import ConsistencyError, InvalidInputError
from .qhr import (
    HouseholderFactor,
    PhaseGate,
    householder_vector,
    phase_gate_matrix,
    reflect_cols,
    reflect_rows,
)

# below this off-diagonal column mass a step is treated as already eliminated
DEGENERATE_MASS = 1e-12
# one-dimensional phases smaller than this are emitted as identity skips
SKIP_PHASE = 1e-12


def _basis(n: int, j: int) -> np.ndarray:
    e = np.zeros(n, dtype=np.complex128)
    e[j] = 1.0
    return e


def _check_unitary(u, tol: float) -> np.ndarray:
    m = as_matrix(u)
    if m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"square matrix required, got {m.shape[0]}x{m.shape[1]}")
    residual = unitarity_residual(m)
    if residual > tol:
        raise InvalidInputError(
            f"unitarity check failed: max|U^dag U - I| = {residual:.3e} > tol {tol:.1e}"
        )
    return m.copy()


@dataclass(frozen=True, eq=False)
class StandardDecomposition:
    factors: tuple
    gate: PhaseGate

    kind = "standard"

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        n = self.gate.dim
        if len(self.factors) != n - 1:
            raise InvalidInputError(f"standard decomposition of U({n}) needs {n - 1} factors")
        for f in self.factors:
            if f.dim != n:
                raise InvalidInputError("factor dimension does not match phase gate")
            if not (f.is_standard or f.is_identity):
                raise InvalidInputError("standard factors must have phi = pi (or 0 for a skip)")

    @property
    def dim(self) -> int:
        return self.gate.dim

    def nontrivial_factors(self) -> list:
        return [f for f in self.factors if not f.is_identity]

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "factors": [f.to_json() for f in self.factors],
            "gate": self.gate.to_json(),
        }


@dataclass(frozen=True, eq=False)
class GeneralizedDecomposition:
    factors: tuple

    kind = "generalized"

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise InvalidInputError("generalized decomposition needs at least one factor")
        n = factors[0].dim
        if any(f.dim != n for f in factors):
            raise InvalidInputError("factor dimensions differ")
        object.__setattr__(self, "factors", factors)

    @property
    def dim(self) -> int:
        return self.factors[0].dim

    @property
    def gate(self):
        return None

    def nontrivial_factors(self) -> list:
        return [f for f in self.factors if not f.is_identity]

    def to_json(self) -> dict:
        return {"kind": self.kind, "factors": [f.to_json() for f in self.factors], "gate": None}


def decomposition_from_json(obj):
    try:
        kind = obj["kind"]
        factors = [HouseholderFactor.from_json(f) for f in obj["factors"]]
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"malformed decomposition JSON: {exc}") from exc
    if kind == "standard":
        if not obj.get("gate"):
            raise InvalidInputError("standard decomposition JSON needs a gate")
        return StandardDecomposition(factors, PhaseGate.from_json(obj["gate"]))
    if kind == "generalized":
        if obj.get("gate") is not None:
            raise InvalidInputError("generalized decomposition JSON must have gate null")
        return GeneralizedDecomposition(factors)
    raise InvalidInputError(f"unknown decomposition kind {kind!r}")


def decompose_standard(u, tol: float = DEFAULT_TOL) -> StandardDecomposition:
    """N-1 standard reflections followed by an N-dimensional phase gate."""
    w = _check_unitary(u, tol)
    n = w.shape[0]
    factors = []
    for j in range(n - 1):
        v = householder_vector(w[:, j], j, mass_tol=DEGENERATE_MASS)
        if v is None:
            factors.append(HouseholderFactor(_basis(n, j), 0.0))
            continue
        w = reflect_rows(v, math.pi, w)
        factors.append(HouseholderFactor(v, math.pi))
    phases = [cmath.phase(z) for z in np.diagonal(w)]
    return StandardDecomposition(tuple(factors), PhaseGate(tuple(phases)))


def _generalized_step(col: np.ndarray, j: int, check_tol: float) -> HouseholderFactor:
    n = col.shape[0]
    if np.linalg.norm(col[j + 1:]) < DEGENERATE_MASS:
        # already a pure phase on coordinate j
        alpha = cmath.phase(col[j])
        return HouseholderFactor(_basis(n, j), 0.0 if abs(alpha) < SKIP_PHASE else alpha)
    d = np.zeros(n, dtype=np.complex128)
    d[j:] = col[j:]
    d[j] -= 1.0
    v = d / np.linalg.norm(d)
    target = _basis(n, j)
    phi = 2.0 * cmath.phase(1.0 - col[j]) - math.pi
    for candidate in (phi, -phi):
        if np.max(np.abs(reflect_rows(v, -candidate, col) - target)) <= check_tol:
            return HouseholderFactor(v, candidate)
    raise ConsistencyError(
        f"generalized reflection {j + 1} does not map its column onto e_{j + 1}", column=col.copy()
    )


def decompose_generalized(u, tol: float = DEFAULT_TOL) -> GeneralizedDecomposition:
    """N generalized reflections, the last one a phase on the final coordinate."""
    w = _check_unitary(u, tol)
    n = w.shape[0]
    check_tol = max(10.0 * tol, 1e-9)
    factors = []
    for j in range(n):
        f = _generalized_step(w[:, j], j, check_tol)
        if not f.is_identity:
            w = reflect_rows(f.v, -f.phi, w)
        factors.append(f)
    return GeneralizedDecomposition(tuple(factors))


def reconstruct_standard(d: StandardDecomposition) -> np.ndarray:
    r = np.eye(d.dim, dtype=np.complex128)
    for f in d.factors:
        if not f.is_identity:
            r = reflect_cols(r, f.v, f.phi)
    return r @ phase_gate_matrix(d.gate)


def reconstruct_generalized(d: GeneralizedDecomposition) -> np.ndarray:
    r = np.eye(d.dim, dtype=np.complex128)
    for f in d.factors:
        if not f.is_identity:
            r = reflect_cols(r, f.v, f.phi)
    return r


def reconstruct(d) -> np.ndarray:
    if isinstance(d, StandardDecomposition):
        return reconstruct_standard(d)
    return reconstruct_generalized(d)


def decompose(u, kind: str = "standard", tol: float = DEFAULT_TOL):
    if kind == "standard":
        return decompose_standard(u, tol)
    if kind == "generalized":
        return decompose_generalized(u, tol)
    raise InvalidInputError(f"unknown decomposition kind {kind!r}")


def parameter_count(n: int, kind: str = "standard") -> int:
    """Real parameters carried by a decomposition of U(n).

    A reflection vector supported on k coordinates carries 2(k-1) real
    parameters (norm and global phase removed). The standard form adds n gate
    phases; the generalized form adds one reflection phase per factor, with the
    last factor (k = 1) contributing its phase only.
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if kind == "standard":
        return sum(2 * (k - 1) for k in range(2, n + 1)) + n
    if kind == "generalized":
        return sum(2 * (k - 1) + 1 for k in range(1, n + 1))
    raise InvalidInputError(f"unknown decomposition kind {kind!r}")
