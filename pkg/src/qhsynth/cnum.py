"""Dense complex matrix helpers.

Matrices and vectors are plain ``numpy`` complex128 arrays. The functions
here add the checks and conventions the rest of the package relies on:
explicit tolerances, max-norm comparisons, the entrywise l1 deviation and a
seeded Haar-like unitary generator.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError

DEFAULT_TOL = 1e-10


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise InvalidInputError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError("matrix has non-finite entries")
    return m


def as_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=np.complex128)
    if v.ndim != 1 or v.size == 0:
        raise InvalidInputError(f"expected a non-empty 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidInputError("vector has non-finite entries")
    return v


def _require_square(m: np.ndarray) -> None:
    if m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"square matrix required, got {m.shape[0]}x{m.shape[1]}")


def mat_mul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise InvalidInputError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def adjoint(a) -> np.ndarray:
    return as_matrix(a).conj().T.copy()


def max_norm(a) -> float:
    """Largest entry modulus."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def unitarity_residual(a) -> float:
    """max |(a^dagger a - I)_jk|."""
    m = as_matrix(a)
    _require_square(m)
    return max_norm(m.conj().T @ m - np.eye(m.shape[0]))


def is_unitary(a, tol: float = DEFAULT_TOL) -> bool:
    if not tol > 0:
        raise InvalidInputError("tol must be positive")
    return unitarity_residual(a) <= tol


def determinant(a) -> complex:
    m = as_matrix(a)
    _require_square(m)
    # LAPACK getrf: LU with partial pivoting
    return complex(np.linalg.det(m))


def l1_deviation(a, b) -> float:
    """Sum over all entries of |a_jk - b_jk|."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise InvalidInputError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.sum(np.abs(a - b)))


def random_unitary(n: int, seed: int) -> np.ndarray:
    """Haar-distributed n x n unitary from a seeded complex Gaussian matrix.

    The Gaussian matrix is triangularized with standard Householder
    reflections; the reflections times the phases of the triangular diagonal
    give the Haar measure (Mezzadri's phase fix).
    """
    from .qhr import householder_vector, reflect_rows

    if n < 1:
        raise InvalidInputError("n must be >= 1")
    rng = np.random.default_rng(seed)
    g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    vectors = []
    for j in range(n - 1):
        v = householder_vector(g[:, j], j)
        if v is not None:
            g = reflect_rows(v, np.pi, g)
        vectors.append(v)
    diag = np.diagonal(g)
    u = np.diag(diag / np.abs(diag)).astype(np.complex128)
    for v in reversed(vectors):
        if v is not None:
            u = reflect_rows(v, np.pi, u)
    return u


def matrix_to_json(a) -> dict:
    m = as_matrix(a)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in m.ravel()],
    }


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols, entries = int(obj["rows"]), int(obj["cols"]), obj["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed matrix JSON: {exc}") from exc
    if rows < 1 or cols < 1:
        raise InvalidInputError("rows and cols must be positive")
    if len(entries) != rows * cols:
        raise InvalidInputError(
            f"matrix JSON declares {rows}x{cols} but has {len(entries)} entries"
        )
    return as_matrix(np.array([complex_from_pair(p) for p in entries]).reshape(rows, cols))


def complex_from_pair(p) -> complex:
    try:
        re, im = p
        return complex(float(re), float(im))
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"complex entry must be [re, im], got {p!r}") from exc


def vector_to_json(x) -> list:
    return [[float(z.real), float(z.imag)] for z in as_vector(x)]


def vector_from_json(entries) -> np.ndarray:
    if not isinstance(entries, list):
        raise InvalidInputError("vector JSON must be a list of [re, im] pairs")
    return as_vector([complex_from_pair(p) for p in entries])
