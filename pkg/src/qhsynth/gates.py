"""Quantum Fourier transform matrices and their closed-form reflection data."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .decomp import GeneralizedDecomposition, StandardDecomposition
from .errors import InvalidInputError, UnsupportedFixtureError
from .qhr import HouseholderFactor, PhaseGate

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)


def qft_matrix(n: int) -> np.ndarray:
    """Entry (k, m) is exp(2 pi i k m / n) / sqrt(n), zero-based."""
    if n < 1:
        raise InvalidInputError("QFT dimension must be >= 1")
    k = np.arange(n)
    return np.exp(2j * np.pi * np.outer(k, k) / n) / math.sqrt(n)


@dataclass(frozen=True, eq=False)
class QftFixture:
    n: int
    standard: Optional[StandardDecomposition]
    generalized: GeneralizedDecomposition


def _exact(components, phi: float = math.pi) -> HouseholderFactor:
    # closed forms are unit norm up to rounding; renormalize the last ulp
    return HouseholderFactor.normalized(np.asarray(components, dtype=np.complex128), phi)


def _qft2() -> QftFixture:
    v = _exact([-0.5 * math.sqrt(2 - SQRT2), 0.5 * math.sqrt(2 + SQRT2)])
    standard = StandardDecomposition((v,), PhaseGate((0.0, 0.0)))
    return QftFixture(2, standard, GeneralizedDecomposition((v,)))


def _qft3() -> QftFixture:
    c1 = 0.5 * math.sqrt(1 + 1 / SQRT3)
    v1 = _exact([c1 * (1 - SQRT3), c1, c1])
    c2 = math.sqrt((1 + SQRT2) / (2 * SQRT2))
    v2 = _exact([0, c2 * (1 - SQRT2), -1j * c2])
    standard = StandardDecomposition(
        (v1, v2), PhaseGate((0.0, math.pi / 4, -3 * math.pi / 4))
    )
    w2 = _exact(np.array([0, 1, -1]) / SQRT2, math.pi / 2)
    return QftFixture(3, standard, GeneralizedDecomposition((v1, w2)))


def _qft4() -> QftFixture:
    v1 = _exact(0.5 * np.array([-1, 1, 1, 1]))
    c2 = math.sqrt((1 + SQRT2) / (2 * SQRT2))
    v2 = _exact([0, c2 * (1 - SQRT2), 0, -1j * c2])
    standard = StandardDecomposition(
        (v1, v2, HouseholderFactor(np.array([0, 0, 1, 0]), 0.0)),
        PhaseGate((0.0, math.pi / 4, 0.0, -3 * math.pi / 4)),
    )
    w2 = _exact(np.array([0, 1, 0, -1]) / SQRT2, math.pi / 2)
    return QftFixture(4, standard, GeneralizedDecomposition((v1, w2)))


_FIXTURES = {2: _qft2, 3: _qft3, 4: _qft4}


def qft_fixture(n: int) -> QftFixture:
    """Literal reflection data for the QFT with n in {2, 3, 4}."""
    try:
        return _FIXTURES[n]()
    except KeyError:
        raise UnsupportedFixtureError(
            f"no closed-form QFT fixture for n={n}; use decompose_standard/decompose_generalized"
        ) from None


def has_fixture(n: int) -> bool:
    return n in _FIXTURES
