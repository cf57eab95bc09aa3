"""Small shared linear-algebra helpers."""

from __future__ import annotations

import numpy as np


def hermitian_part(m: np.ndarray) -> np.ndarray:
    """Return (M + M^H)/2, removing round-off asymmetry."""
    return 0.5 * (m + m.conj().T)


def is_exactly_hermitian(m: np.ndarray) -> bool:
    """True when element (i, j) equals conj of (j, i) bit-for-bit."""
    return np.array_equal(m, m.conj().T)


def check_finite(name: str, *arrays: np.ndarray) -> None:
    """Raise ValueError if any array contains NaN or infinity."""
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{name}: non-finite values")


def min_max_eigvalsh(m: np.ndarray) -> tuple[float, float]:
    """Smallest and largest eigenvalue of a Hermitian matrix."""
    w = np.linalg.eigvalsh(m)
    return float(w[0]), float(w[-1])


def floored_inverse(m: np.ndarray, rel_floor: float = 1e-12) -> np.ndarray:
    """Inverse of a Hermitian PSD matrix with spectrally floored eigenvalues.

    Eigenvalues below ``rel_floor * lam_max`` are raised to the floor, which
    regularizes near-singular inputs; a matrix with no positive eigenvalue is
    rejected.
    """
    w, v = np.linalg.eigh(hermitian_part(np.asarray(m)))
    if w[-1] <= 0:
        raise ValueError("matrix is singular beyond repair")
    w = np.maximum(w, rel_floor * w[-1])
    return hermitian_part((v / w) @ v.conj().T)
