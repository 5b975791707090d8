"""Small dense symmetric-matrix helpers shared across the package."""

from __future__ import annotations

import numpy as np

# Eigenvalues below this (relative to the largest) are treated as zero when
# inverting; matches the positive-definiteness floor used for covariances.
EIG_FLOOR = 1e-10


def symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def sqrt_psd(m: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition."""
    w, v = np.linalg.eigh(symmetrize(np.asarray(m, dtype=float)))
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.T


def inv_sqrt_psd(m: np.ndarray) -> np.ndarray:
    """Inverse symmetric square root; rejects near-singular input.

    Raises ValueError when the smallest eigenvalue is below EIG_FLOOR.
    """
    w, v = np.linalg.eigh(symmetrize(np.asarray(m, dtype=float)))
    if w.min() <= EIG_FLOOR:
        raise ValueError(
            f"matrix is not safely positive definite (min eigenvalue {w.min():.3e})"
        )
    return (v / np.sqrt(w)) @ v.T


def min_eig(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(symmetrize(np.asarray(m, dtype=float))).min())


def opnorm_psd(m: np.ndarray) -> float:
    """Operator norm of a symmetric PSD matrix (largest eigenvalue)."""
    return float(np.linalg.eigvalsh(symmetrize(np.asarray(m, dtype=float))).max())
