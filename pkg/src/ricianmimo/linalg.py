"""Small dense linear-algebra kernels shared by the simulator."""

import numpy as np
import scipy.linalg as spla


class NumericalError(ArithmeticError):
    """A matrix that must be positive definite is not (or is singular)."""


def hermitian(A: np.ndarray) -> np.ndarray:
    """Return (A + A^H) / 2 over the last two axes."""
    return 0.5 * (A + np.swapaxes(A, -1, -2).conj())


def psd_sqrt(A: np.ndarray, clamp: float = 1e-10) -> np.ndarray:
    """
    Hermitian square root of a PSD matrix.

    Eigenvalues below ``clamp`` (in absolute value, relative to nothing)
    are set to zero before taking roots, so slightly indefinite inputs
    produced by round-off still yield a valid root.
    """
    w, V = np.linalg.eigh(hermitian(A))
    if w.min() < -clamp * max(1.0, abs(w).max()):
        raise NumericalError(f"matrix is not PSD (min eigenvalue {w.min():.3e})")
    w = np.where(w < clamp, 0.0, w)
    return (V * np.sqrt(w)) @ V.conj().T


def cho_factor(A: np.ndarray):
    """Cholesky factor of a Hermitian PD matrix, symmetrized first."""
    try:
        return spla.cho_factor(hermitian(A), lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"matrix is not positive definite: {exc}") from None


def hermitian_solve(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve A X = B for Hermitian positive definite A."""
    return spla.cho_solve(cho_factor(A), B, check_finite=False)


def hermitian_inv(A: np.ndarray) -> np.ndarray:
    """Inverse of a Hermitian PD matrix, returned exactly Hermitian."""
    n = A.shape[-1]
    return hermitian(hermitian_solve(A, np.eye(n, dtype=np.result_type(A, float))))
