"""Complex matrix arithmetic for the C*-algebra layer M_k(C).

Algebra elements are plain ``numpy`` complex arrays of shape ``(k, k)``.
Hermitian spectra come from a cyclic complex Jacobi sweep so results do not
depend on the LAPACK build.
"""

from __future__ import annotations

import math

import numpy as np

INFINITY = math.inf

ATOL = 1e-12
RTOL = 1e-10

_JACOBI_OFF_TOL = 1e-13
_JACOBI_MAX_SWEEPS = 100


class StabilityError(Exception):
    """Base class for every error raised by this package."""


class NotHermitian(StabilityError):
    pass


def as_algebra(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"algebra element must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("algebra element has non-finite entries")
    return a


def adjoint(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def within(err: float, scale: float = 0.0, atol: float = ATOL, rtol: float = RTOL) -> bool:
    return err <= atol + rtol * scale


def hermitian_defect(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - adjoint(a)))) if a.size else 0.0


def _jacobi_rotate(a: np.ndarray, p: int, q: int) -> None:
    """Zero the (p, q) entry of every matrix in the stack ``a`` in place."""
    apq = a[:, p, q]
    r = np.abs(apq)
    # unitary phase on index q makes the pivot real and non-negative
    phase = np.where(r > 0, apq / np.where(r > 0, r, 1.0), 1.0)
    a[:, :, q] *= np.conj(phase)[:, None]
    a[:, q, :] *= phase[:, None]
    app, aqq = a[:, p, p].real, a[:, q, q].real
    phi = 0.5 * np.arctan2(2.0 * r, aqq - app)
    c, s = np.cos(phi)[:, None], np.sin(phi)[:, None]
    col_p, col_q = a[:, :, p].copy(), a[:, :, q].copy()
    a[:, :, p] = c * col_p - s * col_q
    a[:, :, q] = s * col_p + c * col_q
    row_p, row_q = a[:, p, :].copy(), a[:, q, :].copy()
    a[:, p, :] = c * row_p - s * row_q
    a[:, q, :] = s * row_p + c * row_q
    a[:, p, q] = 0.0
    a[:, q, p] = 0.0


def jacobi_eigenvalues(a: np.ndarray) -> tuple[np.ndarray, int]:
    """Cyclic Jacobi on a Hermitian matrix (or a stack of them).

    Sweeps pivots in row-major order until the off-diagonal Frobenius norm
    is below 1e-13 relative to the matrix norm, or 100 sweeps. Returns the
    ascending eigenvalues and the number of sweeps used.
    """
    a = np.array(a, dtype=complex)
    single = a.ndim == 2
    a = a.reshape((-1,) + a.shape[-2:])
    k = a.shape[-1]
    # symmetrize so round-off in the input cannot leak into the spectrum
    a = 0.5 * (a + adjoint(a))
    scale = np.linalg.norm(a, axis=(-2, -1))
    mask = ~np.eye(k, dtype=bool)
    sweeps = 0
    while sweeps < _JACOBI_MAX_SWEEPS:
        off = np.sqrt(np.sum(np.abs(a[:, mask]) ** 2, axis=-1))
        if np.all(off <= _JACOBI_OFF_TOL * scale):
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                _jacobi_rotate(a, p, q)
        sweeps += 1
    vals = np.sort(np.real(np.diagonal(a, axis1=-2, axis2=-1)), axis=-1)
    return (vals[0] if single else vals), sweeps


def hermitian_eigenvalues(a) -> list[float]:
    """All eigenvalues of a Hermitian matrix in ascending order.

    Raises NotHermitian when ``a`` differs from its adjoint by more than 1e-12
    in any entry.
    """
    a = as_algebra(a)
    defect = hermitian_defect(a)
    if defect > 1e-12:
        raise NotHermitian(f"max |a - a*| = {defect:.3e} exceeds 1e-12")
    if a.shape[0] == 1:
        return [float(a[0, 0].real)]
    vals, _ = jacobi_eigenvalues(a)
    return [float(v) for v in vals]


def operator_norm(a) -> float:
    """C*-norm of a matrix: sqrt of the top eigenvalue of a* a."""
    a = as_algebra(a)
    if a.shape[0] == 1:
        return float(abs(a[0, 0]))
    vals, _ = jacobi_eigenvalues(adjoint(a) @ a)
    return math.sqrt(max(float(vals[-1]), 0.0))


def operator_norms(a: np.ndarray) -> np.ndarray:
    """operator_norm over a stack of matrices with shape (..., k, k)."""
    a = np.asarray(a, dtype=complex)
    lead = a.shape[:-2]
    if a.shape[-1] == 1:
        return np.abs(a[..., 0, 0])
    flat = a.reshape((-1,) + a.shape[-2:])
    if flat.shape[0] == 0:
        return np.zeros(lead)
    vals, _ = jacobi_eigenvalues(adjoint(flat) @ flat)
    return np.sqrt(np.maximum(vals[:, -1], 0.0)).reshape(lead)


def is_positive(a, tol: float = 1e-12) -> bool:
    a = as_algebra(a)
    if hermitian_defect(a) > tol:
        return False
    vals, _ = jacobi_eigenvalues(a)
    return bool(vals[0] >= -tol)


def min_eigenvalue(a) -> float:
    vals, _ = jacobi_eigenvalues(as_algebra(a))
    return float(vals[0])
