"""Checked linear algebra used by the dynamics and constraint modules."""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

from .errors import SingularMatrix

PIVOT_TOLERANCE = 1e-10
KERNEL_TOLERANCE = 1e-10


def checked_lu(matrix: np.ndarray, exc: type = SingularMatrix):
    """LU factorization with partial pivoting and a scaled pivot check.

    Raises ``exc`` if the smallest pivot falls below ``PIVOT_TOLERANCE``
    relative to the largest, which is how near-singularity is reported
    throughout the package.
    """
    a = np.asarray(matrix, dtype=float)
    with warnings.catch_warnings():
        # Exact zero pivots are reported through the exception below.
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if pivots.size == 0:
        return lu, piv
    if pivots.min() < PIVOT_TOLERANCE * max(1.0, pivots.max()):
        raise exc(f"matrix is singular to working precision (pivots {pivots})")
    return lu, piv


def checked_solve(matrix: np.ndarray, rhs: np.ndarray, exc: type = SingularMatrix) -> np.ndarray:
    lu, piv = checked_lu(matrix, exc)
    return scipy.linalg.lu_solve((lu, piv), np.asarray(rhs, dtype=float))


def checked_inverse(matrix: np.ndarray, exc: type = SingularMatrix) -> np.ndarray:
    a = np.asarray(matrix, dtype=float)
    lu, piv = checked_lu(a, exc)
    return scipy.linalg.lu_solve((lu, piv), np.eye(a.shape[0]))


def kernel_basis(matrix: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the null space, found by singular value decomposition.

    Returns the basis as rows.  Singular values below ``KERNEL_TOLERANCE``
    times the largest count as zero; an all-zero or empty matrix yields the
    full space.
    """
    a = np.asarray(matrix, dtype=float)
    if a.size == 0:
        return np.eye(a.shape[1] if a.ndim == 2 else 0)
    _, s, vh = np.linalg.svd(a)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(a.shape[1])
    rank = int(np.sum(s > KERNEL_TOLERANCE * s[0]))
    return vh[rank:]
