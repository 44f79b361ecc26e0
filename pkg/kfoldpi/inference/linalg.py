"""Dense linear algebra helpers: validated float64 matrices, Cholesky, products"""

import numpy as np
import numpy.typing as npt

from kfoldpi.exceptions import DimensionMismatch, NotPositiveDefinite

# Row-major 2-D float64 array with finite entries
DenseMatrix = npt.NDArray[np.float64]

PIVOT_TOLERANCE = 1e-12
SYMMETRY_TOLERANCE = 1e-12


def as_dense_matrix(a) -> DenseMatrix:
    """Convert ``a`` to a C-contiguous float64 matrix and check its invariants

    Raises
    ------

    DimensionMismatch
        ``a`` is not two dimensional or has an empty dimension
    ValueError
        ``a`` contains NaN or infinite entries
    """
    matrix = np.ascontiguousarray(a, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise DimensionMismatch(
            f"Expected a matrix with positive rows and columns, got shape {matrix.shape}."
        )
    if not np.all(np.isfinite(matrix)):
        raise ValueError("Matrix entries must all be finite.")
    return matrix


def cholesky_lower(a) -> DenseMatrix:
    """Lower-triangular Cholesky factor ``L`` with ``L @ L.T == a``

    Parameters
    ----------

    a : array-like
        Square, symmetric (within 1e-12) positive-definite matrix.

    Returns
    -------

    DenseMatrix
        The lower-triangular factor.

    Raises
    ------

    DimensionMismatch
        ``a`` is not square
    ValueError
        ``a`` is not symmetric
    NotPositiveDefinite
        A pivot is at or below 1e-12; the exception carries the pivot index
    """
    a = as_dense_matrix(a)
    rows, cols = a.shape
    if rows != cols:
        raise DimensionMismatch(f"Cholesky needs a square matrix, got shape {a.shape}.")
    if np.max(np.abs(a - a.T)) > SYMMETRY_TOLERANCE:
        raise ValueError("Cholesky needs a symmetric matrix.")

    try:
        lower = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        pivot, value = _first_failing_pivot(a)
        raise NotPositiveDefinite(pivot, value) from None

    # LAPACK only rejects pivots <= 0; tighten to the documented tolerance
    pivots = np.diag(lower) ** 2
    small = np.flatnonzero(pivots <= PIVOT_TOLERANCE)
    if small.size:
        raise NotPositiveDefinite(int(small[0]), float(pivots[small[0]]))
    return lower


def _first_failing_pivot(a: DenseMatrix):
    """Locate the first pivot of the factorization that is not safely positive"""
    n = a.shape[0]
    lower = np.zeros_like(a)
    for j in range(n):
        pivot = a[j, j] - np.dot(lower[j, :j], lower[j, :j])
        if pivot <= PIVOT_TOLERANCE:
            return j, float(pivot)
        lower[j, j] = np.sqrt(pivot)
        lower[j + 1 :, j] = (a[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]) / lower[j, j]
    # LAPACK rejected what the reference loop accepts; blame the last pivot
    return n - 1, float(lower[n - 1, n - 1] ** 2)


def matvec(a, x) -> np.ndarray:
    """Matrix-vector product ``a @ x``

    Raises
    ------

    DimensionMismatch
        ``a.cols`` differs from the length of ``x``
    """
    a = np.asarray(a, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if a.ndim != 2 or x.ndim != 1 or a.shape[1] != x.shape[0]:
        raise DimensionMismatch(
            f"Cannot multiply a matrix of shape {a.shape} with a vector of shape {x.shape}."
        )
    return a @ x


def correlate_rows(lower: DenseMatrix, z: np.ndarray) -> np.ndarray:
    """Apply ``lower`` to every row of ``z``, i.e. return the rows ``lower @ z_i``

    With ``z`` i.i.d. standard normal and ``lower`` the Cholesky factor of ``sigma``,
    the returned rows are distributed as ``N(0, sigma)``.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or z.shape[1] != lower.shape[1]:
        raise DimensionMismatch(
            f"Rows of length {lower.shape[1]} expected, got an array of shape {z.shape}."
        )
    return z @ lower.T
