"""Thomas algorithm for tridiagonal systems."""

import numpy as np
from numba import njit

from .errors import DimensionMismatch, LinearSolveFailure


@njit(cache=True)
def _thomas(lower, diag, upper, rhs, out):
    # Returns the row of the first zero pivot, or -1 on success.
    n = diag.shape[0]
    c = np.empty(n)
    d = np.empty(n)
    pivot = diag[0]
    if pivot == 0.0:
        return 0
    c[0] = upper[0] / pivot if n > 1 else 0.0
    d[0] = rhs[0] / pivot
    for i in range(1, n):
        pivot = diag[i] - lower[i - 1] * c[i - 1]
        if pivot == 0.0:
            return i
        if i < n - 1:
            c[i] = upper[i] / pivot
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / pivot
    out[n - 1] = d[n - 1]
    for i in range(n - 2, -1, -1):
        out[i] = d[i] - c[i] * out[i + 1]
    return -1


def solve_tridiagonal(lower, diag, upper, rhs):
    """Solve a tridiagonal system by forward elimination and back substitution.

    Parameters
    ----------
    lower : array_like, length n - 1
        Sub-diagonal, ``lower[i]`` sits in row i + 1.
    diag : array_like, length n
        Main diagonal.
    upper : array_like, length n - 1
        Super-diagonal, ``upper[i]`` sits in row i.
    rhs : array_like, length n

    No pivoting is done, so the system should be diagonally dominant (or
    otherwise safe for elimination in natural order).  A zero pivot raises
    :class:`LinearSolveFailure`.
    """
    diag = np.ascontiguousarray(diag, dtype=float)
    lower = np.ascontiguousarray(lower, dtype=float)
    upper = np.ascontiguousarray(upper, dtype=float)
    rhs = np.ascontiguousarray(rhs, dtype=float)
    n = diag.shape[0]
    if n == 0 or rhs.shape != (n,) or lower.shape != (n - 1,) or upper.shape != (n - 1,):
        raise DimensionMismatch(
            f"inconsistent tridiagonal shapes: lower {lower.shape}, diag {diag.shape}, "
            f"upper {upper.shape}, rhs {rhs.shape}")
    out = np.empty(n)
    bad = _thomas(lower, diag, upper, rhs, out)
    if bad >= 0:
        raise LinearSolveFailure(f"zero pivot in row {bad}")
    if not np.all(np.isfinite(out)):
        raise LinearSolveFailure("elimination produced non-finite values")
    return out


@njit(cache=True)
def _thomas_rows(lower, diag, upper, rhs, out):
    # Row-wise batch of independent systems; returns (row, pivot index) of
    # the first failure or (-1, -1).
    for r in range(diag.shape[0]):
        bad = _thomas(lower[r], diag[r], upper[r], rhs[r], out[r])
        if bad >= 0:
            return r, bad
    return -1, -1


def solve_tridiagonal_rows(lower, diag, upper, rhs):
    """Solve one independent tridiagonal system per row of 2-D inputs.

    Shapes are (m, n - 1), (m, n), (m, n - 1), (m, n).  Rows are solved in
    order and independently, so results are identical to calling
    :func:`solve_tridiagonal` row by row.
    """
    out = np.empty_like(rhs)
    row, bad = _thomas_rows(lower, diag, upper, rhs, out)
    if row >= 0:
        raise LinearSolveFailure(f"zero pivot in row {bad} of system {row}")
    if not np.all(np.isfinite(out)):
        raise LinearSolveFailure("elimination produced non-finite values")
    return out
