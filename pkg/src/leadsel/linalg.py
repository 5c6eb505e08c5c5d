"""Dense matrix kernel for grounded Laplacian inverses.

Matrices are plain ``numpy.ndarray`` values of dtype float64. Every function
here is pure: inputs are never modified.

The two non-standard routines are

* :func:`pinv_laplacian` / :func:`ground_from_pinv`, which produce the inverse
  of a Laplacian with one row/column deleted from the Laplacian's
  pseudo-inverse in O(n^2) per deleted index, and
* :func:`woodbury_remove`, which deletes one row/column from a matrix whose
  inverse is already known, via a rank-2 Woodbury update in O(l^2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

PIVOT_RTOL = 1e-12
CAPACITANCE_TOL = 1e-12


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when a matrix (or a requested row/column removal) is singular."""


def as_matrix(a, square: bool = True) -> np.ndarray:
    """Coerce ``a`` to a finite float64 2-D array."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _check_index(dim: int, m: int) -> int:
    if not 0 <= m < dim:
        raise IndexError(f"index {m} out of range for dimension {dim}")
    return int(m)


def trace(a) -> float:
    a = as_matrix(a)
    return float(np.trace(a))


def invert(a) -> np.ndarray:
    """Direct inverse through an LU factorization with partial pivoting.

    Raises :class:`SingularMatrixError` if any pivot is smaller than
    ``PIVOT_RTOL`` times the largest absolute entry of ``a``.
    """
    a = as_matrix(a)
    n = a.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    with warnings.catch_warnings():
        # exact-zero pivots are reported below as SingularMatrixError
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    scale = np.max(np.abs(a))
    if scale == 0.0 or np.min(np.abs(np.diag(lu))) <= PIVOT_RTOL * scale:
        raise SingularMatrixError("matrix is singular to working precision")
    return scipy.linalg.lu_solve((lu, piv), np.eye(n), check_finite=False)


def delete_row_col(a, m: int) -> np.ndarray:
    """Return ``a`` without row and column ``m``; remaining order is kept."""
    a = as_matrix(a)
    m = _check_index(a.shape[0], m)
    keep = np.r_[0:m, m + 1 : a.shape[0]]
    return a[np.ix_(keep, keep)]


def swap_to_last(dim: int, m: int) -> np.ndarray:
    """Permutation exchanging index ``m`` with the last index.

    The result is its own inverse. ``perm[:-1]`` lists, for each surviving
    position after truncation, the original index it came from.
    """
    m = _check_index(dim, m)
    perm = np.arange(dim)
    perm[m], perm[-1] = perm[-1], perm[m]
    return perm


def pinv_laplacian(l_mat, n: int | None = None) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a connected graph's Laplacian.

    Uses the rank-one shift ``(L + J/n)^-1 - J/n`` with ``J`` the all-ones
    matrix. The shifted matrix is singular exactly when the graph is
    disconnected, in which case :class:`SingularMatrixError` propagates.
    """
    l_mat = as_matrix(l_mat)
    if n is None:
        n = l_mat.shape[0]
    if n != l_mat.shape[0]:
        raise ValueError(f"dimension {n} does not match matrix shape {l_mat.shape}")
    shift = 1.0 / n
    return invert(l_mat + shift) - shift


def ground_from_pinv(l_pinv, m: int) -> np.ndarray:
    """Inverse of the Laplacian with row/column ``m`` deleted, from ``L^+``.

    Entry ``(x, y)`` of the result is ``P[x,y] - P[x,m] - P[m,y] + P[m,m]``
    for surviving ``x, y``. Rows and columns follow the same stable order as
    :func:`delete_row_col`.
    """
    p = as_matrix(l_pinv)
    m = _check_index(p.shape[0], m)
    keep = np.r_[0:m, m + 1 : p.shape[0]]
    col = p[keep, m]
    row = p[m, keep]
    return p[np.ix_(keep, keep)] - col[:, None] - row[None, :] + p[m, m]


def ground_trace_from_pinv(l_pinv, m: int) -> float:
    """Trace of :func:`ground_from_pinv` without building the matrix."""
    p = as_matrix(l_pinv)
    m = _check_index(p.shape[0], m)
    d = np.diag(p)
    l = p.shape[0] - 1
    return float(np.sum(d) - d[m] - 2.0 * (np.sum(p[:, m]) - p[m, m]) + l * p[m, m])


@dataclass(frozen=True)
class WoodburyUpdate:
    """Rank-2 update ``U @ V.T`` that isolates the last row/column.

    ``A' + U @ V.T`` equals ``A'`` with its last row and column zeroed,
    except for the corner entry ``corner``. ``A'`` is ``A`` with index
    ``removed_index`` swapped to the last position.
    """

    u_factor: np.ndarray
    v_factor: np.ndarray
    corner: float
    removed_index: int
    perm: np.ndarray


def woodbury_factors(a, m: int) -> WoodburyUpdate:
    a = as_matrix(a)
    return _factors(a, _check_index(a.shape[0], m))


def _factors(a: np.ndarray, m: int) -> WoodburyUpdate:
    dim = a.shape[0]
    perm = swap_to_last(dim, m)
    col = a[:, m].copy()
    row = a[m, :].copy()
    # reorder into A' coordinates: last column / last row of A'
    col[m], col[-1] = col[-1], col[m]
    row[m], row[-1] = row[-1], row[m]
    corner = float(a[m, m])
    col[-1] -= corner
    row[-1] -= corner
    e_last = np.zeros(dim)
    e_last[-1] = 1.0
    u = np.column_stack([-e_last, -col])
    v = np.column_stack([row, e_last])
    return WoodburyUpdate(u, v, corner, int(m), perm)


def _woodbury_pieces(a_inv: np.ndarray, a: np.ndarray, m: int):
    """Returns ``(A'^-1, A'^-1 U, C^-1, V^T A'^-1, perm)``; C is the capacitance."""
    upd = _factors(a, m)
    perm = upd.perm
    a_inv_p = a_inv[np.ix_(perm, perm)]
    left = a_inv_p @ upd.u_factor  # l x 2
    right = upd.v_factor.T @ a_inv_p  # 2 x l
    cap = np.eye(2) + upd.v_factor.T @ left
    scale = max(1.0, float(np.max(np.abs(cap))))
    if abs(np.linalg.det(cap)) <= CAPACITANCE_TOL * scale * scale:
        raise SingularMatrixError("removal makes matrix singular")
    return a_inv_p, left, np.linalg.inv(cap), right, perm


def woodbury_remove(a_inv, a, m: int) -> np.ndarray:
    """Inverse of ``a`` with row/column ``m`` removed, updated from ``a_inv``.

    Steps: swap ``m`` to the last position, apply the rank-2 update from
    :func:`woodbury_factors` through the Woodbury identity, drop the last
    row/column, then restore the stable ordering of the survivors.
    """
    a_inv = as_matrix(a_inv)
    a = as_matrix(a)
    if a.shape != a_inv.shape:
        raise ValueError("matrix and inverse shapes differ")
    m = _check_index(a.shape[0], m)
    a_inv_p, left, cap_inv, right, perm = _woodbury_pieces(a_inv, a, m)
    b_inv = a_inv_p - left @ cap_inv @ right
    survivors = perm[:-1]
    order = np.argsort(survivors, kind="stable")
    return b_inv[np.ix_(order, order)]


def woodbury_remove_trace(a_inv, a, m: int) -> float:
    """Trace of :func:`woodbury_remove` without forming the l x l result.

    ``tr(B^-1) = tr(A'^-1) - tr(C^-1 (V^T A'^-1)(A'^-1 U))``; the corner term
    ``1/a_ll`` is then subtracted to drop the truncated entry. Cost is two
    matrix-vector products per factor column.
    """
    a_inv = np.asarray(a_inv, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    upd = _factors(a, _check_index(a.shape[0], m))
    perm = upd.perm
    # A'^-1 U and V^T A'^-1 via the unpermuted inverse
    u = np.empty_like(upd.u_factor)
    u[perm] = upd.u_factor
    v = np.empty_like(upd.v_factor)
    v[perm] = upd.v_factor
    left = a_inv @ u
    right = v.T @ a_inv
    cap = np.eye(2) + v.T @ left
    scale = max(1.0, float(np.max(np.abs(cap))))
    if abs(np.linalg.det(cap)) <= CAPACITANCE_TOL * scale * scale:
        raise SingularMatrixError("removal makes matrix singular")
    correction = np.trace(np.linalg.solve(cap, right @ left))
    return float(np.trace(a_inv) - correction - 1.0 / upd.corner)


def format_matrix(a, fmt: str = "{:.12g}") -> str:
    """Row-per-line text rendering used for debugging fixtures."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    return "\n".join(" ".join(fmt.format(x) for x in row) for row in a)
