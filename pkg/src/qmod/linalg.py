"""Dense complex linear algebra helpers: numerical rank, null spaces, spans.

All rank decisions go through :func:`rank_threshold`, the usual
``max(m, n) * eps * sigma_max`` convention, unless a caller passes an
explicit tolerance.
"""

from __future__ import annotations

import numpy as np

EPS = np.finfo(float).eps


def rank_threshold(s: np.ndarray, shape: tuple[int, int]) -> float:
    if s.size == 0:
        return 0.0
    return max(shape) * EPS * float(s[0])


def null_space(a: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Orthonormal basis (as columns) of the kernel of ``a``."""
    a = np.asarray(a, dtype=complex)
    m, n = a.shape
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    if m == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    if tol is None:
        tol = rank_threshold(s, a.shape)
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


def numerical_rank(a: np.ndarray, tol: float | None = None) -> int:
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if tol is None:
        tol = rank_threshold(s, a.shape)
    return int(np.sum(s > tol))


def orth(b: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Orthonormal basis of the column span of ``b`` (rank revealing)."""
    b = np.asarray(b, dtype=complex)
    n, k = b.shape
    if k == 0 or n == 0:
        return np.zeros((n, 0), dtype=complex)
    u, s, _ = np.linalg.svd(b, full_matrices=False)
    if tol is None:
        tol = rank_threshold(s, b.shape)
    return u[:, : int(np.sum(s > tol))]


def complement(w: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the span of ``w``.

    ``w`` must already have orthonormal columns.
    """
    n, k = w.shape
    if k == 0:
        return np.eye(n, dtype=complex)
    if k == n:
        return np.zeros((n, 0), dtype=complex)
    u, _, _ = np.linalg.svd(w, full_matrices=True)
    return u[:, k:]


def projector(w: np.ndarray) -> np.ndarray:
    return w @ w.conj().T


def expm_hermitian(y: np.ndarray, t: float = 1.0) -> np.ndarray:
    """``exp(t * y)`` for Hermitian ``y`` via its spectral decomposition."""
    if y.shape[0] == 0:
        return np.zeros((0, 0), dtype=complex)
    w, u = np.linalg.eigh(y)
    return (u * np.exp(t * w)) @ u.conj().T


def principal_angle_gap(a: np.ndarray, b: np.ndarray) -> float:
    """Largest principal-angle sine between two spans; 1.0 if dimensions differ."""
    if a.shape[1] != b.shape[1]:
        return 1.0
    if a.shape[1] == 0:
        return 0.0
    qa, qb = orth(a), orth(b)
    if qa.shape[1] != qb.shape[1]:
        return 1.0
    c = np.linalg.svd(qa.conj().T @ qb, compute_uv=False)
    return float(np.sqrt(max(0.0, 1.0 - float(np.min(c)) ** 2)))


def cluster_values(values: np.ndarray, tol: float) -> list[list[int]]:
    """Group indices of real ``values`` whose sorted neighbours differ by <= tol."""
    order = np.argsort(values)
    groups: list[list[int]] = []
    last = None
    for i in order:
        if last is None or values[i] - last > tol:
            groups.append([int(i)])
        else:
            groups[-1].append(int(i))
        last = values[i]
    return groups
