"""Small dense symmetric eigenvalues."""

from __future__ import annotations

import math

import numpy as np


def _check_symmetric(G: np.ndarray, tol: float) -> np.ndarray:
    G = np.array(G, dtype=np.float64)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {G.shape}")
    if not np.all(np.isfinite(G)):
        raise ValueError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(G)))) if G.size else 1.0
    if np.max(np.abs(G - G.T), initial=0.0) > tol * scale:
        raise ValueError("matrix is not symmetric")
    return 0.5 * (G + G.T)


def eig2_sym(G) -> tuple[float, float]:
    """Eigenvalues (smaller first) of a symmetric 2x2 matrix from trace and determinant."""
    a, b, d = float(G[0][0]), float(G[0][1]), float(G[1][1])
    half_tr = 0.5 * (a + d)
    disc = math.hypot(0.5 * (a - d), b)
    return half_tr - disc, half_tr + disc


def jacobi_eigenvalues(G, tol: float = 1e-12, max_sweeps: int = 100, sym_tol: float = 1e-12) -> np.ndarray:
    """All eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps stop once the off-diagonal Frobenius norm is at most ``tol`` times
    ``max(1, ||G||_F)``.
    """
    A = _check_symmetric(G, sym_tol)
    p = A.shape[0]
    if p == 0:
        return np.empty(0)
    target = tol * max(1.0, float(np.linalg.norm(A)))
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(A**2) - np.sum(np.diag(A) ** 2)))
        if off <= target:
            break
        for i in range(p - 1):
            for j in range(i + 1, p):
                aij = A[i, j]
                if aij == 0.0:
                    continue
                # rotation angle that zeroes A[i, j] (Golub & Van Loan, sym.schur2)
                theta = (A[j, j] - A[i, i]) / (2.0 * aij)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                Ai = A[:, i].copy()
                Aj = A[:, j].copy()
                A[:, i] = c * Ai - s * Aj
                A[:, j] = s * Ai + c * Aj
                Ai = A[i, :].copy()
                Aj = A[j, :].copy()
                A[i, :] = c * Ai - s * Aj
                A[j, :] = s * Ai + c * Aj
                A[i, j] = A[j, i] = 0.0
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    return np.sort(np.diag(A))


def min_eigen_sym(G, tol: float = 1e-12) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    return float(jacobi_eigenvalues(G, tol=tol)[0])
