"""Symmetric eigensolvers and the canonical eigenbasis used by the Laplacian tokenizer."""
import logging
import math
from typing import Optional, Tuple

import numpy as np

import config
from graphs.graph_core import Graph

logger = logging.getLogger(__name__)

SOLVERS = ('lapack', 'jacobi')
_PICK_TOL = 1e-6  # residual norm below which a projector column adds nothing new


def laplacian_matrix(g: Graph) -> np.ndarray:
    """L = D - A for an undirected graph."""
    if g.directed:
        raise ValueError("The Laplacian tokenizer needs an undirected graph")
    adj = g.adj.astype(np.float64)
    return np.diag(adj.sum(axis=1)) - adj


def jacobi_eigh(M: np.ndarray, tol: Optional[float] = None, max_sweeps: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Sweeps every (p, q) pair with the rotation that zeroes M[p, q] until the off-diagonal
    Frobenius mass drops below tol (scaled by the matrix norm when it exceeds 1).

    Args:
        M: Symmetric matrix
        tol: Convergence threshold (config.JACOBI_TOL by default)
        max_sweeps: Sweep budget (config.JACOBI_MAX_SWEEPS by default)

    Returns:
        (eigenvalues ascending, eigenvectors as columns)
    """
    tol = config.JACOBI_TOL if tol is None else tol
    max_sweeps = config.JACOBI_MAX_SWEEPS if max_sweeps is None else max_sweeps
    A = np.array(M, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"Jacobi needs a square matrix, got shape {A.shape}")
    if not np.allclose(A, A.T, atol=1e-12):
        raise ValueError("Jacobi needs a symmetric matrix")
    n = A.shape[0]
    V = np.eye(n)
    threshold = tol * max(1.0, float(np.linalg.norm(A)))

    for sweep in range(max_sweeps):
        off = math.sqrt(max(float(np.sum(A * A) - np.sum(np.diag(A) ** 2)), 0.0))
        if off < threshold:
            logger.debug("jacobi converged after %d sweeps (off=%.2e)", sweep, off)
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = A[:, p].copy(), A[:, q].copy()
                A[:, p], A[:, q] = c * col_p - s * col_q, s * col_p + c * col_q
                row_p, row_q = A[p, :].copy(), A[q, :].copy()
                A[p, :], A[q, :] = c * row_p - s * row_q, s * row_p + c * row_q
                vec_p, vec_q = V[:, p].copy(), V[:, q].copy()
                V[:, p], V[:, q] = c * vec_p - s * vec_q, s * vec_p + c * vec_q
    else:
        raise ArithmeticError(f"Jacobi did not converge within {max_sweeps} sweeps")

    values = np.diag(A).copy()
    order = np.argsort(values, kind='stable')
    return values[order], V[:, order]


def _fix_sign(v: np.ndarray) -> np.ndarray:
    nonzero = np.flatnonzero(np.abs(v) > 1e-8)
    if nonzero.size and v[nonzero[0]] < 0:
        return -v
    return v


def canonical_eigenbasis(values: np.ndarray, vectors: np.ndarray, tol: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Solver-independent eigenvectors.

    Eigenvalues within tol of a cluster's first value share one eigenspace. Its basis is
    rebuilt by Gram-Schmidt over the columns of the spectral projector in node order, so
    the result depends only on the eigenspace. Every vector's first nonzero entry is positive.

    Args:
        values: Eigenvalues
        vectors: Matching eigenvectors as columns
        tol: Degeneracy tolerance (config.EIGEN_CLUSTER_TOL by default)

    Returns:
        (eigenvalues ascending, canonical eigenvectors as columns)
    """
    tol = config.EIGEN_CLUSTER_TOL if tol is None else tol
    order = np.argsort(values, kind='stable')
    values = np.asarray(values, dtype=np.float64)[order]
    vectors = np.asarray(vectors, dtype=np.float64)[:, order]
    n = values.shape[0]
    out = np.zeros_like(vectors)

    start = 0
    while start < n:
        stop = start + 1
        while stop < n and values[stop] - values[start] <= tol:
            stop += 1
        size = stop - start
        if size == 1:
            out[:, start] = _fix_sign(vectors[:, start])
        else:
            block = vectors[:, start:stop]
            projector = block @ block.T
            basis = []
            for col in range(projector.shape[1]):
                w = projector[:, col].copy()
                for b in basis:
                    w -= (b @ w) * b
                norm = np.linalg.norm(w)
                if norm > _PICK_TOL:
                    basis.append(w / norm)
                if len(basis) == size:
                    break
            if len(basis) < size:
                raise ArithmeticError(f"Could not rebuild a {size}-dim eigenspace at {values[start]:.3e}")
            for offset, b in enumerate(basis):
                out[:, start + offset] = _fix_sign(b)
        start = stop
    return values, out


def laplacian_eigenpairs(g: Graph, solver: Optional[str] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Canonical eigenpairs of L = D - A, eigenvalues ascending."""
    solver = config.LAPLACIAN_SOLVER if solver is None else solver
    if solver not in SOLVERS:
        raise ValueError(f"Unknown eigensolver '{solver}'. Choose from {SOLVERS}")
    L = laplacian_matrix(g)
    if solver == 'jacobi':
        values, vectors = jacobi_eigh(L)
    else:
        values, vectors = np.linalg.eigh(L)
    return canonical_eigenbasis(values, vectors)
