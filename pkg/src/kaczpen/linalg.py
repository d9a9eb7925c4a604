"""Dense linear algebra kernels used by the row-action solvers.

Vectors are 1-d float64 numpy arrays.  Matrices are wrapped in
:class:`DenseMatrix`, which freezes the entries and caches the squared
row norms that the samplers and step rules consume on every iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ConvergenceError(Exception):
    """An iterative routine hit its sweep cap before reaching tolerance."""


class InconsistentSystemError(Exception):
    """The equality system has no solution at the working tolerance."""


def as_vector(x, n: int | None = None) -> np.ndarray:
    """Coerce x to a finite 1-d float64 array, optionally of length n."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise ValueError(f"expected length {n}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


class DenseMatrix:
    """Immutable dense matrix with cached row geometry.

    Attributes
    ----------
    data : (m, n) read-only float64 array
    row_norms_sq : (m,) array, row_norms_sq[i] = sum_j data[i, j]**2
    frobenius_sq : float, sum of row_norms_sq
    """

    def __init__(self, entries):
        a = np.array(entries, dtype=np.float64, order="C")
        if a.ndim != 2:
            raise ValueError(f"expected a 2-d array, got shape {a.shape}")
        m, n = a.shape
        if m < 1 or n < 1:
            raise ValueError("matrix must have at least one row and column")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix has non-finite entries")
        a.flags.writeable = False
        self.data = a
        self.rows = m
        self.cols = n
        rn = (a * a).sum(axis=1)
        rn.flags.writeable = False
        self.row_norms_sq = rn
        self.frobenius_sq = float(rn.sum())

    def row(self, i: int) -> np.ndarray:
        if not 0 <= i < self.rows:
            raise ValueError(f"row index {i} out of range for {self.rows} rows")
        return self.data[i]

    @property
    def shape(self):
        return self.data.shape

    def transpose(self) -> "DenseMatrix":
        return DenseMatrix(self.data.T)

    def __repr__(self):
        return f"DenseMatrix({self.rows}x{self.cols})"


def matvec(a: DenseMatrix, x) -> np.ndarray:
    """Product a @ x with dimension checking."""
    x = as_vector(x, a.cols)
    return a.data @ x


def row_dot(a: DenseMatrix, i: int, x) -> float:
    """Inner product of row i with x."""
    x = as_vector(x, a.cols)
    return float(a.row(i) @ x)


def gram_matrix(a: DenseMatrix) -> DenseMatrix:
    """A^T A with symmetry exact by construction (upper triangle mirrored)."""
    g = a.data.T @ a.data
    u = np.triu(g)
    return DenseMatrix(u + np.triu(g, 1).T)


@dataclass(frozen=True)
class EigenResult:
    """Eigenvalues in ascending order, eigenvectors as matching columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


# Relative thresholds shared by the symmetric eigensolver and the
# pseudo-inverse built on top of it.
_JACOBI_OFF_TOL = 1e-12
_JACOBI_MAX_SWEEPS = 100
_JACOBI_MAX_N = 2000
_PINV_REL_TOL = 1e-10


def jacobi_eigen_sym(g: DenseMatrix) -> EigenResult:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps rotate every (p, q) pair in row order until every off-diagonal
    magnitude falls at or below 1e-12 * ||G||_F, with a hard cap of 100
    sweeps.  Matrices larger than 2000x2000 are refused, as is any input
    whose asymmetry exceeds 1e-12 * ||G||_F.
    """
    if g.rows != g.cols:
        raise ValueError(f"expected a square matrix, got {g.rows}x{g.cols}")
    n = g.rows
    if n > _JACOBI_MAX_N:
        raise ValueError(f"matrix order {n} exceeds the {_JACOBI_MAX_N} cap")
    fro = float(np.sqrt(g.frobenius_sq))
    sym_gap = float(np.abs(g.data - g.data.T).max())
    if sym_gap > _JACOBI_OFF_TOL * fro:
        raise ValueError(f"matrix is not symmetric (gap {sym_gap:.3e})")

    a = np.array(g.data, dtype=np.float64)
    v = np.eye(n)
    off_tol = _JACOBI_OFF_TOL * fro
    converged = False
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = float(np.abs(np.triu(a, 1)).max()) if n > 1 else 0.0
        if off <= off_tol:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= off_tol:
                    continue
                # classic 2x2 symmetric Schur rotation, smaller root for t
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        converged = False
    if not converged:
        off = float(np.abs(np.triu(a, 1)).max())
        raise ConvergenceError(
            f"jacobi sweeps exhausted with off-diagonal {off:.3e} > {off_tol:.3e}"
        )
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return EigenResult(eigenvalues=w[order], eigenvectors=v[:, order])


def lambda_min_variants(a: DenseMatrix) -> tuple[float, float]:
    """Smallest eigenvalue of A^T A, plain and restricted to positives.

    Returns (lambda_min, lambda_min_pos) where lambda_min is clamped to 0
    when it sits within 1e-10 * ||A^T A||_F of 0, and lambda_min_pos is
    the smallest eigenvalue above that threshold (0 if there is none).
    """
    g = gram_matrix(a)
    eig = jacobi_eigen_sym(g)
    w = eig.eigenvalues
    thresh = _PINV_REL_TOL * float(np.sqrt(g.frobenius_sq))
    lam_min = float(w[0])
    if abs(lam_min) <= thresh:
        lam_min = 0.0
    above = w[w > thresh]
    lam_pos = float(above[0]) if above.size else 0.0
    return lam_min, lam_pos


def _pinv_apply(g: DenseMatrix, r: np.ndarray) -> np.ndarray:
    """G^+ r for symmetric positive semidefinite G via its eigenbasis."""
    eig = jacobi_eigen_sym(g)
    thresh = _PINV_REL_TOL * float(np.sqrt(g.frobenius_sq))
    w = eig.eigenvalues
    inv = np.where(np.abs(w) > thresh, 1.0 / np.where(w == 0.0, 1.0, w), 0.0)
    vt_r = eig.eigenvectors.T @ r
    return eig.eigenvectors @ (inv * vt_r)


def least_norm_solution(a: DenseMatrix, b, x0) -> np.ndarray:
    """Solution of Ax = b closest to x0.

    Computes x0 - A^T (A A^T)^+ (A x0 - b), with the pseudo-inverse taken
    through the symmetric eigensolver.  Raises InconsistentSystemError when
    the residual check ||A x - b||_inf <= 1e-8 * (1 + ||b||_inf) fails.
    """
    b = as_vector(b, a.rows)
    x0 = as_vector(x0, a.cols)
    gt = DenseMatrix(a.data @ a.data.T)
    # mirror the upper triangle so the eigensolver sees exact symmetry
    u = np.triu(gt.data)
    gt = DenseMatrix(u + np.triu(gt.data, 1).T)
    r0 = a.data @ x0 - b
    y = _pinv_apply(gt, r0)
    x = x0 - a.data.T @ y
    resid = float(np.abs(a.data @ x - b).max())
    if resid > 1e-8 * (1.0 + float(np.abs(b).max())):
        raise InconsistentSystemError(
            f"system residual {resid:.3e} exceeds tolerance; no solution found"
        )
    return x
