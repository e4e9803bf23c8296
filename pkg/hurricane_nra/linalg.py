"""
Dense numerics: cyclic Jacobi eigensolver, pivoted-QR least squares,
correlation matrices and varimax rotation.

Matrices here are desk-sized (order <= ~30 terms, a few thousand rows).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from hurricane_nra.errors import ConvergenceError, ModelError, RankDeficiencyError
from hurricane_nra.terms import DesignMatrix

logger = logging.getLogger(__name__)

RANK_TOL = 1e-12
EIGEN_TOL = 1e-12
MAX_SWEEPS = 100


@dataclass(frozen=True)
class SymmetricMatrix:
    entries: np.ndarray
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ModelError(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ModelError("matrix has non-finite entries")
        if not np.array_equal(a, a.T):
            raise ModelError("matrix is not exactly symmetric")
        object.__setattr__(self, "entries", a)

    @property
    def order(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class EigenResult:
    values: np.ndarray
    vectors: np.ndarray
    sweeps: int


def _off_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def eigen_symmetric(A: SymmetricMatrix, tol: float = EIGEN_TOL, max_sweeps: int = MAX_SWEEPS) -> EigenResult:
    """Cyclic Jacobi: rotate away off-diagonal entries until they are below tol * ||A||_F.

    Eigenvalues come back descending; each eigenvector is signed so that its
    largest-magnitude component is positive.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = A.entries.copy()
    n = a.shape[0]
    v = np.eye(n)
    scale = float(np.linalg.norm(a))
    sweeps = 0

    while _off_norm(a) > tol * scale:
        if sweeps >= max_sweeps:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps", _off_norm(a))
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                g = 100.0 * abs(apq)
                if abs(a[p, p]) + g == abs(a[p, p]) and abs(a[q, q]) + g == abs(a[q, q]):
                    # below rounding of both diagonal entries
                    a[p, q] = a[q, p] = 0.0
                    continue
                h = a[q, q] - a[p, p]
                if abs(h) + g == abs(h):
                    t = apq / h
                else:
                    tau = h / (2.0 * apq)
                    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c

                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0

                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq

    values = np.diag(a).copy()
    order = np.argsort(-values, kind="mergesort")
    values = values[order]
    v = v[:, order]
    for j in range(n):
        k = int(np.argmax(np.abs(v[:, j])))
        if v[k, j] < 0:
            v[:, j] = -v[:, j]
    logger.debug("Jacobi converged after %d sweeps (order %d)", sweeps, n)
    return EigenResult(values=values, vectors=v, sweeps=sweeps)


@dataclass(frozen=True)
class LstsqResult:
    coefficients: np.ndarray
    residual_ss: float
    condition_estimate: float
    rank: int


def _householder_qr_pivoting(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reduce [a | b] with Householder reflections and column pivoting.

    Returns (R, Q^T b, permutation) without forming Q.
    """
    r = a.copy()
    qtb = b.copy()
    m, n = r.shape
    perm = np.arange(n)
    for k in range(min(m, n)):
        norms = np.linalg.norm(r[k:, k:], axis=0)
        j = int(np.argmax(norms)) + k
        if j != k:
            r[:, [k, j]] = r[:, [j, k]]
            perm[[k, j]] = perm[[j, k]]
        x = r[k:, k]
        norm_x = np.linalg.norm(x)
        if norm_x == 0.0:
            continue
        sign = -1.0 if x[0] >= 0 else 1.0
        u = x.copy()
        u[0] -= sign * norm_x
        u /= np.linalg.norm(u)
        r[k:, k:] -= 2.0 * np.outer(u, u @ r[k:, k:])
        qtb[k:] -= 2.0 * u * (u @ qtb[k:])
    return r, qtb, perm


def lstsq(
    X: np.ndarray,
    y: np.ndarray,
    names: Optional[Sequence[str]] = None,
    rank_tol: float = RANK_TOL,
) -> LstsqResult:
    """Minimize ||y - X a||^2 by column-equilibrated, column-pivoted Householder QR.

    Raises RankDeficiencyError when |R_kk| / |R_00| < rank_tol, naming the
    columns that fall past the numerical rank.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    names = list(names) if names is not None else [f"x{j}" for j in range(k)]
    if k < 1 or n < k:
        raise ModelError(f"least squares needs n >= k >= 1, got n={n}, k={k}")

    col_norms = np.linalg.norm(X, axis=0)
    zero = [names[j] for j in range(k) if col_norms[j] == 0.0]
    if zero:
        raise RankDeficiencyError(f"zero column(s) {zero}", zero)
    Xs = X / col_norms

    r, qtb, perm = _householder_qr_pivoting(Xs, y)
    diag = np.abs(np.diag(r)[:k])
    ratio = diag / diag[0]
    deficient = np.nonzero(ratio < rank_tol)[0]
    if deficient.size:
        rank = int(deficient[0])
        dependent = [names[perm[j]] for j in range(rank, k)]
        raise RankDeficiencyError(
            f"design matrix has numerical rank {rank} < {k}; dependent column(s) {dependent}", dependent
        )

    z = np.zeros(k)
    for i in range(k - 1, -1, -1):
        z[i] = (qtb[i] - r[i, i + 1 : k] @ z[i + 1 : k]) / r[i, i]
    coef = np.empty(k)
    coef[perm] = z
    coef = coef / col_norms

    resid = y - X @ coef
    return LstsqResult(
        coefficients=coef,
        residual_ss=float(resid @ resid),
        condition_estimate=float(diag[0] / diag[-1]),
        rank=k,
    )


def correlation_matrix(M: DesignMatrix) -> SymmetricMatrix:
    """Pearson correlations of the design-matrix columns (unit diagonal)."""
    X = M.rows
    flat = [M.names[j] for j in range(X.shape[1]) if X.shape[0] == 0 or np.ptp(X[:, j]) == 0.0]
    if flat:
        raise ModelError(f"zero-variance column(s) {flat}; drop them before correlating")
    centered = X - X.mean(axis=0)
    z = centered / np.sqrt(np.sum(centered * centered, axis=0))
    c = z.T @ z
    c = np.clip((c + c.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(c, 1.0)
    return SymmetricMatrix(c, tuple(M.names))


def varimax(loadings: np.ndarray, normalize: bool = True, max_iter: int = 500, tol: float = 1e-10) -> Tuple[np.ndarray, np.ndarray]:
    """Orthogonal varimax rotation (Kaiser normalization by default).

    Returns (rotated loadings, rotation matrix).
    """
    L = np.asarray(loadings, dtype=float).copy()
    n, m = L.shape
    if m < 2:
        return L, np.eye(m)
    h = np.ones(n)
    if normalize:
        h = np.sqrt(np.sum(L * L, axis=1))
        h[h == 0.0] = 1.0
        L = L / h[:, None]

    R = np.eye(m)
    d = 0.0
    for _ in range(max_iter):
        d_old = d
        B = L @ R
        u, s, vt = np.linalg.svd(L.T @ (B**3 - B @ np.diag(np.sum(B * B, axis=0)) / n))
        R = u @ vt
        d = float(np.sum(s))
        if d_old != 0.0 and d / d_old < 1.0 + tol:
            break

    rotated = (L @ R) * h[:, None]
    return rotated, R
