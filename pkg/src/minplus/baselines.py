"""Classical low-rank baselines: truncated SVD and non-negative matrix
factorization.

Both are self-contained dense implementations sized for desk-scale
matrices (hundreds of rows): the SVD orthogonalizes column pairs with
one-sided Jacobi rotations, and the NNMF runs seeded multiplicative
updates for the Frobenius objective.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

SVD_MAX_SWEEPS = 60
SVD_PAIR_TOL = 1e-15
NNMF_EPS = 1e-12


@dataclass
class SvdResult:
    """Economy factorization M = U diag(s) V^T with orthonormal columns.

    U is n x r and V is d x r with r = min(n, d); singular values are
    sorted non-increasing. Columns of U belonging to zero singular values
    are completed to an orthonormal set.
    """

    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray


@dataclass
class NnmfResult:
    """Non-negative factors W (n x m), H (m x d) and the residual history."""

    W: np.ndarray
    H: np.ndarray
    residual_trace: tuple[float, ...]


def _orthonormal_complete(u: np.ndarray, missing: list[int]) -> None:
    """Fill the listed columns of u with unit vectors orthogonal to the rest.

    Modified Gram-Schmidt against all currently valid columns, run twice
    for stability; candidates are standard basis vectors.
    """
    n = u.shape[0]
    filled = [k for k in range(u.shape[1]) if k not in missing]
    for k in missing:
        for cand in range(n):
            v = np.zeros(n)
            v[cand] = 1.0
            for _ in range(2):
                for idx in filled:
                    v -= (u[:, idx] @ v) * u[:, idx]
            norm = float(np.linalg.norm(v))
            if norm > 1e-8:
                u[:, k] = v / norm
                filled.append(k)
                break
        else:  # pragma: no cover - n candidates always contain a free direction
            raise RuntimeError("failed to complete the orthonormal basis")


def svd(M) -> SvdResult:
    """Full economy SVD by one-sided Jacobi orthogonalization.

    Column pairs are rotated until all are mutually orthogonal; column
    norms are then the singular values. Wide matrices are handled by
    factorizing the transpose and swapping the vector sets.
    """
    m_mat = np.asarray(M, dtype=float)
    if m_mat.ndim != 2:
        raise DomainError("svd expects a 2-d matrix")
    if not np.isfinite(m_mat).all():
        raise DomainError("svd expects finite entries")
    n, d = m_mat.shape
    if n < d:
        flipped = svd(m_mat.T)
        return SvdResult(
            singular_values=flipped.singular_values,
            left_vectors=flipped.right_vectors,
            right_vectors=flipped.left_vectors,
        )

    b = m_mat.astype(float).copy()
    v = np.eye(d)
    for _ in range(SVD_MAX_SWEEPS):
        rotated = False
        for p in range(d - 1):
            for q in range(p + 1, d):
                app = float(b[:, p] @ b[:, p])
                aqq = float(b[:, q] @ b[:, q])
                apq = float(b[:, p] @ b[:, q])
                if apq * apq <= SVD_PAIR_TOL * SVD_PAIR_TOL * app * aqq or apq == 0.0:
                    continue
                rotated = True
                tau = (aqq - app) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0.0 else 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = c * t
                bp = b[:, p].copy()
                b[:, p] = c * bp - s * b[:, q]
                b[:, q] = s * bp + c * b[:, q]
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
        if not rotated:
            break

    norms = np.sqrt(np.sum(b * b, axis=0))
    order = np.argsort(-norms, kind="stable")
    norms = norms[order]
    b = b[:, order]
    v = v[:, order]
    u = np.zeros((n, d))
    zero_tol = (norms[0] if d else 0.0) * 1e-13
    missing = []
    for k in range(d):
        if norms[k] > zero_tol and norms[k] > 0.0:
            u[:, k] = b[:, k] / norms[k]
        else:
            norms[k] = 0.0
            missing.append(k)
    if missing:
        _orthonormal_complete(u, missing)
    return SvdResult(singular_values=norms, left_vectors=u, right_vectors=v)


def svd_truncate(M, m: int) -> tuple[np.ndarray, float]:
    """Best Frobenius rank-m approximation and its relative residual.

    The residual is sqrt(sum of squared dropped singular values) divided
    by ||M||_F (0 for a zero matrix).
    """
    m_mat = np.asarray(M, dtype=float)
    r = min(m_mat.shape)
    if not (1 <= m <= r):
        raise ValueError(f"rank must lie in 1..{r}")
    result = svd(m_mat)
    u, s, v = result.left_vectors, result.singular_values, result.right_vectors
    approx = (u[:, :m] * s[:m]) @ v[:, :m].T
    norm = float(np.sqrt(np.sum(m_mat * m_mat)))
    tail = float(np.sqrt(np.sum(s[m:] ** 2)))
    return approx, (tail / norm if norm > 0.0 else 0.0)


def nnmf(M, m: int, iters: int = 2000, seed: int = 0) -> NnmfResult:
    """Multiplicative-update NNMF for the Frobenius objective.

    Factors start from seeded uniform positive noise; every update keeps
    entries at or above NNMF_EPS so zeros cannot absorb. The residual
    trace (initial value included) is non-increasing.
    """
    m_mat = np.asarray(M, dtype=float)
    if m_mat.ndim != 2:
        raise DomainError("nnmf expects a 2-d matrix")
    if not np.isfinite(m_mat).all() or (m_mat < 0).any():
        raise DomainError("nnmf expects finite non-negative entries")
    n, d = m_mat.shape
    if not (1 <= m <= min(n, d)):
        raise ValueError(f"rank must lie in 1..{min(n, d)}")
    rng = np.random.default_rng(seed)
    w = np.maximum(rng.uniform(0.0, 1.0, size=(n, m)), NNMF_EPS)
    h = np.maximum(rng.uniform(0.0, 1.0, size=(m, d)), NNMF_EPS)
    trace = [float(np.linalg.norm(m_mat - w @ h))]
    for _ in range(iters):
        h *= (w.T @ m_mat) / np.maximum(w.T @ w @ h, NNMF_EPS)
        h = np.maximum(h, NNMF_EPS)
        w *= (m_mat @ h.T) / np.maximum(w @ h @ h.T, NNMF_EPS)
        w = np.maximum(w, NNMF_EPS)
        trace.append(float(np.linalg.norm(m_mat - w @ h)))
    return NnmfResult(W=w, H=h, residual_trace=tuple(trace))
