"""Numerical building blocks: whitening, leading singular pairs, PCA.

All matrices are 2-D float64 numpy arrays (row major).  Operations
validate finiteness on entry and are deterministic: two calls on the
same input return bitwise-identical output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .streams import substream

# Matrices with min(rows, cols) at or below this use a dense SVD instead
# of power iteration; tiny problems are cheap and power iteration on
# near-degenerate small Grams is the only thing that would struggle.
DENSE_FALLBACK_DIM = 32

_RANK_RTOL = 1e-10
# fixed key for the power-iteration start vector; per-shape, not per-call,
# so repeated calls on the same matrix are bitwise identical
_START_KEY = 0x720A11CE


class ConvergenceError(RuntimeError):
    """Power iteration failed to converge within the iteration budget.

    Carries the best available triple so callers that can tolerate an
    unconverged direction (e.g. estimators at subcritical signal
    strength, where the top of the spectrum is quasi-degenerate) may
    proceed with it.
    """

    def __init__(self, message: str, partial: "SingularTriple"):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class SingularTriple:
    """Leading singular pair (left, right) with its singular value."""

    left: np.ndarray
    right: np.ndarray
    value: float


def _as_matrix(m, op: str) -> np.ndarray:
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{op} expects a 2-D matrix, got shape {a.shape}")
    if a.size == 0:
        raise ValueError(f"{op} expects a non-empty matrix")
    if not np.isfinite(a).all():
        raise ValueError(f"{op}: matrix contains non-finite entries")
    return a


def _canonical_signs(left: np.ndarray, right: np.ndarray):
    # sign convention: the largest-magnitude entry of the left vector is
    # positive; np.argmax resolves ties toward the lowest index
    pivot = int(np.argmax(np.abs(left)))
    if left[pivot] < 0:
        return -left, -right
    return left, right


def whiten(raw) -> np.ndarray:
    """Rescale columns to an exactly whitened design.

    Returns W with W.T @ W == rows * identity (thin QR, signs fixed so
    each column keeps a positive projection onto its QR pivot).
    """
    a = _as_matrix(raw, "whiten")
    rows, cols = a.shape
    if rows < cols:
        raise ValueError(
            f"whiten requires rows >= cols, got {rows} x {cols}")
    q, r = np.linalg.qr(a, mode="reduced")
    # q has orthonormal columns, so the singular values of r equal those
    # of the input; the rank check is exact but much cheaper on r
    sv = np.linalg.svd(r, compute_uv=False)
    if sv[-1] <= _RANK_RTOL * sv[0]:
        cond = np.inf if sv[-1] == 0 else sv[0] / sv[-1]
        raise ValueError(
            "whiten: input is numerically rank deficient "
            f"(condition number {cond:.3e})")
    signs = np.where(np.diagonal(r) < 0.0, -1.0, 1.0)
    return np.sqrt(rows) * q * signs


def top_singular_pair(m, tol: float = 1e-12, max_iter: int = 1000) -> SingularTriple:
    """Leading singular triple of a matrix.

    Power iteration on the smaller Gram matrix, with a dense SVD
    fallback when min(rows, cols) <= DENSE_FALLBACK_DIM.  Convergence is
    declared when the Rayleigh quotient changes by at most ``tol``
    relative to its magnitude; otherwise raises ConvergenceError with
    spectral-gap diagnostics (the partial result rides on the error).
    """
    a = _as_matrix(m, "top_singular_pair")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    if not a.any():
        raise ValueError("top_singular_pair: all-zero matrix has no leading direction")

    rows, cols = a.shape
    if min(rows, cols) <= DENSE_FALLBACK_DIM:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
        left, right = _canonical_signs(u[:, 0], vt[0])
        return SingularTriple(left=left, right=right, value=float(s[0]))

    # iterate on the smaller of the two Gram matrices
    right_side = cols <= rows
    b = a.T @ a if right_side else a @ a.T
    dim = b.shape[0]
    rng = substream(_START_KEY, "power-start", dim)
    x = rng.standard_normal(dim)
    x /= np.linalg.norm(x)

    lam_prev = np.inf
    lam = 0.0
    converged = False
    for _ in range(max_iter):
        y = b @ x
        lam = float(x @ y)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            # start vector fell in the null space; try a fresh one
            x = rng.standard_normal(dim)
            x /= np.linalg.norm(x)
            lam_prev = np.inf
            continue
        x = y / ny
        if abs(lam - lam_prev) <= tol * max(abs(lam), np.finfo(float).tiny):
            converged = True
            break
        lam_prev = lam

    sigma_sq = max(lam, 0.0)
    if right_side:
        right = x
        left_raw = a @ right
        value = float(np.linalg.norm(left_raw))
        left = left_raw / value
    else:
        left = x
        right_raw = a.T @ left
        value = float(np.linalg.norm(right_raw))
        right = right_raw / value
    left, right = _canonical_signs(left, right)
    triple = SingularTriple(left=left, right=right, value=value)

    if not converged:
        rel = abs(lam - lam_prev) / max(abs(lam), np.finfo(float).tiny)
        raise ConvergenceError(
            f"power iteration did not converge in {max_iter} iterations "
            f"(last relative Rayleigh change {rel:.3e}); the top of the "
            "spectrum is likely quasi-degenerate (small spectral gap "
            f"around sigma ~ {np.sqrt(sigma_sq):.6g})",
            partial=triple,
        )
    return triple


def pca_reduce(m, target_dims: int) -> np.ndarray:
    """Project onto the top principal directions after column centering.

    Returns the score matrix (rows x target_dims) with components
    ordered by decreasing explained variance.  Loading signs follow the
    same largest-entry-positive convention as top_singular_pair so the
    output is deterministic.
    """
    a = _as_matrix(m, "pca_reduce")
    rows, cols = a.shape
    if not 1 <= target_dims <= cols:
        raise ValueError(
            f"target_dims must be in [1, {cols}], got {target_dims}")
    if rows < 2:
        raise ValueError("pca_reduce needs at least 2 rows to center")
    centered = a - a.mean(axis=0)
    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    if s[0] <= 1e-12 * max(1.0, np.abs(a).max()):
        raise ValueError("pca_reduce: data has zero variance in every direction")
    loadings = vt[:target_dims]
    pivots = np.argmax(np.abs(loadings), axis=1)
    flips = np.where(loadings[np.arange(target_dims), pivots] < 0.0, -1.0, 1.0)
    return centered @ (loadings * flips[:, None]).T


def vector_correlation(a, b) -> float:
    """Cosine similarity a.b / (|a| |b|) of two 1-D vectors."""
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.ndim != 1 or vb.ndim != 1:
        raise ValueError("vector_correlation expects 1-D vectors")
    if va.shape != vb.shape:
        raise ValueError(
            f"length mismatch: {va.shape[0]} vs {vb.shape[0]}")
    if not (np.isfinite(va).all() and np.isfinite(vb).all()):
        raise ValueError("vector_correlation: non-finite entries")
    na = np.linalg.norm(va)
    nb = np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        raise ValueError("vector_correlation: zero vector")
    return float(va @ vb / (na * nb))
