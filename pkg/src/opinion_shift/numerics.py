"""Dense linear algebra kernels.

Everything here is a pure function of numpy arrays. Tolerances follow one
convention: absolute-plus-relative ``1e-8`` unless a function says otherwise.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalError, SingularMatrixError

RTOL = 1e-8
PINV_RCOND = 1e-12


def solve(a, b) -> np.ndarray:
    """Solve ``a @ x = b`` for square, nonsingular ``a``.

    Raises
    ------
    SingularMatrixError
        If ``a`` is singular to working precision or the residual bound
        ``||a x - b||_inf <= 1e-8 (1 + ||b||_inf)`` cannot be met.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"solve needs a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        return np.zeros(b.shape)
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        raise SingularMatrixError("matrix is exactly singular", np.inf) from None
    bnorm = np.max(np.abs(b)) if b.size else 0.0
    resid = np.max(np.abs(a @ x - b)) if b.size else 0.0
    if not np.all(np.isfinite(x)) or resid > RTOL * (1.0 + bnorm):
        raise SingularMatrixError("linear solve failed residual check", np.linalg.cond(a))
    return x


def pinv(a, rcond: float = PINV_RCOND) -> np.ndarray:
    """Moore-Penrose pseudoinverse through the SVD.

    Singular values below ``max(rows, cols) * sigma_max * rcond`` are treated
    as zero. The zero matrix maps to the zero matrix.
    """
    a = np.asarray(a, dtype=float)
    rows, cols = a.shape
    if a.size == 0:
        return np.zeros((cols, rows))
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return np.zeros((cols, rows))
    cutoff = max(rows, cols) * smax * rcond
    keep = s >= cutoff
    inv_s = np.zeros_like(s)
    inv_s[keep] = 1.0 / s[keep]
    return (vt.T * inv_s) @ u.T


def penrose_residuals(a, a_pinv) -> tuple[float, float, float, float]:
    """Relative violations of the four Penrose conditions."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(a_pinv, dtype=float)
    scale_a = max(1.0, np.max(np.abs(a)))
    scale_x = max(1.0, np.max(np.abs(x)))
    axa = np.max(np.abs(a @ x @ a - a)) / scale_a
    xax = np.max(np.abs(x @ a @ x - x)) / scale_x
    ax = a @ x
    xa = x @ a
    sym1 = np.max(np.abs(ax - ax.T))
    sym2 = np.max(np.abs(xa - xa.T))
    return float(axa), float(xax), float(sym1), float(sym2)


def sherman_morrison_update(a_inv, u, v) -> np.ndarray:
    """Inverse of ``a + u v^T`` given ``a_inv = a^{-1}``."""
    a_inv = np.asarray(a_inv, dtype=float)
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    au = a_inv @ u
    va = v @ a_inv
    denom = 1.0 + v @ au
    if abs(denom) <= 1e-12:
        raise SingularMatrixError(
            f"rank-1 update makes the matrix singular (1 + v^T A^-1 u = {denom:.3e})")
    return a_inv - np.outer(au, va) / denom


def laplacian_rank1_pinv_update(l_pinv, s0: int, kappa0: float, q) -> np.ndarray:
    """Inverse of ``L + kappa0 e_s e_s^T`` from the pseudoinverse of ``L``.

    ``L`` is the Laplacian of a strongly connected digraph, so its kernel is
    spanned by ``1`` and its left kernel by ``q = D^{-1} pi``. Only this
    grounded-node case of the general rank-1 pseudoinverse update is
    supported. ``q`` may be given at any positive scale.
    """
    l_pinv = np.asarray(l_pinv, dtype=float)
    q = np.asarray(q, dtype=float).ravel()
    n = l_pinv.shape[0]
    if kappa0 <= 0:
        raise NumericalError(f"grounding weight must be positive, got {kappa0}")
    qs = q[s0]
    if not qs > 1e-14 * max(1.0, np.max(np.abs(q))):
        raise NumericalError(f"left null vector entry q[{s0}] = {qs:.3e} is not positive")
    col = l_pinv[:, s0]
    row = l_pinv[s0, :]
    ones = np.ones(n)
    coef = (1.0 / kappa0 + l_pinv[s0, s0]) / qs
    return (l_pinv - np.outer(col, q) / qs - np.outer(ones, row)
            + coef * np.outer(ones, q))


def block_remove_inverse(a_inv, idx: int, tol: float = 1e-14) -> np.ndarray:
    """Inverse of ``a`` with row and column ``idx`` deleted, from ``a^{-1}``."""
    a_inv = np.asarray(a_inv, dtype=float)
    pivot = a_inv[idx, idx]
    if abs(pivot) <= tol * max(1.0, np.max(np.abs(a_inv))):
        raise NumericalError(f"zero pivot at index {idx} in block removal")
    out = a_inv - np.outer(a_inv[:, idx], a_inv[idx, :]) / pivot
    out = np.delete(out, idx, axis=0)
    return np.delete(out, idx, axis=1)
