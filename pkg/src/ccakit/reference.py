"""Exact and classical iterative CCA solvers.

These are the oracles and baselines every other solver is measured against:
the spectral solver (whiten, then SVD), the QR-whitening variant, alternating
least squares for the leading pair, and the naive projected-gradient update
kept only as a negative control.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import cho_factor, cho_solve, eigh, qr, solve_triangular, svd

from .linalg import (
    SingularMatrixError,
    as_matrix,
    cross_covariance,
    gram,
    induced_norm,
)


@dataclass
class CcaModel:
    """Estimated canonical vectors and correlations for a rank-k subspace.

    ``whitened`` is False for heuristics (NW/DW) whose directions are not
    S-orthonormal; metric code must not assert normalization on those.
    """

    phi: np.ndarray
    psi: np.ndarray
    lam: np.ndarray
    whitened: bool = True
    converged: bool = True

    @property
    def k(self):
        return self.phi.shape[1]


def fix_signs(Phi, Psi):
    """Flip column signs so each Phi column's largest-magnitude entry is >= 0."""
    Phi = np.array(Phi)
    Psi = np.array(Psi)
    for j in range(Phi.shape[1]):
        i = int(np.argmax(np.abs(Phi[:, j])))
        if Phi[i, j] < 0:
            Phi[:, j] = -Phi[:, j]
            Psi[:, j] = -Psi[:, j]
    return Phi, Psi


def _inv_sqrt_full(S, lam, side):
    """Full symmetric inverse square root of a Gram matrix, with a singularity check."""
    w, V = eigh(S)
    tol = 1e-12 * max(w[-1], 1.0)
    if w[0] < tol:
        if lam == 0.0:
            raise SingularMatrixError(
                f"S_{side} is numerically singular (min eig {w[0]:.3e}); "
                "set a positive regularization lam"
            )
        w = np.maximum(w, tol)
    return (V / np.sqrt(w)) @ V.T


def spectral_cca(X, Y, k, lam=0.0):
    """Ground-truth CCA: whiten both views fully, then SVD the whitened cross-covariance.

    Returns the top-k canonical pairs. Quadratic in p1, p2 -- intended as the
    exact oracle at desk scale, not a scalable solver.
    """
    X, Y = as_matrix(X), as_matrix(Y)
    p1, p2 = X.shape[1], Y.shape[1]
    if X.shape[0] != Y.shape[0]:
        raise ValueError("X and Y must have the same number of rows")
    if k < 1 or k > min(p1, p2):
        raise ValueError(f"rank k={k} out of range for views of widths {p1}, {p2}")
    Sx = gram(X, lam)
    Sy = gram(Y, lam)
    Sxy = cross_covariance(X, Y)
    Rx = _inv_sqrt_full(Sx, lam, "x")
    Ry = _inv_sqrt_full(Sy, lam, "y")
    U, s, Vt = svd(Rx @ Sxy @ Ry, full_matrices=False)
    Phi = Rx @ U[:, :k]
    Psi = Ry @ Vt[:k].T
    Phi, Psi = fix_signs(Phi, Psi)
    return CcaModel(Phi, Psi, s[:k].copy())


def qr_cca(X, Y, k, lam=0.0):
    """QR-whitening CCA: QR-factor each view, SVD of Qx'Qy.

    Dense inputs only (QR cannot exploit sparsity). Regularization is applied
    by augmenting each view with sqrt(n*lam) * I rows, which reproduces the
    lam-regularized Gram matrices exactly.
    """
    X, Y = as_matrix(X), as_matrix(Y)
    if sp.issparse(X) or sp.issparse(Y):
        raise ValueError("qr_cca supports dense inputs only")
    if X.shape[0] != Y.shape[0]:
        raise ValueError("X and Y must have the same number of rows")
    n, p1 = X.shape
    p2 = Y.shape[1]
    if k < 1 or k > min(p1, p2):
        raise ValueError(f"rank k={k} out of range for views of widths {p1}, {p2}")
    if lam > 0:
        # augmented rows reproduce the lam-regularized Grams while keeping the
        # cross-covariance untouched (zero blocks keep the row spaces aligned)
        X = np.vstack([X, np.sqrt(n * lam) * np.eye(p1), np.zeros((p2, p1))])
        Y = np.vstack([Y, np.zeros((p1, p2)), np.sqrt(n * lam) * np.eye(p2)])
    Qx, Rx_ = qr(X, mode="economic")
    Qy, Ry_ = qr(Y, mode="economic")
    for R, side in ((Rx_, "x"), (Ry_, "y")):
        d = np.abs(np.diag(R))
        if d.min() < 1e-12 * max(d.max(), 1.0):
            raise SingularMatrixError(
                f"view {side} is numerically rank-deficient; set lam > 0"
            )
    U, s, Vt = svd(Qx.T @ Qy, full_matrices=False)
    Phi = np.sqrt(n) * solve_triangular(Rx_, U[:, :k])
    Psi = np.sqrt(n) * solve_triangular(Ry_, Vt[:k].T)
    Phi, Psi = fix_signs(Phi, Psi)
    return CcaModel(Phi, Psi, s[:k].copy())


def als_cca(X, Y, init, max_iters=1000, tol=1e-8, lam=0.0):
    """Leading canonical pair by alternating least squares.

    Each sweep solves the two exact least-squares problems against the
    partner's previous iterate and renormalizes in the induced norms. Stops
    when both iterates move by less than ``tol`` in induced norm.
    """
    X, Y = as_matrix(X), as_matrix(Y)
    Sx = gram(X, lam)
    Sy = gram(Y, lam)
    Sxy = cross_covariance(X, Y)
    try:
        cx = cho_factor(Sx)
        cy = cho_factor(Sy)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(
            "Gram matrix is singular; set lam > 0"
        ) from exc
    phi, psi = (np.asarray(v, dtype=float).copy() for v in init)
    converged = False
    for _ in range(max_iters):
        phi_new = cho_solve(cx, Sxy @ psi)
        phi_new /= induced_norm(Sx, phi_new)
        psi_new = cho_solve(cy, Sxy.T @ phi)
        psi_new /= induced_norm(Sy, psi_new)
        change = max(
            induced_norm(Sx, phi_new - phi), induced_norm(Sy, psi_new - psi)
        )
        phi, psi = phi_new, psi_new
        if change < tol:
            converged = True
            break
    lam1 = float(phi @ (Sxy @ psi))
    if lam1 < 0:
        psi = -psi
        lam1 = -lam1
    Phi, Psi = fix_signs(phi[:, None], psi[:, None])
    return CcaModel(Phi, Psi, np.array([lam1]), converged=converged)


def naive_gradient_step(phi, psi, eta1, eta2, X, Y, lam=0.0):
    """One step of the broken projected-gradient scheme (negative control).

    Updates the normalized pair directly and renormalizes; the true canonical
    pair is generically not a fixed point of this map.
    """
    if eta1 < 0 or eta2 < 0:
        raise ValueError("step sizes must be nonnegative")
    X, Y = as_matrix(X), as_matrix(Y)
    n = X.shape[0]
    phi = np.asarray(phi, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if phi.shape[0] != X.shape[1] or psi.shape[0] != Y.shape[1]:
        raise ValueError("direction dimensions do not match the data views")
    Xp = np.asarray(X @ phi)
    Yq = np.asarray(Y @ psi)
    g1 = np.asarray(X.T @ (Xp - Yq)) / n + lam * phi
    g2 = np.asarray(Y.T @ (Yq - Xp)) / n + lam * psi
    phi_new = phi - eta1 * g1
    psi_new = psi - eta2 * g2
    Sx = gram(X, lam)
    Sy = gram(Y, lam)
    phi_new /= induced_norm(Sx, phi_new)
    psi_new /= induced_norm(Sy, psi_new)
    return phi_new, psi_new
