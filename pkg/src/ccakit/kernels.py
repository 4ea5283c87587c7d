"""Kernel CCA: Mercer-kernel Gram construction and reduction to the rank-k
augmented-gradient solver with the data matrices replaced by the Grams."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from .appgrad import run_appgrad
from .linalg import as_matrix


@dataclass
class KernelSpec:
    """Kernel family and parameters: linear, rbf (bandwidth sigma), or
    polynomial (degree, offset)."""

    kind: str = "linear"
    sigma: float = 1.0
    degree: int = 2
    offset: float = 1.0

    def __post_init__(self):
        if self.kind not in ("linear", "rbf", "polynomial"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "rbf" and self.sigma <= 0:
            raise ValueError("rbf bandwidth must be positive")
        if self.kind == "polynomial" and (self.degree < 1 or self.offset < 0):
            raise ValueError("polynomial kernel needs degree >= 1 and offset >= 0")


@dataclass
class KernelGram:
    """An n-by-n PSD kernel matrix with the KernelSpec that produced it."""

    values: np.ndarray
    spec: KernelSpec

    @property
    def n(self):
        return self.values.shape[0]


def kernel_gram(X, spec, center=False):
    """Pairwise kernel matrix K[i, j] = K(x_i, x_j), symmetrized.

    Forms a dense n-by-n matrix; kernel CCA is inherently n-sized. Centering
    in feature space is available but off by default."""
    X = as_matrix(X)
    if hasattr(X, "toarray"):
        X = X.toarray()
    X = np.asarray(X, dtype=float)
    if spec.kind == "linear":
        K = X @ X.T
    elif spec.kind == "polynomial":
        K = (X @ X.T + spec.offset) ** spec.degree
    else:
        sq = (X * X).sum(axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
        np.maximum(d2, 0.0, out=d2)
        K = np.exp(-d2 / (2.0 * spec.sigma**2))
    K = 0.5 * (K + K.T)
    if center:
        n = K.shape[0]
        H = np.eye(n) - np.ones((n, n)) / n
        K = H @ K @ H
        K = 0.5 * (K + K.T)
    return KernelGram(K, spec)


def kernel_cca(Kx, Ky, k, lam=None, eta=None, max_iters=2000, tol=1e-7, seed=0):
    """Top-k kernel CCA via the rank-k augmented-gradient solver run on the
    Gram pair. Returns (Wx, Wy, lam_hat): dual coefficient matrices with
    Wx' Kx Kx Wx / n = I_k and the captured correlations.

    ``lam`` defaults to 1e-6 * trace(K)/n per view (Kx Kx is rank-deficient by
    construction, so some regularization is always applied)."""
    if Kx.n != Ky.n:
        raise ValueError("Gram matrices must cover the same samples")
    n = Kx.n
    lam_x = 1e-6 * np.trace(Kx.values) / n if lam is None else lam
    lam_y = 1e-6 * np.trace(Ky.values) / n if lam is None else lam
    lam_run = max(lam_x, lam_y)
    model, report = run_appgrad(
        Kx.values,
        Ky.values,
        k,
        eta=eta,
        lam=lam_run,
        max_iters=max_iters,
        tol=tol,
        seed=seed,
    )
    return model.phi, model.psi, model.lam


def check_psd(K, tol_scale=1e-8):
    """Raise if a kernel matrix has an eigenvalue below -tol_scale * trace."""
    w = eigh(K.values, eigvals_only=True)
    floor = -tol_scale * max(np.trace(K.values), 1.0)
    if w[0] < floor:
        raise ValueError(f"kernel matrix is not PSD (min eig {w[0]:.3e})")
    return w
