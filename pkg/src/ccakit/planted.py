"""Synthetic two-view instances with known canonical structure.

Construction: draw n-by-(p1+p2) orthonormal latent columns scaled by sqrt(n)
so their empirical Gram is the identity. The first k latents are shared by
both views with prescribed per-pair correlations; the rest are view-private
fillers. Each view is the latent block times an invertible mixing matrix
C = R diag(s), so S = C C' exactly (noise 0), the true canonical directions
are columns of R diag(1/s), and the singular-value profile s controls
conditioning. By default s is ascending, which puts the canonical latents on
the *smallest* feature scales -- the regime where approximate whitening
heuristics break down.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import qr

from .reference import CcaModel, fix_signs, spectral_cca


@dataclass
class PlantedParams:
    n: int
    p1: int
    p2: int
    correlations: tuple
    noise: float = 0.0
    cond_x: float = 1.0
    cond_y: float = 1.0
    rotate: bool = True
    canonical_scale: str = "low"  # put canonical latents on "low" or "high" feature scales
    # rotate the latent side of the mixing too; makes the canonical directions
    # generic (not eigenvectors of the view Grams) but blends the scale profile
    latent_rotate: bool = False

    @property
    def k(self):
        return len(self.correlations)

    def validate(self):
        rho = np.asarray(self.correlations, dtype=float)
        if rho.size < 1 or not np.all((rho > 0) & (rho < 1)):
            raise ValueError("correlations must lie strictly in (0, 1)")
        if np.any(np.diff(rho) >= 0):
            raise ValueError("correlations must be strictly decreasing")
        if self.k > min(self.p1, self.p2):
            raise ValueError("k exceeds view widths")
        if self.n < self.p1 + self.p2:
            raise ValueError("need n >= p1 + p2 for the latent construction")
        if self.noise < 0 or self.cond_x < 1 or self.cond_y < 1:
            raise ValueError("noise >= 0 and conditioning >= 1 required")
        if self.canonical_scale not in ("low", "high"):
            raise ValueError("canonical_scale must be 'low' or 'high'")


@dataclass
class PlantedInstance:
    x: np.ndarray
    y: np.ndarray
    model: CcaModel          # planted truth (exact when noise == 0)
    empirical: CcaModel      # spectral oracle recomputed on the generated data
    params: PlantedParams
    seed: int
    mixing_x: np.ndarray = None
    mixing_y: np.ndarray = None

    def conditioning(self):
        """(L1, L2) bounds measured from the view Grams: L1 >= largest
        eigenvalue of either Gram, 1/L2 <= smallest. Both clamped to >= 1."""
        from .linalg import gram
        from scipy.linalg import eigh

        wx = eigh(gram(self.x), eigvals_only=True)
        wy = eigh(gram(self.y), eigvals_only=True)
        L1 = max(wx[-1], wy[-1], 1.0)
        L2 = max(1.0 / min(wx[0], wy[0]), 1.0)
        return L1, L2


def _mixing(p, cond, rng, rotate, canonical_scale="low", latent_rotate=False):
    s = np.geomspace(1.0, cond, p) if cond > 1 else np.ones(p)
    if canonical_scale == "high":
        s = s[::-1].copy()
    if rotate:
        R = qr(rng.standard_normal((p, p)))[0]
    else:
        R = np.eye(p)
    C = R * s  # R @ diag(s)
    if latent_rotate:
        C = C @ qr(rng.standard_normal((p, p)))[0].T
    return C


def generate_planted(params, seed=0):
    """Build a PlantedInstance; reproducible from (params, seed)."""
    params.validate()
    rng = np.random.default_rng(seed)
    n, p1, p2, k = params.n, params.p1, params.p2, params.k
    rho = np.asarray(params.correlations, dtype=float)

    Q = qr(rng.standard_normal((n, p1 + p2)), mode="economic")[0] * np.sqrt(n)
    Zx = Q[:, :p1]                     # x latents: k canonical + fillers
    shared = Q[:, :k]
    fresh = Q[:, p1 : p1 + k]
    Zy = np.empty((n, p2))
    Zy[:, :k] = shared * rho + fresh * np.sqrt(1.0 - rho**2)
    Zy[:, k:] = Q[:, p1 + k :]

    Cx = _mixing(p1, params.cond_x, rng, params.rotate, params.canonical_scale,
                 params.latent_rotate)
    Cy = _mixing(p2, params.cond_y, rng, params.rotate, params.canonical_scale,
                 params.latent_rotate)
    X = Zx @ Cx.T
    Y = Zy @ Cy.T
    if params.noise > 0:
        X = X + params.noise * rng.standard_normal((n, p1))
        Y = Y + params.noise * rng.standard_normal((n, p2))

    Phi = np.linalg.solve(Cx, np.eye(p1)).T[:, :k]
    Psi = np.linalg.solve(Cy, np.eye(p2)).T[:, :k]
    Phi, Psi = fix_signs(Phi, Psi)
    planted = CcaModel(Phi, Psi, rho.copy())
    empirical = spectral_cca(X, Y, k)
    return PlantedInstance(
        x=X, y=Y, model=planted, empirical=empirical,
        params=params, seed=seed, mixing_x=Cx, mixing_y=Cy,
    )
