"""Batch first-order CCA with augmented state (rank-1 and rank-k).

The solver evolves a quadruple (Phi, Psi, PhiTilde, PsiTilde): the tilde
matrices take plain gradient steps on the coupled least-squares objective
|| X*PhiTilde - Y*Psi ||_F^2 / 2n, and the normalized matrices are produced
by whitening with a small k-by-k Gram matrix. No p-by-p object is formed.
"""

import time
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import eigh, svd

from .linalg import DegenerateIterateError, as_matrix, sym_inv_sqrt
from .metrics import IterationRecord, RunReport, step_flops, tcc
from .reference import CcaModel, fix_signs

EIG_FLOOR_REL = 1e-10


@dataclass
class StepSizes:
    """Per-side gradient step sizes."""

    eta1: float
    eta2: float

    def __post_init__(self):
        if self.eta1 < 0 or self.eta2 < 0:
            raise ValueError("step sizes must be nonnegative")

    @classmethod
    def constant(cls, eta):
        return cls(eta, eta)


@dataclass
class AppGradState:
    """Solver state: normalized (phi, psi) and unnormalized (phi_tilde, psi_tilde)."""

    phi: np.ndarray
    psi: np.ndarray
    phi_tilde: np.ndarray
    psi_tilde: np.ndarray
    t: int = 0

    @property
    def k(self):
        return self.phi.shape[1]


def _sampled_gram_quadratic(X, W, lam, denom):
    """k-by-k matrix W' (X'X/denom + lam I) W computed through X products."""
    # overflow here just means a diverged iterate; the caller checks finiteness
    with np.errstate(over="ignore", invalid="ignore"):
        XW = np.asarray(X @ W)
        G = XW.T @ XW / denom
        if lam:
            G = G + lam * (W.T @ W)
        return 0.5 * (G + G.T)


def normalize_columns(X, W, lam=0.0, denom=None):
    """Whiten W against the (possibly regularized) view Gram: returns W R with
    R = sym_inv_sqrt(W' S W). Raises DegenerateIterateError on collapse."""
    X = as_matrix(X)
    if denom is None:
        denom = X.shape[0]
    G = _sampled_gram_quadratic(X, W, lam, denom)
    if not np.all(np.isfinite(G)):
        raise DegenerateIterateError(
            "iterate overflowed (non-finite Gram); the step size is too large"
        )
    w = eigh(G, eigvals_only=True)
    floor = EIG_FLOOR_REL * max(w[-1], 0.0)
    if w[-1] <= 0.0 or w[0] < max(floor, 1e-300):
        raise DegenerateIterateError(
            f"iterate Gram is numerically rank-deficient (eigs in [{w[0]:.3e}, "
            f"{w[-1]:.3e}]); restart from a new initialization"
        )
    R = sym_inv_sqrt(G, floor=floor)
    return W @ R


def random_init(X, Y, k, seed, lam=0.0):
    """Standard-Gaussian draw, then exact whitening of the k columns."""
    X, Y = as_matrix(X), as_matrix(Y)
    rng = np.random.default_rng(seed)
    Pt = rng.standard_normal((X.shape[1], k))
    Qt = rng.standard_normal((Y.shape[1], k))
    phi = normalize_columns(X, Pt, lam)
    psi = normalize_columns(Y, Qt, lam)
    return AppGradState(phi, psi, phi.copy(), psi.copy(), t=0)


def appgrad_step(state, eta, X, Y, lam=0.0):
    """One rank-k update: gradient steps on both tilde matrices (each against
    the partner's incoming normalized state), then k-by-k whitening."""
    X, Y = as_matrix(X), as_matrix(Y)
    n = X.shape[0]
    e1, e2 = eta.eta1, eta.eta2
    Xpt = np.asarray(X @ state.phi_tilde)
    Ypsi = np.asarray(Y @ state.psi)
    pt = state.phi_tilde - e1 * (np.asarray(X.T @ (Xpt - Ypsi)) / n + lam * state.phi_tilde)
    Yqt = np.asarray(Y @ state.psi_tilde)
    Xphi = np.asarray(X @ state.phi)
    qt = state.psi_tilde - e2 * (np.asarray(Y.T @ (Yqt - Xphi)) / n + lam * state.psi_tilde)
    phi = normalize_columns(X, pt, lam)
    psi = normalize_columns(Y, qt, lam)
    return AppGradState(phi, psi, pt, qt, t=state.t + 1)


def appgrad_step_rank1(state, eta, X, Y, lam=0.0):
    """Rank-1 specialization: scalar induced-norm normalization."""
    if state.k != 1:
        raise ValueError("appgrad_step_rank1 requires a rank-1 state")
    X, Y = as_matrix(X), as_matrix(Y)
    n = X.shape[0]
    Xpt = np.asarray(X @ state.phi_tilde)
    Ypsi = np.asarray(Y @ state.psi)
    pt = state.phi_tilde - eta.eta1 * (
        np.asarray(X.T @ (Xpt - Ypsi)) / n + lam * state.phi_tilde
    )
    Yqt = np.asarray(Y @ state.psi_tilde)
    Xphi = np.asarray(X @ state.phi)
    qt = state.psi_tilde - eta.eta2 * (
        np.asarray(Y.T @ (Yqt - Xphi)) / n + lam * state.psi_tilde
    )
    nx = _induced_norm_via_products(X, pt, lam)
    ny = _induced_norm_via_products(Y, qt, lam)
    if not (np.isfinite(nx) and np.isfinite(ny)):
        raise DegenerateIterateError(
            "iterate overflowed (non-finite norm); the step size is too large"
        )
    if nx < 1e-14 or ny < 1e-14:
        raise DegenerateIterateError(
            "iterate collapsed below 1e-14 induced norm; restart from a new init"
        )
    return AppGradState(pt / nx, qt / ny, pt, qt, t=state.t + 1)


def _induced_norm_via_products(X, w, lam):
    Xw = np.asarray(X @ w)
    q = float((Xw * Xw).sum()) / X.shape[0] + lam * float((w * w).sum())
    return np.sqrt(max(q, 0.0))


def estimate_gram_norm(X, iters=50, seed=0):
    """Power-iteration estimate of the largest eigenvalue of X'X/n."""
    X = as_matrix(X)
    n, p = X.shape
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(p)
    v /= np.linalg.norm(v)
    ev = 0.0
    for _ in range(iters):
        w = np.asarray(X.T @ np.asarray(X @ v)) / n
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        ev = float(v @ w)
        v = w / nw
    return ev


def default_step(X, Y, lam=0.0, seed=0):
    """Practical default: eta = 1 / (2 * L1hat), L1hat the larger view Gram norm."""
    L1 = max(estimate_gram_norm(X, seed=seed), estimate_gram_norm(Y, seed=seed)) + lam
    return StepSizes.constant(1.0 / (2.0 * L1))


def theoretical_step_size(lam1, lam2, L1, e0, L2=None):
    """Step size and contraction rate from the linear-convergence guarantee.

    Returns (eta, delta, rate); ``rate`` is None unless L2 is given.
    Requires e0 strictly inside the contraction region 2*(lam1^2-lam2^2)/L1.
    """
    if not (lam1 > lam2 >= 0):
        raise ValueError("requires lam1 > lam2 >= 0")
    if L1 < 1:
        raise ValueError("requires L1 >= 1")
    bound = 2.0 * (lam1**2 - lam2**2) / L1
    if not e0 < bound:
        raise ValueError(
            f"e0={e0} is outside the contraction region: requires e0 < {bound}"
        )
    delta = 1.0 - np.sqrt(1.0 - (2.0 * (lam1**2 - lam2**2) - L1 * e0) / (2.0 * lam1**2))
    eta = delta / (6.0 * L1)
    rate = None
    if L2 is not None:
        rate = 1.0 - delta**2 / (6.0 * L1 * L2)
    return eta, delta, rate


def error_metric(state, truth):
    """Squared Euclidean distance of the tilde pair to the scaled leading pair,
    minimized over the joint sign of the truth."""
    if state.k != 1 or truth.k != 1:
        raise ValueError("error_metric is defined for rank-1 states")
    pt = state.phi_tilde[:, 0]
    qt = state.psi_tilde[:, 0]
    lam1 = float(truth.lam[0])
    f = lam1 * truth.phi[:, 0]
    g = lam1 * truth.psi[:, 0]
    if pt.shape != f.shape or qt.shape != g.shape:
        raise ValueError("state and truth dimensions do not match")
    e_plus = float(((pt - f) ** 2).sum() + ((qt - g) ** 2).sum())
    e_minus = float(((pt + f) ** 2).sum() + ((qt + g) ** 2).sum())
    return min(e_plus, e_minus)


def procrustes_distance(A, B):
    """|| A - B R ||_F minimized over orthogonal R (alignment of rank-k iterates)."""
    U, _, Vt = svd(B.T @ A, full_matrices=False)
    R = U @ Vt
    return float(np.linalg.norm(A - B @ R))


def extract_model(X, Y, state, lam=0.0):
    """Rotate the normalized pair to diagonalize the captured correlations and
    return a sorted, sign-fixed model."""
    X, Y = as_matrix(X), as_matrix(Y)
    n = X.shape[0]
    C = np.asarray(X @ state.phi).T @ np.asarray(Y @ state.psi) / n
    U, s, Vt = svd(C, full_matrices=False)
    Phi = state.phi @ U
    Psi = state.psi @ Vt.T
    Phi, Psi = fix_signs(Phi, Psi)
    return CcaModel(Phi, Psi, s.copy())


def run_appgrad(
    X,
    Y,
    k,
    eta=None,
    lam=0.0,
    max_iters=2000,
    tol=1e-7,
    seed=0,
    init=None,
    oracle=None,
    record_every=1,
    step_fn=appgrad_step,
):
    """Iterate rank-k updates until the Procrustes-aligned movement of both
    normalized iterates falls below ``tol`` or ``max_iters`` is exhausted.

    Returns (CcaModel, RunReport). The report records in-sample total
    correlation and, when an oracle model is given, its captured-correlation
    ratio, at every ``record_every`` iterations.
    """
    X, Y = as_matrix(X), as_matrix(Y)
    n, p1 = X.shape
    p2 = Y.shape[1]
    if k < 1 or k > min(p1, p2):
        raise ValueError(f"rank k={k} out of range")
    if eta is None:
        eta = default_step(X, Y, lam, seed=seed)
    if isinstance(eta, (int, float)):
        eta = StepSizes.constant(float(eta))
    state = init if init is not None else random_init(X, Y, k, seed, lam)
    report = RunReport(
        solver="appgrad",
        seed=seed,
        config={
            "k": k,
            "eta1": eta.eta1,
            "eta2": eta.eta2,
            "lam": lam,
            "max_iters": max_iters,
            "tol": tol,
        },
    )
    oracle_tcc = None
    if oracle is not None:
        oracle_tcc = tcc(X, Y, oracle.phi, oracle.psi)
    flops = 0
    t0 = time.perf_counter()
    converged = False
    for it in range(max_iters):
        new = step_fn(state, eta, X, Y, lam)
        flops += step_flops(n, p1, p2, k)
        if record_every and (new.t % record_every == 0 or new.t == 1):
            t_in = tcc(X, Y, new.phi, new.psi)
            rec = IterationRecord(
                t=new.t,
                flops=flops,
                wall_time=time.perf_counter() - t0,
                tcc_train=t_in,
            )
            if oracle_tcc:
                rec.pcc_train = t_in / oracle_tcc
            report.records.append(rec)
        moved = max(
            procrustes_distance(new.phi, state.phi),
            procrustes_distance(new.psi, state.psi),
        )
        state = new
        if moved < tol:
            converged = True
            break
    model = extract_model(X, Y, state, lam)
    model.converged = converged
    report.final_state = state
    return model, report
