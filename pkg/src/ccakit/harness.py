"""Experiment driver: configuration, solver dispatch, oversampling, holdout
evaluation, and report/model emission."""

from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.linalg import svd

from . import io
from .appgrad import default_step, random_init, run_appgrad
from .baselines import dw_cca, nw_cca, pca_cca
from .kernels import KernelSpec, kernel_cca, kernel_gram
from .linalg import as_matrix
from .metrics import IterationRecord, RunReport, pcc, tcc
from .planted import PlantedParams, generate_planted
from .reference import CcaModel, als_cca, fix_signs, qr_cca, spectral_cca
from .stochastic import MinibatchPlan, StepSchedule, run_stochastic

SOLVERS = (
    "spectral",
    "qr",
    "als",
    "appgrad",
    "stochastic-appgrad",
    "nw",
    "dw",
    "pca-cca",
    "kernel-appgrad",
)


@dataclass
class SolverConfig:
    """Resolved run configuration; embedded verbatim in every report."""

    solver: str = "appgrad"
    k: int = 2
    oversample: int = 0
    lam: float = 0.0
    eta: float = None            # None -> solver default / theory-free estimate
    schedule: str = "constant"
    batch_size: int = 100
    max_iters: int = 2000
    tol: float = 1e-7
    seed: int = 0
    holdout: float = 0.0
    kernel: KernelSpec = None
    pca_m: int = None
    record_every: int = None

    def validate(self):
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}; choose from {SOLVERS}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.oversample < 0 or self.lam < 0:
            raise ValueError("oversample and lam must be nonnegative")
        if self.solver == "stochastic-appgrad" and self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if not (0.0 <= self.holdout <= 0.5):
            raise ValueError("holdout fraction must be in [0, 0.5]")

    def snapshot(self):
        d = asdict(self)
        if d.get("kernel"):
            d["kernel"] = f"{self.kernel.kind}"
        return {k: v for k, v in d.items() if v is not None}


@dataclass
class ExperimentResult:
    model: CcaModel
    report: RunReport
    oracle: CcaModel = None
    tcc_train: float = float("nan")
    pcc_train: float = float("nan")
    pcc_holdout: float = float("nan")


def extract_best_k(X, Y, model, k):
    """Keep the k directions capturing the most correlation from a (k+l)-rank
    result: rotate whitened pairs to diagonalize the captured correlation
    matrix, then truncate; unwhitened heuristics are truncated directly."""
    if model.k <= k:
        return model
    if not model.whitened:
        return CcaModel(model.phi[:, :k], model.psi[:, :k], model.lam[:k],
                        whitened=False, converged=model.converged)
    X, Y = as_matrix(X), as_matrix(Y)
    n = X.shape[0]
    C = np.asarray(X @ model.phi).T @ np.asarray(Y @ model.psi) / n
    U, s, Vt = svd(C, full_matrices=False)
    Phi = model.phi @ U[:, :k]
    Psi = model.psi @ Vt[:k].T
    Phi, Psi = fix_signs(Phi, Psi)
    return CcaModel(Phi, Psi, s[:k].copy(), converged=model.converged)


def _single_record_report(solver, config, X, Y, model):
    report = RunReport(solver=solver, seed=config.seed, config=config.snapshot())
    report.records.append(
        IterationRecord(t=1, flops=0, tcc_train=tcc(X, Y, model.phi, model.psi))
    )
    return report


def _split_holdout(X, Y, fraction, seed):
    n = X.shape[0]
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_hold = int(round(fraction * n))
    hold, train = perm[:n_hold], perm[n_hold:]
    return (X[train], Y[train]), (X[hold], Y[hold])


def run_experiment(config, x=None, y=None, planted=None,
                   report_path=None, trace_path=None, model_prefix=None):
    """Dispatch one solver run and evaluate it.

    Data comes either from (x, y) matrices or from PlantedParams. The solver
    is run at rank k + oversample and the best k directions are extracted.
    Returns an ExperimentResult; optionally writes the report, the (FLOP, PCC)
    trace, and the canonical-vector matrices.
    """
    config.validate()
    instance = None
    if planted is not None:
        instance = generate_planted(planted, seed=config.seed)
        x, y = instance.x, instance.y
    if x is None or y is None:
        raise ValueError("provide either (x, y) or planted parameters")
    X, Y = as_matrix(x), as_matrix(y)
    n, p1 = X.shape
    p2 = Y.shape[1]

    holdout_pair = None
    if config.holdout > 0:
        (X, Y), holdout_pair = _split_holdout(X, Y, config.holdout, config.seed)

    k = config.k
    k_run = min(k + config.oversample, min(p1, p2))
    oracle = None
    if config.solver != "kernel-appgrad":
        # exact oracle for PCC is affordable at desk scale; recomputed on the
        # training split so holdout PCC follows the same convention
        try:
            oracle = spectral_cca(X, Y, k, lam=config.lam)
        except Exception:
            oracle = None

    solver = config.solver
    if solver == "spectral":
        model = spectral_cca(X, Y, k_run, lam=config.lam)
        report = _single_record_report(solver, config, X, Y, model)
    elif solver == "qr":
        model = qr_cca(X, Y, k_run, lam=config.lam)
        report = _single_record_report(solver, config, X, Y, model)
    elif solver == "als":
        if k != 1:
            raise ValueError("als solves the leading pair only; set k=1")
        rng = np.random.default_rng(config.seed)
        init = random_init(X, Y, 1, config.seed, config.lam)
        model = als_cca(X, Y, (init.phi[:, 0], init.psi[:, 0]),
                        max_iters=config.max_iters, tol=config.tol, lam=config.lam)
        report = _single_record_report(solver, config, X, Y, model)
        k_run = 1
    elif solver == "appgrad":
        model, report = run_appgrad(
            X, Y, k_run, eta=config.eta, lam=config.lam,
            max_iters=config.max_iters, tol=config.tol, seed=config.seed,
            oracle=oracle, record_every=config.record_every or 1,
        )
        report.config = config.snapshot()
    elif solver == "stochastic-appgrad":
        plan = MinibatchPlan(m=min(config.batch_size, n), seed=config.seed)
        eta0 = config.eta
        if eta0 is None:
            eta0 = default_step(X, Y, config.lam, seed=config.seed).eta1
        schedule = StepSchedule(kind=config.schedule, eta0=eta0)
        model, report = run_stochastic(
            X, Y, k_run, plan, schedule, lam=config.lam,
            max_iters=config.max_iters, seed=config.seed, oracle=oracle,
            record_every=config.record_every, holdout=holdout_pair,
        )
        report.config = config.snapshot()
    elif solver == "nw":
        model = nw_cca(X, Y, k_run, seed=config.seed)
        report = _single_record_report(solver, config, X, Y, model)
    elif solver == "dw":
        model = dw_cca(X, Y, k_run, lam=config.lam, seed=config.seed)
        report = _single_record_report(solver, config, X, Y, model)
    elif solver == "pca-cca":
        m = config.pca_m if config.pca_m is not None else min(4 * k, p1, p2, n)
        model = pca_cca(X, Y, k_run, m=max(m, k_run), lam=config.lam, seed=config.seed)
        report = _single_record_report(solver, config, X, Y, model)
    elif solver == "kernel-appgrad":
        spec = config.kernel or KernelSpec("linear")
        Kx = kernel_gram(X, spec)
        Ky = kernel_gram(Y, spec)
        lam_arg = config.lam if config.lam > 0 else None
        Wx, Wy, lams = kernel_cca(
            Kx, Ky, k_run, lam=lam_arg, eta=config.eta,
            max_iters=config.max_iters, tol=config.tol, seed=config.seed,
        )
        model = CcaModel(Wx, Wy, lams)
        report = _single_record_report(solver, config, Kx.values, Ky.values, model)
        X, Y = Kx.values, Ky.values  # metrics act on the Gram views
        oracle = None
    else:  # pragma: no cover
        raise AssertionError(solver)

    model = extract_best_k(X, Y, model, k)
    result = ExperimentResult(model=model, report=report, oracle=oracle)
    result.tcc_train = tcc(X, Y, model.phi, model.psi)
    if oracle is not None:
        result.pcc_train = pcc(X, Y, (model.phi, model.psi), (oracle.phi, oracle.psi))
        if holdout_pair is not None:
            Xh, Yh = holdout_pair
            oracle_h = spectral_cca(Xh, Yh, k, lam=config.lam)
            result.pcc_holdout = pcc(
                Xh, Yh, (model.phi, model.psi), (oracle_h.phi, oracle_h.psi)
            )
    report.validate()
    if report_path:
        report.write(report_path)
    if trace_path:
        report.write_pcc_curve(trace_path)
    if model_prefix:
        io.save_model_matrix(f"{model_prefix}.phi.txt", model.phi)
        io.save_model_matrix(f"{model_prefix}.psi.txt", model.psi)
    return result


def parse_config_file(path):
    """Flat key-value config: one 'key = value' per line, '#' comments."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            out[key.strip()] = val.strip()
    return out
