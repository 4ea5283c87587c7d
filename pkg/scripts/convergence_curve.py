#!/usr/bin/env python3
"""Trace the batch solver's error against the geometric envelope predicted
by the step-size analysis, on a planted rank-1 instance.

Usage: python3 scripts/convergence_curve.py [--out curve.csv]
"""

import argparse

import numpy as np

from ccakit.appgrad import (
    AppGradState,
    StepSizes,
    appgrad_step_rank1,
    error_metric,
    theoretical_step_size,
)
from ccakit.linalg import gram, induced_norm
from ccakit.planted import PlantedParams, generate_planted
from ccakit.reference import spectral_cca


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--lam1", type=float, default=0.9)
    parser.add_argument("--lam2", type=float, default=0.3)
    parser.add_argument("--iters", type=int, default=500)
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--out", default=None)
    args = parser.parse_args()

    params = PlantedParams(
        n=500, p1=8, p2=8, correlations=(args.lam1, args.lam2)
    )
    inst = generate_planted(params, seed=args.seed)
    X, Y = inst.x, inst.y
    truth = spectral_cca(X, Y, 1)
    lam = spectral_cca(X, Y, 2).lam
    L1, L2 = inst.conditioning()

    e0 = (lam[0] ** 2 - lam[1] ** 2) / L1  # half the admissible region
    eta, delta, rate = theoretical_step_size(lam[0], lam[1], L1, e0, L2)
    print(f"lam1={lam[0]:.4f} lam2={lam[1]:.4f} L1={L1:.3g} "
          f"eta={eta:.3g} delta={delta:.4f} rate={rate:.6f}")

    rng = np.random.default_rng(args.seed)
    u, v = rng.standard_normal(8), rng.standard_normal(8)
    scale = np.sqrt(e0 / (u @ u + v @ v))
    pt = lam[0] * truth.phi[:, 0] + scale * u
    qt = lam[0] * truth.psi[:, 0] + scale * v
    state = AppGradState(
        (pt / induced_norm(gram(X), pt)).reshape(-1, 1),
        (qt / induced_norm(gram(Y), qt)).reshape(-1, 1),
        pt.reshape(-1, 1), qt.reshape(-1, 1),
    )
    steps = StepSizes.constant(eta)

    rows = []
    err = error_metric(state, truth)
    for t in range(args.iters + 1):
        rows.append((t, err, rows[0][1] * rate ** t if rows else err))
        state = appgrad_step_rank1(state, steps, X, Y)
        err = error_metric(state, truth)

    for t, e, bound in rows[:: max(1, args.iters // 20)]:
        print(f"t={t:4d}  error={e:.6e}  envelope={bound:.6e}")

    if args.out:
        with open(args.out, "w") as fh:
            fh.write("t,error,envelope\n")
            for t, e, bound in rows:
                fh.write(f"{t},{e:.16e},{bound:.16e}\n")
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
