"""Benchmark-scale comparison of the four penalty families.

Reproduces the flagship comparison: 160 samples, 410 binary + 1000
quantitative features, true rank 10, SNR 1. Each family is swept over its
automatic strength path; the table reports each family's best point
against the ground truth, next to the full-information baseline that sees
the noise-free-link data. Runs for tens of minutes at full scale.

    python demos/06_benchmark_table.py           # small stand-in (~1 min)
    python demos/06_benchmark_table.py --full    # the real thing

The small stand-in keeps the shape of the experiment (same families, same
automatic paths) on a 40x(10+60) problem so the script stays runnable as
a smoke test.
"""

import argparse
import time

import numpy as np

from gsca.experiments import (TABLE_FAMILIES, best_row, family_label,
                              full_information_row, make_benchmark_data,
                              sweep_lambda, table2_experiment)

parser = argparse.ArgumentParser()
parser.add_argument("--full", action="store_true",
                    help="run at benchmark scale (slow)")
parser.add_argument("--seed", type=int, default=3)
args = parser.parse_args()

t0 = time.perf_counter()
if args.full:
    res = table2_experiment(args.seed, n_lambda=30, eps=1e-8)
    best, true_sv = res["best"], res["true_singular_values"]
else:
    kwargs = dict(I=40, J1=10, J2=60, R=4)
    data, truth = make_benchmark_data(args.seed, **kwargs)
    true_sv = np.linalg.svd(truth.Z, compute_uv=False)
    best = {}
    for family, hyper in TABLE_FAMILIES:
        rows = sweep_lambda(data, truth, family, hyper, n_lambda=12,
                            eps=1e-8, seed=args.seed)
        best[(family, hyper)] = best_row(rows)
    best["full_information"] = full_information_row(data, truth, args.seed,
                                                    truth.params.R)

print("true rank %d spectrum head: %s"
      % (int((true_sv > 1e-9).sum()), true_sv[:5].round(1)))
print("%-16s %9s %6s %11s %9s" %
      ("model", "lambda*", "rank", "rmse(Theta)", "sigma2"))
for key, row in best.items():
    label = row["label"] if "label" in row else family_label(*key)
    lam = row.get("lambda")
    print("%-16s %9s %6d %11.4f %9s"
          % (label, "-" if lam is None else "%.2f" % lam, row["rank"],
             row["rmse_theta"],
             "-" if row["sigma2_hat"] != row["sigma2_hat"]
             else "%.4f" % row["sigma2_hat"]))
print("elapsed: %.1fs" % (time.perf_counter() - t0))
