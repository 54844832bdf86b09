"""Fitted vs predicted decay exponents of F(A) over the full regime matrix.

    python3 scripts/bounds_sweep.py            # table to stdout
    python3 scripts/bounds_sweep.py --csv fa_matrix.csv
"""
import argparse
from dataclasses import dataclass

from duallp.cli import write_csv
from duallp.ellipsoid_bounds import A1, A3, band_ratio, classify, verify_decay

A1_SWEEP = (1e2, 1e3, 1e4, 1e5)
A3_SWEEP = (1e-2, 1e-3, 1e-4, 1e-5)


@dataclass(frozen=True)
class Config:
    dims: tuple = (2, 3)
    ps: tuple = (-1.0, -2.0)
    csv: str | None = None


def cases(cfg: Config):
    # one sign-branch offset s per row: p + alpha + n - 1 = s (A1) or beta + p + 1 = s (A3)
    for n in cfg.dims:
        for p in cfg.ps:
            for s in (0.5, 0.0, -0.5):
                for q in (0.5, 1.0, 2.0):
                    yield n, p, q, s - p - n + 1, 0.0, A1
                for q in (n - 1.5, n - 1.0, n):
                    yield n, p, q, 0.0, s - p - 1, A3


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--csv", default=None)
    cfg = Config(csv=ap.parse_args().csv)
    head = ("regime", "q_branch", "sign", "n", "p", "q", "alpha", "beta", "predicted", "fitted", "log_power",
            "band_ratio", "pass")
    rows = []
    print(("{:>9}" * len(head)).format(*head))
    for n, p, q, alpha, beta, regime in cases(cfg):
        if not (alpha > 1 - n and beta > -1):
            continue
        fit = verify_decay(n, p, q, alpha, beta, regime, A1_SWEEP if regime == A1 else A3_SWEEP)
        lab = classify(A1_SWEEP[-1] if regime == A1 else A3_SWEEP[-1], n, p, q, alpha, beta)
        row = (regime, lab.q_branch, lab.sign_branch, n, p, q, alpha, beta, fit.predicted_slope,
               fit.fitted_slope, fit.log_power, band_ratio(n, p, q, alpha, beta), fit.passed)
        rows.append(row)
        print("{:>9}{:>9}{:>9}{:>9}{:9.2f}{:9.2f}{:9.2f}{:9.2f}{:9.3f}{:9.3f}{:9.2f}{:9.2f}{:>9}".format(
            *row[:-1], str(row[-1])))
    print(f"{sum(r[-1] for r in rows)}/{len(rows)} fits within 15% + 0.05")
    if cfg.csv:
        write_csv(cfg.csv, head, rows)


if __name__ == "__main__":
    main()
