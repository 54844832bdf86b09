"""Small-eps behaviour of the classical solutions h_eps and of the dual volume of H_eps.

Extends the eps sweep well below the acceptance range to show where h_eps
goes: its envelope keeps moving, so at the sweep scale the dual volume of
H_eps does not yet follow its asymptotic power law.  The pulled-back
support function has a layer of width ~eps at the pole, so the grid is
refined to at least 160/eps nodes per eps.  For n >= 3 the Newton solve
is dense, so keep eps >= 0.02 there.

    python3 scripts/eps_asymptotics.py
"""
import argparse
import math
from dataclasses import dataclass

import numpy as np

from duallp.minkowski_solver import rhs_classical, solve_minkowski
from duallp.nonuniqueness import choose_parameters, predicted_dv_slope, transform_support
from duallp.sphere_core import ProblemParams, dual_volume_from_support, make_grid


@dataclass(frozen=True)
class Config:
    n: int = 2
    p: float = -1.0
    q: float = 0.5
    eps: tuple = (0.4, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005)
    N: int = 2048


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name in ("n", "N"):
        ap.add_argument(f"--{name}", type=int, default=getattr(Config, name))
    for name in ("p", "q"):
        ap.add_argument(f"--{name}", type=float, default=getattr(Config, name))
    cfg = Config(**vars(ap.parse_args()))
    alpha, beta, delta = choose_parameters(cfg.p, cfg.q, cfg.n)
    pred, log_flag = predicted_dv_slope(cfg.p, cfg.q, delta)
    print(f"n={cfg.n} p={cfg.p} q={cfg.q} delta={delta}; predicted dv exponent {pred:.4f}"
          + (" (with |log eps|)" if log_flag else ""))
    print(f"{'eps':>8}{'N':>7}{'h_min':>10}{'h_max':>10}{'dv':>12}{'local slope':>13}")
    prev = None
    for eps in cfg.eps:
        N = max(cfg.N, 2 ** math.ceil(math.log2(160 / eps)))
        grid = make_grid(cfg.n, N)
        pr = ProblemParams(cfg.n, cfg.p, cfg.q, alpha, beta, delta, eps)
        h = solve_minkowski(rhs_classical(pr, grid))
        dv = dual_volume_from_support(transform_support(h, eps, cfg.p, cfg.q, delta), cfg.q)
        local = "" if prev is None else f"{np.log(dv / prev[1]) / np.log(eps / prev[0]):13.4f}"
        print(f"{eps:8.3g}{N:7d}{h.values.min():10.4f}{h.values.max():10.4f}{dv:12.5g}{local}")
        prev = (eps, dv)


if __name__ == "__main__":
    main()
