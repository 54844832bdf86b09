"""Run the two-solution construction for one (n, p, q) and print the per-eps table.

    python3 scripts/run_pipeline.py --n 2 --p -1 --q 0.5
    python3 scripts/run_pipeline.py --n 3 --p -1 --q 2 --N 1024 --out out/n3
"""
import argparse
from dataclasses import dataclass
from pathlib import Path

from duallp.cli import write_csv, write_json
from duallp.nonuniqueness import PipelineOptions, run_pipeline


@dataclass(frozen=True)
class Config:
    n: int = 2
    p: float = -1.0
    q: float = 0.5
    eps: tuple = (0.4, 0.2, 0.1, 0.05)
    N: int = 2048
    out: str | None = None


def parse() -> Config:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=Config.n)
    ap.add_argument("--p", type=float, default=Config.p)
    ap.add_argument("--q", type=float, default=Config.q)
    ap.add_argument("--eps", type=lambda s: tuple(float(x) for x in s.split(",")), default=Config.eps)
    ap.add_argument("--N", type=int, default=Config.N)
    ap.add_argument("--out", default=None)
    return Config(**vars(ap.parse_args()))


def main() -> None:
    cfg = parse()
    res = run_pipeline(cfg.p, cfg.q, cfg.eps, n=cfg.n, opts=PipelineOptions(N=cfg.N))
    pr = res.records[0].params
    print(f"n={pr.n} p={pr.p} q={pr.q} alpha={pr.alpha} beta={pr.beta} delta={pr.delta} N={cfg.N}")
    head = ("eps", "h_min", "h_max", "dv_con", "dv_var", "ratio", "gap", "f_l1", "res_con", "res_var", "S0")
    print(("{:>9}" * len(head)).format(*head))
    rows = []
    for r in res.records:
        row = (r.params.epsilon, *r.h_eps_bounds, r.dv_constructed, r.dv_variational, r.ratio,
               r.solution_gap, r.f_l1, r.residual_constructed, r.residual_variational, r.s0_check)
        rows.append(row)
        print(("{:9.3g}" * (len(row) - 1)).format(*row[:-1]) + f"{str(row[-1]):>9}")
    d, v = res.decay, res.verdict
    print(f"dv_constructed slope {d.dv_slope:.3f} (predicted {d.predicted:.3f}), "
          f"f_l1 slope {d.f_l1_slope:.3f}, dv_variational slope {d.dv_variational_slope:.3f}")
    print(f"h envelope slopes {res.h_bounds.slope_min:.3f} / {res.h_bounds.slope_max:.3f}")
    print(f"verdict {'PASS' if v.passed else 'FAIL'}: {'; '.join(v.reasons) or 'all checks met'}")
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "pipeline.csv", head, rows)
        write_json(out / "verdict.json", {"pass": v.passed, "ratio": v.ratio, "gap": v.gap,
                                           "reasons": list(v.reasons)})


if __name__ == "__main__":
    main()
