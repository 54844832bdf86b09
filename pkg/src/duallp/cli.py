"""Command line front end: config parsing, dispatch and deterministic output.

Config files are flat ``key = value`` text with ``#`` comments.  Keys are the
long flag names with dashes turned into underscores; flags override the file.
Exit codes: 0 success or PASS, 1 computation error, 2 config error, 3 FAIL.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__

COMMANDS = ("minkowski", "solve", "construct", "bounds", "sweep", "verify")
EXIT_OK, EXIT_COMPUTE, EXIT_CONFIG, EXIT_FAIL = 0, 1, 2, 3

DEFAULT_EPS = (0.4, 0.2, 0.1, 0.05)
DEFAULT_A = (1e-5, 1e-4, 1e-3, 1e-2, 1e2, 1e3, 1e4, 1e5)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: int = 2
    p: float = -1.0
    q: float = 0.5
    alpha: float | None = None
    beta: float | None = None
    delta: float | None = None
    eps: tuple[float, ...] = DEFAULT_EPS
    a_sweep: tuple[float, ...] = DEFAULT_A
    N: int = 2048
    grading: int = 1
    tol: float | None = None
    out: str = "out"
    seed: int = 0


def _float_list(text: str) -> tuple[float, ...]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(float(t) for t in items)


def _optional_float(text: str) -> float | None:
    return None if text.strip().lower() in ("", "none", "auto") else float(text)


_CONVERTERS = {
    "command": str.strip,
    "n": int,
    "p": float,
    "q": float,
    "alpha": _optional_float,
    "beta": _optional_float,
    "delta": _optional_float,
    "eps": _float_list,
    "a_sweep": _float_list,
    "N": int,
    "grading": int,
    "tol": _optional_float,
    "out": str.strip,
    "seed": int,
}
assert set(_CONVERTERS) == {f.name for f in dataclasses.fields(RunConfig)}


def parse_config_text(text: str) -> dict:
    """Raw typed values from flat key = value text."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _CONVERTERS:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        try:
            values[key] = _CONVERTERS[key](val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for '{key}': {val!r} ({exc})") from None
    return values


def _validate(cfg: RunConfig) -> RunConfig:
    from .nonuniqueness import choose_parameters, delta_window
    from .sphere_core import ProblemParams

    if cfg.command not in COMMANDS:
        raise ConfigError(f"command must be one of {', '.join(COMMANDS)}; got '{cfg.command}'")
    if cfg.N < 32:
        raise ConfigError(f"N >= 32 violated (N={cfg.N})")
    if cfg.grading < 1:
        raise ConfigError(f"grading >= 1 violated (grading={cfg.grading})")
    if cfg.grading != 1 and cfg.command != "verify":
        raise ConfigError(f"grading = 1 required by '{cfg.command}' (got {cfg.grading})")
    if cfg.tol is not None and not cfg.tol > 0:
        raise ConfigError(f"tol > 0 violated (tol={cfg.tol})")
    if cfg.tol is not None and cfg.command in ("bounds", "verify"):
        raise ConfigError(f"tol is not used by '{cfg.command}'")
    try:
        ProblemParams(cfg.n, cfg.p, cfg.q)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    if cfg.command == "bounds":
        alpha = 0.0 if cfg.alpha is None else cfg.alpha
        beta = 0.0 if cfg.beta is None else cfg.beta
        if not alpha > 1 - cfg.n:
            raise ConfigError(f"alpha > 1-n violated (alpha={alpha}, n={cfg.n})")
        if not beta > -1:
            raise ConfigError(f"beta > -1 violated (beta={beta})")
        if len(cfg.a_sweep) < 4 or any(not a > 0 for a in cfg.a_sweep):
            raise ConfigError("a_sweep needs at least 4 positive values")
        return dataclasses.replace(cfg, alpha=alpha, beta=beta)
    if cfg.command == "verify":
        return cfg

    # construction-type commands need the full parameter set
    try:
        a0, b0, d0 = choose_parameters(cfg.p, cfg.q, cfg.n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    alpha = a0 if cfg.alpha is None else cfg.alpha
    beta = b0 if cfg.beta is None else cfg.beta
    delta = d0 if cfg.delta is None else cfg.delta
    lo, hi = delta_window(cfg.p, cfg.q)
    if not lo < delta < hi:
        raise ConfigError(f"delta outside ({lo:g}, {hi:g}) (delta={delta})")
    if len(set(cfg.eps)) != len(cfg.eps):
        raise ConfigError("eps values must be distinct")
    for e in cfg.eps:
        if not 0 < e < 0.5:
            raise ConfigError(f"eps outside (0, 1/2) (eps={e})")
    try:
        pr = ProblemParams(cfg.n, cfg.p, cfg.q, alpha, beta, delta, cfg.eps[0])
        pr.check_existence_window()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.command == "construct" and len(cfg.eps) < 4:
        raise ConfigError(f"construct needs at least 4 eps values (got {len(cfg.eps)})")
    return dataclasses.replace(cfg, alpha=alpha, beta=beta, delta=delta)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="duallp", description=__doc__.splitlines()[0])
    ap.add_argument("command", nargs="?", choices=COMMANDS)
    ap.add_argument("--config", help="flat key = value config file")
    for name in ("n", "p", "q", "alpha", "beta", "delta", "eps", "a-sweep", "N", "grading", "tol", "out", "seed"):
        ap.add_argument(f"--{name}", dest=name.replace("-", "_"), default=None)
    return ap


def parse_config(argv=None, text: str | None = None) -> RunConfig:
    """RunConfig from command-line flags, an optional config file or raw config text.

    Flag values override file values.
    """
    args = build_parser().parse_args([] if argv is None else list(argv))
    values: dict = {}
    if args.config is not None:
        try:
            values.update(parse_config_text(Path(args.config).read_text()))
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
    if text is not None:
        values.update(parse_config_text(text))
    for key, conv in _CONVERTERS.items():
        raw = getattr(args, key, None)
        if raw is None:
            continue
        try:
            values[key] = conv(raw)
        except ValueError as exc:
            raise ConfigError(f"--{key.replace('_', '-')}: bad value {raw!r} ({exc})") from None
    if "command" not in values:
        raise ConfigError("no command given")
    return _validate(RunConfig(**values))


# ---------------------------------------------------------------------------
# serialization


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)] + [",".join(fmt(v) for v in row) for row in rows]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, dict):
        return {k: _json_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    return x


def write_json(path: Path, obj) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(json.dumps(_json_value(obj), indent=2, sort_keys=True) + "\n")


def manifest_text(cfg: RunConfig) -> str:
    lines = [f"# duallp {__version__}", f"# numpy {np.__version__}"]
    for f in dataclasses.fields(RunConfig):
        v = getattr(cfg, f.name)
        if v is None:
            s = "none"
        elif isinstance(v, tuple):
            s = ",".join(repr(float(x)) for x in v)
        elif isinstance(v, float):
            s = repr(v)
        else:
            s = str(v)
        lines.append(f"{f.name} = {s}")
    return "\n".join(lines) + "\n"


def write_manifest(out: Path, cfg: RunConfig) -> None:
    with open(out / "MANIFEST", "w", newline="\n") as fh:
        fh.write(manifest_text(cfg))


# ---------------------------------------------------------------------------
# commands


def _params(cfg: RunConfig, eps: float):
    from .sphere_core import ProblemParams

    return ProblemParams(cfg.n, cfg.p, cfg.q, cfg.alpha, cfg.beta, cfg.delta, eps)


def run_minkowski(cfg: RunConfig, out: Path) -> int:
    from .minkowski_solver import NewtonOptions, rhs_classical, solve_minkowski
    from .sphere_core import make_grid, monge_ampere

    grid = make_grid(cfg.n, cfg.N)
    opts = NewtonOptions() if cfg.tol is None else NewtonOptions(tol=cfg.tol)
    rows, summary = [], []
    for eps in cfg.eps:
        rhs = rhs_classical(_params(cfg, eps), grid)
        h = solve_minkowski(rhs, opts)
        ma = monge_ampere(h).values
        g = rhs.values.values
        rows += [(eps, t, hv, gv, mv) for t, hv, gv, mv in zip(grid.nodes, h.values, g, ma)]
        summary.append({"eps": eps, "h_min": float(h.values.min()), "h_max": float(h.values.max()),
                        "residual": float(np.max(np.abs(ma - g)) / np.max(g))})
    write_csv(out / "minkowski.csv", ("eps", "theta", "h", "g", "monge_ampere"), rows)
    write_json(out / "minkowski.json", summary)
    return EXIT_OK


def run_sweep(cfg: RunConfig, out: Path) -> int:
    from .minkowski_solver import rhs_classical, solve_minkowski, verify_h_bounds
    from .sphere_core import make_grid

    grid = make_grid(cfg.n, cfg.N)
    eps = sorted(cfg.eps, reverse=True)
    hs = [solve_minkowski(rhs_classical(_params(cfg, e), grid)) for e in eps]
    rep = verify_h_bounds(hs, eps)
    write_csv(out / "h_bounds.csv", ("eps", "h_min", "h_max"), zip(rep.eps, rep.h_min, rep.h_max))
    write_json(out / "h_bounds.json", {"slope_min": rep.slope_min, "slope_max": rep.slope_max,
                                        "sufficient": rep.sufficient, "spans_decade": rep.spans_decade,
                                        "pass": rep.passed})
    return EXIT_OK if rep.passed else EXIT_FAIL


def run_solve(cfg: RunConfig, out: Path) -> int:
    from . import dual_lp_solver as dls
    from .minkowski_solver import rhs_classical, solve_minkowski
    from .nonuniqueness import f_epsilon
    from .sphere_core import make_grid

    grid = make_grid(cfg.n, cfg.N)
    pr = _params(cfg, cfg.eps[0])
    h = solve_minkowski(rhs_classical(pr, grid))
    f = f_epsilon(h, pr)
    opts = dls.MaximizeOptions() if cfg.tol is None else dls.MaximizeOptions(tol=cfg.tol)
    state = dls.maximize(f, cfg.p, cfg.q, None, opts)
    sol = dls.extract_solution(state, f, cfg.p, cfg.q)
    write_csv(out / "solve.csv", ("theta", "f", "h", "H"),
              zip(grid.nodes, f.values, state.g.values, sol.H.values))
    write_json(out / "solve.json", {"eps": pr.epsilon, "J": state.J_value, "c": sol.c,
                                     "residual": sol.residual, "dual_volume": sol.dual_volume_H,
                                     "el_residual": state.el_residual, "converged": state.converged,
                                     "iterations": state.iteration})
    return EXIT_OK if state.converged else EXIT_FAIL


def run_construct(cfg: RunConfig, out: Path) -> int:
    from .nonuniqueness import PipelineOptions, run_pipeline

    opts = PipelineOptions(N=cfg.N) if cfg.tol is None else PipelineOptions(N=cfg.N, residual_tol=cfg.tol)
    res = run_pipeline(cfg.p, cfg.q, cfg.eps, cfg.n, opts, cfg.alpha, cfg.beta, cfg.delta)
    header = ("eps", "h_min", "h_max", "dv_constructed", "dv_variational", "f_l1",
              "residual_constructed", "residual_variational", "s0_pass", "gap")
    rows = [(r.params.epsilon, *r.h_eps_bounds, r.dv_constructed, r.dv_variational, r.f_l1,
             r.residual_constructed, r.residual_variational, r.s0_check, r.solution_gap)
            for r in res.records]
    write_csv(out / "construction.csv", header, rows)
    v = res.verdict
    write_json(out / "verdict.json", {"pass": v.passed, "smallest_eps": v.smallest_eps,
                                       "ratio": v.ratio, "gap": v.gap})
    return EXIT_OK if v.passed else EXIT_FAIL


def run_bounds(cfg: RunConfig, out: Path) -> int:
    from . import ellipsoid_bounds as eb

    n, p, q, al, be = cfg.n, cfg.p, cfg.q, cfg.alpha, cfg.beta
    a_vals = sorted(cfg.a_sweep)
    fits = {}
    for regime, sel in ((eb.A1, [a for a in a_vals if a >= 1e2]), (eb.A3, [a for a in a_vals if a <= 1e-2])):
        if len(sel) >= 4:
            fits[regime] = eb.verify_decay(n, p, q, al, be, regime, sel)
    rows = []
    for row in eb.sweep(a_vals, n, p, q, al, be):
        label = eb.classify(row.a, n, p, q, al, be)
        if label.a_regime == eb.A2:
            pred, lp = math.nan, 0.0
        else:
            pred, lp = eb.predicted_F_exponent(n, p, q, al, be, label.a_regime)
        fit = fits.get(label.a_regime) if (row.a >= 1e2 or row.a <= 1e-2) else None
        rows.append((row.a, row.r, row.F, pred, fit.fitted_slope if fit else math.nan, lp != 0))
    write_csv(out / "fa_sweep.csv", ("a", "r", "F", "predicted_exp", "fitted_exp", "log_flag"), rows)
    ok = all(f.passed or f.degenerate for f in fits.values())
    write_json(out / "fa_fits.json", {k: {"fitted": f.fitted_slope, "predicted": f.predicted_slope,
                                          "log_power": f.log_power, "degenerate": f.degenerate,
                                          "monotone": f.monotone, "pass": f.passed}
                                      for k, f in fits.items()})
    return EXIT_OK if ok else EXIT_FAIL


def run_verify(cfg: RunConfig, out: Path) -> int:
    """Seeded spot checks of the kernel identities, transform identity and first variation."""
    from . import dual_lp_solver as dls
    from .nonuniqueness import transform_identity_check
    from .sphere_core import (
        AxiFn, RotEllipsoid, ball_volume, dual_volume, ellipsoid_body, integrate, make_grid, monge_ampere,
        sphere_area,
    )

    rng = np.random.default_rng(cfg.seed)
    checks = []

    def record(name, err, tol):
        checks.append({"check": name, "error": float(err), "tol": tol, "pass": bool(err <= tol)})

    grid = make_grid(cfg.n, cfg.N, cfg.grading)
    record("integrate_one", abs(integrate(AxiFn.constant(grid)) / sphere_area(cfg.n) - 1), 1e-10)
    ball = ellipsoid_body(RotEllipsoid(1.0, 1.0), grid)
    for q in sorted({0.5, 1.0, 2.0, float(cfg.n)}):
        record(f"dual_volume_ball_q{q:g}", abs(dual_volume(ball, q) / ball_volume(cfg.n) - 1), 1e-10)
    for _ in range(5):
        e = RotEllipsoid(float(rng.uniform(0.5, 2)), float(np.exp(rng.uniform(-1, 1))))
        h = AxiFn(grid, e.support(cfg.n, grid.nodes))
        exact = e.det(cfg.n) ** 2 * h.values ** -(cfg.n + 1)
        record(f"monge_ampere_ellipsoid_r{e.r:.4f}_a{e.a:.4f}",
               np.max(np.abs(monge_ampere(h).values / exact - 1)), 1e-6)
    if grid.spectral:
        for _ in range(3):
            h = _random_convex(grid, rng)
            eps = float(rng.uniform(0.1, 0.4))
            record(f"transform_identity_eps{eps:.4f}", transform_identity_check(h, eps), 1e-6)
            d = AxiFn(grid, np.cos(2 * grid.nodes) * rng.uniform(-1, 1) + rng.uniform(-1, 1))
            q = float(rng.uniform(0.5, 4))
            fd, formula = dls.variation_check(h, d, q)
            record(f"first_variation_q{q:.4f}", abs(fd - formula) / abs(formula), 1e-5)
    write_csv(out / "verify.csv", ("check", "error", "tol", "pass"),
              [(c["check"], c["error"], c["tol"], c["pass"]) for c in checks])
    ok = all(c["pass"] for c in checks)
    write_json(out / "verify.json", {"pass": ok, "checks": checks})
    return EXIT_OK if ok else EXIT_FAIL


def _random_convex(grid, rng):
    from .sphere_core import AxiFn, is_convex

    while True:
        c = rng.uniform(-0.08, 0.08, size=3)
        th = grid.nodes
        h = AxiFn(grid, 1 + c[0] * np.cos(2 * th) + c[1] * np.cos(4 * th) + c[2] * np.cos(6 * th))
        if is_convex(h):
            return h


RUNNERS = {
    "minkowski": run_minkowski,
    "solve": run_solve,
    "construct": run_construct,
    "bounds": run_bounds,
    "sweep": run_sweep,
    "verify": run_verify,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_manifest(out, cfg)
    except OSError as exc:
        print(f"cannot write output directory {out}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    try:
        code = RUNNERS[cfg.command](cfg, out)
    except Exception as exc:  # any numerical failure maps to exit 1
        print(f"computation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    print(f"{cfg.command}: {'PASS' if code == EXIT_OK else 'FAIL'} (outputs in {out})")
    return code
