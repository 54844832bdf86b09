"""Two solutions with the same data: an anisotropic rescaling construction.

For each eps, the classical Minkowski solution h_eps is pulled back through
M_eps = diag(eps, ..., eps, 1) to a solution H_eps of the dual L_p equation
with data f_eps.  Its dual volume collapses as eps -> 0, while the
variational solution for the same f_eps keeps a dual volume bounded below,
so for small eps the two solutions differ.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import dual_lp_solver as dls
from .minkowski_solver import rhs_classical, solve_minkowski, verify_h_bounds
from .sphere_core import (
    AxiFn,
    ProblemParams,
    ball_volume,
    dual_volume_from_support,
    gradient_map,
    integrate,
    make_grid,
    monge_ampere,
)


class PipelineError(RuntimeError):
    def __init__(self, stage: str, eps: float, cause: Exception):
        super().__init__(f"stage '{stage}' failed at eps={eps:g}: {cause}")
        self.stage, self.eps, self.cause = stage, eps, cause


# ---------------------------------------------------------------------------
# parameters


def _positivity_window(n: int, p: float, q: float) -> bool:
    lhs = 1 / p + 1 / q
    return 1 + n / p < lhs < n / q - 1


def delta_window(p: float, q: float) -> tuple[float, float]:
    """Open interval of admissible delta for the construction."""
    if q < 1:
        return 1 - q, -p
    if q == 1:
        return 0.0, -p
    return -p * (q - 1) / q, -p


def choose_parameters(p: float, q: float, n: int = 2) -> tuple[float, float, float]:
    """(alpha, beta, delta) for the construction at indices p < 0 < q; delta is the window midpoint."""
    if not p < 0 < q:
        raise ValueError(f"p < 0 < q violated (p={p}, q={q})")
    if q < 1 and not p < q - 1:
        raise ValueError(f"p < q-1 violated (p={p}, q-1={q - 1})")
    lo, hi = delta_window(p, q)
    delta = 0.5 * (lo + hi)
    if q <= 1 or _positivity_window(n, p, q):
        return 0.0, 0.0, delta
    pr = ProblemParams(n, p, q)
    alpha = beta = 0.0
    while not alpha > pr.alpha_floor():
        alpha += 2.0
    while not beta > pr.beta_floor():
        beta += 2.0
    return alpha, beta, delta


# ---------------------------------------------------------------------------
# transforms


def pulled_angle(theta, eps: float):
    """theta_eps with tan(theta_eps) = tan(theta) / eps, kept in [0, pi/2]."""
    theta = np.asarray(theta, dtype=float)
    return np.arctan2(np.sin(theta), eps * np.cos(theta))


def _stretch(theta, eps):
    # |M_eps^{-1} x| = sqrt(sin^2 / eps^2 + cos^2)
    return np.hypot(np.sin(theta) / eps, np.cos(theta))


def transform_support(h: AxiFn, eps: float, p: float, q: float, delta: float) -> AxiFn:
    """H_eps(x) = eps^{(q+delta-1)/(q-p)} |M_eps^{-1} x| h(x_eps)."""
    th = h.grid.nodes
    pre = eps ** ((q + delta - 1) / (q - p))
    return h.like(pre * _stretch(th, eps) * h.at(pulled_angle(th, eps)))


def f_epsilon(h: AxiFn, params: ProblemParams) -> AxiFn:
    """Data f_eps for which H_eps solves the dual L_p equation exactly."""
    n, p, q = params.n, params.p, params.q
    eps, delta = params.epsilon, params.delta
    a, b = params.alpha, params.beta
    th = h.grid.nodes
    te = pulled_angle(th, eps)
    s, c = np.sin(th), np.cos(th)
    hv = h.at(te)
    d1 = h.at(te, 1)
    xi_t = d1 * np.cos(te) + hv * np.sin(te)
    xi_n = hv * np.cos(te) - d1 * np.sin(te)
    nx = np.hypot(s, eps * c)
    ngrad = np.hypot(xi_t, eps * xi_n)
    f = hv ** (1 - p) * s**a * c**b * nx ** (delta - a - n + 1) * ngrad ** (q - n)
    return h.like(f)


def transform_identity_check(h: AxiFn, eps: float) -> float:
    """Max relative mismatch in MA(u)(x) = MA(h)(x_eps) (det M^{-1})^2 / |M^{-1} x|^{n+1}."""
    n = h.grid.n
    th = h.grid.nodes
    te = pulled_angle(th, eps)
    stretch = _stretch(th, eps)
    u = h.like(stretch * h.at(te))
    lhs = monge_ampere(u).values
    r1 = h.at(te, 2) + h.at(te)
    d1 = h.at(te, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.where(te > 0, d1 / np.tan(te) + h.at(te), r1)
    rhs = r1 * r2 ** (n - 2) * eps ** (2 * (1 - n)) / stretch ** (n + 1)
    return float(np.max(np.abs(lhs - rhs) / np.abs(rhs)))


# ---------------------------------------------------------------------------
# S0 region


@dataclass(frozen=True)
class S0Region:
    threshold: float
    C: float
    mask: np.ndarray


def s0_region(theta: np.ndarray, C: float) -> S0Region:
    if C < 1:
        raise ValueError(f"envelope constant must be >= 1, got {C}")
    thr = math.cos(math.pi / 4 + 0.5 * math.acos(C**-2))
    return S0Region(thr, C, np.cos(theta) < thr)


def s0_checks(h_list, C: float | None = None) -> tuple[S0Region, bool, list[bool]]:
    """|xi'| > C^{-1}/2 on {cos(theta) < threshold} for every h_eps in the sweep."""
    if C is None:
        C = max(max(float(np.max(h.values)), 1.0 / float(np.min(h.values))) for h in h_list)
    grid = h_list[0].grid
    region = s0_region(grid.nodes, C)
    per = []
    for h in h_list:
        xt, _ = gradient_map(h)
        per.append(bool(np.all(np.abs(xt.values[region.mask]) > 0.5 / C)))
    return region, all(per), per


# ---------------------------------------------------------------------------
# decay laws


def predicted_dv_slope(p: float, q: float, delta: float) -> tuple[float, bool]:
    """Exponent of eps in the dual-volume bound for H_eps, and whether a |log eps| factor rides along."""
    if q < 1:
        return q * (q + delta - 1) / (q - p), False
    if q == 1:
        return delta / (1 - p), True
    return (q * delta + p * (q - 1)) / (q - p), False


def _slope(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


@dataclass(frozen=True)
class DecayReport:
    dv_slope: float
    dv_slope_raw: float
    predicted: float
    log_corrected: bool
    dv_pass: bool
    f_l1_slope: float
    f_l1_pass: bool
    lower_bound_pass: bool
    dv_variational_slope: float


def decay_checks(records, rel_tol: float = 0.15) -> DecayReport:
    if len(records) < 4:
        raise ValueError(f"decay checks need at least 4 eps values, got {len(records)}")
    pr = records[0].params
    eps = np.array([r.params.epsilon for r in records])
    dv = np.array([r.dv_constructed for r in records])
    pred, log_flag = predicted_dv_slope(pr.p, pr.q, pr.delta)
    raw = _slope(eps, dv)
    fitted = _slope(eps, dv / np.abs(np.log(eps))) if log_flag else raw
    f_l1 = np.array([r.f_l1 for r in records])
    fs = _slope(eps, f_l1)
    n = pr.n
    kap = ball_volume(n)
    lb = all(
        r.dv_variational >= (r.f_l1 / (n * kap)) ** (pr.q / (pr.q - pr.p)) * kap * (1 - 1e-12)
        for r in records
    )
    return DecayReport(
        dv_slope=fitted,
        dv_slope_raw=raw,
        predicted=pred,
        log_corrected=log_flag,
        dv_pass=abs(fitted - pred) <= rel_tol * abs(pred),
        f_l1_slope=fs,
        f_l1_pass=fs >= -0.05,
        lower_bound_pass=lb,
        dv_variational_slope=_slope(eps, np.array([r.dv_variational for r in records])),
    )


# ---------------------------------------------------------------------------
# pipeline


@dataclass(frozen=True)
class PipelineOptions:
    N: int = 2048
    residual_tol: float = 1e-3
    gap_min: float = 0.2
    ratio_min: float = 2.0
    maximize: dls.MaximizeOptions = dls.MaximizeOptions()
    newton: dls.NewtonConfig = dls.NewtonConfig()


@dataclass(frozen=True, eq=False)
class ConstructionRecord:
    params: ProblemParams
    h_eps_bounds: tuple[float, float]
    dv_constructed: float
    dv_variational: float
    f_l1: float
    residual_constructed: float
    residual_variational: float
    s0_check: bool
    solution_gap: float
    newton_shift: float
    identity_mismatch: float
    f_positive: bool
    h_eps: AxiFn = field(repr=False)
    H_eps: AxiFn = field(repr=False)
    H_var: AxiFn = field(repr=False)
    f_eps: AxiFn = field(repr=False)
    maximizer: dls.MaximizerState = field(repr=False)

    @property
    def ratio(self) -> float:
        return self.dv_variational / self.dv_constructed


@dataclass(frozen=True)
class Verdict:
    passed: bool
    smallest_eps: float
    ratio: float
    gap: float
    residuals_ok: bool
    ratio_increasing: bool
    reasons: tuple[str, ...]


def _stage(name, eps, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except Exception as exc:  # annotate and propagate
        raise PipelineError(name, eps, exc) from exc


def construct_one(params: ProblemParams, grid, opts: PipelineOptions = PipelineOptions()) -> ConstructionRecord:
    eps, p, q = params.epsilon, params.p, params.q
    rhs = _stage("rhs", eps, rhs_classical, params, grid)
    h = _stage("minkowski", eps, solve_minkowski, rhs)
    H = _stage("transform", eps, transform_support, h, eps, p, q, params.delta)
    f = _stage("f_eps", eps, f_epsilon, h, params)
    res_c = _stage("residual_constructed", eps, dls.residual, H, f, p, q)
    Hn = _stage("newton_check", eps, dls.newton_local_solve, f, p, q, H, opts.newton)
    state = _stage("maximize", eps, dls.maximize, f, p, q, None, opts.maximize)
    sol = _stage("extract", eps, dls.extract_solution, state, f, p, q)
    mismatch = _stage("transform_identity", eps, transform_identity_check, h, eps)
    gap = float(np.max(np.abs(H.values - sol.H.values)) / np.max(np.abs(sol.H.values)))
    return ConstructionRecord(
        params=params,
        h_eps_bounds=(float(np.min(h.values)), float(np.max(h.values))),
        dv_constructed=dual_volume_from_support(H, q),
        dv_variational=sol.dual_volume_H,
        f_l1=integrate(f),
        residual_constructed=res_c,
        residual_variational=sol.residual,
        s0_check=False,
        solution_gap=gap,
        newton_shift=float(np.max(np.abs(Hn.values - H.values)) / np.max(H.values)),
        identity_mismatch=mismatch,
        f_positive=bool(np.all(f.values > 0)),
        h_eps=h,
        H_eps=H,
        H_var=sol.H,
        f_eps=f,
        maximizer=state,
    )


def verdict(records, opts: PipelineOptions = PipelineOptions()) -> Verdict:
    last = min(records, key=lambda r: r.params.epsilon)
    ordered = sorted(records, key=lambda r: -r.params.epsilon)
    ratios = [r.ratio for r in ordered]
    increasing = all(b > a for a, b in zip(ratios, ratios[1:]))
    res_ok = last.residual_constructed <= opts.residual_tol and last.residual_variational <= opts.residual_tol
    reasons = []
    if not res_ok:
        reasons.append("residual above tolerance at smallest eps")
    if last.solution_gap < opts.gap_min:
        reasons.append(f"solution gap {last.solution_gap:.3g} < {opts.gap_min}")
    if last.ratio < opts.ratio_min:
        reasons.append(f"dual-volume ratio {last.ratio:.3g} < {opts.ratio_min}")
    if not increasing:
        reasons.append("dual-volume ratio not strictly increasing as eps decreases")
    return Verdict(
        passed=not reasons,
        smallest_eps=last.params.epsilon,
        ratio=last.ratio,
        gap=last.solution_gap,
        residuals_ok=res_ok,
        ratio_increasing=increasing,
        reasons=tuple(reasons),
    )


@dataclass(frozen=True, eq=False)
class PipelineResult:
    records: list[ConstructionRecord]
    verdict: Verdict
    decay: DecayReport | None
    h_bounds: object
    s0: S0Region
    s0_pass: bool


def run_pipeline(p: float, q: float, eps_list, n: int = 2, opts: PipelineOptions = PipelineOptions(),
                 alpha: float | None = None, beta: float | None = None,
                 delta: float | None = None) -> PipelineResult:
    """Construct, solve and compare both solutions over an eps sweep."""
    a0, b0, d0 = choose_parameters(p, q, n)
    alpha = a0 if alpha is None else alpha
    beta = b0 if beta is None else beta
    delta = d0 if delta is None else delta
    grid = make_grid(n, opts.N)
    records = []
    for eps in sorted(eps_list, reverse=True):
        params = ProblemParams(n, p, q, alpha, beta, delta, eps)
        records.append(construct_one(params, grid, opts))
    h_list = [r.h_eps for r in records]
    region, s0_ok, per = s0_checks(h_list)
    records = [
        replace(r, s0_check=ok) for r, ok in zip(records, per)
    ]
    hb = verify_h_bounds(h_list, [r.params.epsilon for r in records])
    decay = decay_checks(records) if len(records) >= 4 else None
    return PipelineResult(records, verdict(records, opts), decay, hb, region, s0_ok)
