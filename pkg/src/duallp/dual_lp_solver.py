"""Variational solver for H^{1-p} |grad H|^{q-n} det(hess H + H I) = f.

The maximization works on normalized convex support functions: each
candidate is rescaled so that its q-th dual volume equals kappa_n, and
accepted only if J[h] = int f h^p strictly increases.  Search directions are
a Newton step for the Euler-Lagrange equation when it ascends, and a
smoothed gradient otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .sphere_core import (
    AxiBody,
    AxiFn,
    alexandrov_radial,
    ball_volume,
    body_from_support,
    convexify,
    dual_volume_from_support,
    integrate,
    is_convex,
    monge_ampere,
    principal_radii,
)


class MaximizationError(RuntimeError):
    pass


class NewtonDivergence(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# equation operator


def _operator_parts(H: AxiFn, p: float, q: float):
    grid = H.grid
    n = grid.n
    h = H.values
    d1 = H.derivative(1)
    r1, r2 = principal_radii(H)
    xi2 = d1**2 + h**2
    e = 0.5 * (q - n)
    F = h ** (1 - p) * xi2**e * r1 * r2 ** (n - 2)
    return h, d1, r1, r2, xi2, e, F


def equation_operator(H: AxiFn, p: float, q: float) -> AxiFn:
    """H^{1-p} |grad H|^{q-n} (H'' + H)(H' cot + H)^{n-2} at every node."""
    return H.like(_operator_parts(H, p, q)[-1])


def _operator_jacobian(H: AxiFn, p: float, q: float):
    grid = H.grid
    n = grid.n
    h, d1, r1, r2, xi2, e, F = _operator_parts(H, p, q)
    cot = 1.0 / np.tan(grid.nodes)
    base = h ** (1 - p) * xi2**e
    r2m = r2 ** (n - 2)
    r2m1 = (n - 2) * r2 ** (n - 3) if n > 2 else np.zeros_like(r2)
    c2 = base * r2m
    c1 = 2 * e * d1 * F / xi2 + base * r1 * r2m1 * cot
    c0 = (1 - p) * F / h + 2 * e * h * F / xi2 + base * r2m + base * r1 * r2m1
    jac = c0[:, None] * np.eye(grid.size) + c1[:, None] * grid.diff_matrix(1)
    jac += c2[:, None] * grid.diff_matrix(2)
    return F, jac


def _admissible(f: AxiFn) -> np.ndarray:
    return f.values > 1e-12 * np.max(f.values)


def residual(H: AxiFn, f: AxiFn, p: float, q: float) -> float:
    """Relative sup-norm defect of the equation on nodes where f is not negligible."""
    if not is_convex(H):
        raise ValueError("residual needs a convex positive support function")
    F = equation_operator(H, p, q).values
    fv = f.values
    mask = _admissible(f)
    den = np.maximum(fv, 1e-12 * np.max(fv))
    return float(np.max(np.abs(F - fv)[mask] / den[mask]))


# ---------------------------------------------------------------------------
# functional and constraint


def functional_J(g: AxiFn, f: AxiFn, p: float) -> float:
    """J[g] = int f g^p."""
    if np.any(g.values <= 0):
        i = int(np.flatnonzero(g.values <= 0)[0])
        raise ValueError(f"J needs g > 0; node {i} has g = {g.values[i]:.6g}")
    return integrate(f.like(f.values * g.values**p))


def body_dual_volume(g: AxiFn, q: float) -> float:
    """q-th dual volume of the Alexandrov body of g.

    Convex g is its own support function and goes through the Gauss-map
    formula; anything else is integrated over the Alexandrov radial function.
    """
    if is_convex(g):
        return dual_volume_from_support(g, q)
    rho = alexandrov_radial(g).values
    return integrate(g.like(rho**q)) / g.grid.n


def normalize_to_constraint(g: AxiFn, q: float) -> AxiFn:
    """lambda * g with lambda = (kappa_n / V_q(K_g))^{1/q}."""
    kap = ball_volume(g.grid.n)
    lam = (kap / body_dual_volume(g, q)) ** (1.0 / q)
    return g.like(lam * g.values)


# ---------------------------------------------------------------------------
# first variation


def variation_check(h: AxiFn, direction: AxiFn, q: float, step: float = 1e-3) -> tuple[float, float]:
    """Fourth-order central difference of V_q(K_{h + t d}) at t = 0 and the Gauss-map formula.

    The difference quotient integrates Alexandrov radial functions, so it is
    independent of the Gauss-map quadrature used by the formula.
    """
    n = h.grid.n

    def vq(t):
        rho = alexandrov_radial(h.like(h.values + t * direction.values)).values
        return integrate(h.like(rho**q)) / n

    s = step
    fd = (vq(-2 * s) - 8 * vq(-s) + 8 * vq(s) - vq(2 * s)) / (12 * s)
    xi = np.hypot(h.values, h.derivative(1))
    formula = q / n * integrate(h.like(direction.values * xi ** (q - n) * monge_ampere(h).values))
    return fd, formula


# ---------------------------------------------------------------------------
# Newton solver for the equation


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-8
    # a stalled line search below this residual is round-off, not divergence
    accept: float = 1e-6
    max_iter: int = 60
    max_halvings: int = 40
    armijo: float = 1e-4


def _scaled_defect(H: AxiFn, f: AxiFn, p: float, q: float, den: np.ndarray):
    F = equation_operator(H, p, q).values
    return (F - f.values) / den


def newton_local_solve(f: AxiFn, p: float, q: float, H0: AxiFn, cfg: NewtonConfig = NewtonConfig()) -> AxiFn:
    """Damped Newton for the discretized equation started at H0."""
    if not is_convex(H0):
        raise ValueError("Newton start must be convex and positive")
    den = np.maximum(f.values, 1e-12 * np.max(f.values))
    mask = _admissible(f)
    H = H0
    r = _scaled_defect(H, f, p, q, den)
    norm = float(np.linalg.norm(r))
    for _ in range(cfg.max_iter):
        if np.max(np.abs(r[mask])) <= cfg.tol:
            return H
        F, jac = _operator_jacobian(H, p, q)
        try:
            step = np.linalg.solve(jac, f.values - F)
        except np.linalg.LinAlgError as exc:
            raise NewtonDivergence(f"singular Jacobian: {exc}") from exc
        t = 1.0
        for _ in range(cfg.max_halvings):
            cand = H.like(H.values + t * step)
            if is_convex(cand):
                cr = _scaled_defect(cand, f, p, q, den)
                cnorm = float(np.linalg.norm(cr))
                if cnorm <= (1 - cfg.armijo * t) * norm:
                    break
            t *= 0.5
        else:
            if np.max(np.abs(r[mask])) <= cfg.accept:
                return H
            raise NewtonDivergence(
                f"line search failed; residual {np.max(np.abs(r[mask])):.3e}"
            )
        H, r, norm = cand, cr, cnorm
    if np.max(np.abs(r[mask])) <= cfg.tol:
        return H
    raise NewtonDivergence(f"no convergence in {cfg.max_iter} steps; residual {np.max(np.abs(r[mask])):.3e}")


# ---------------------------------------------------------------------------
# maximization


@dataclass(frozen=True)
class MaximizeOptions:
    tol: float = 1e-4
    max_iter: int = 500
    max_halvings: int = 60
    stall: float = 1e-12
    use_newton: bool = True


@dataclass
class MaximizerState:
    g: AxiFn
    log_g: np.ndarray
    J_value: float
    constraint_gap: float
    iteration: int
    el_residual: float
    converged: bool
    J_history: list[float] = field(default_factory=list)
    gap_history: list[float] = field(default_factory=list)
    step_kinds: list[str] = field(default_factory=list)
    _body: AxiBody | None = field(default=None, repr=False)

    @property
    def body(self) -> AxiBody:
        if self._body is None:
            self._body = body_from_support(self.g)
        return self._body


def _el_defect(h: AxiFn, f: AxiFn, p: float, q: float, J: float):
    n = h.grid.n
    c = J / (n * ball_volume(n))
    F = equation_operator(h, p, q).values
    mask = _admissible(f)
    rel = np.zeros_like(F)
    rel[mask] = c * F[mask] / f.values[mask] - 1.0
    return c, F, rel, float(np.max(np.abs(rel[mask])))


def _smoothed_gradient(h: AxiFn, f: AxiFn, p: float, c: float, F: np.ndarray) -> np.ndarray:
    # d log J along h -> h(1 + psi) is proportional to int psi h^p (cF - f) (up to -p/J > 0)
    grid = h.grid
    w = h.values**p * (c * F - f.values)
    r1, _ = principal_radii(h)
    mu = float(np.mean(h.values / np.maximum(r1, 1e-300)))
    coef = grid.coefficients(w) / (1.0 + mu * grid.wavenumbers**2)
    psi = grid.synthesize(coef)
    scale = np.max(np.abs(psi))
    return psi / scale if scale > 0 else psi


def _line_search(h, psi, f, p, q, J, t0, halvings):
    t = t0
    for _ in range(halvings):
        fac = 1.0 + t * psi
        if np.all(fac > 0):
            cand = h.like(h.values * fac)
            if is_convex(cand):
                cand = normalize_to_constraint(cand, q)
                Jc = functional_J(cand, f, p)
                if Jc > J:
                    return cand, Jc
        t *= 0.5
    return None, J


def maximize(f: AxiFn, p: float, q: float, init: AxiFn | None = None,
             opts: MaximizeOptions = MaximizeOptions()) -> MaximizerState:
    """Maximize int f g^p over normalized rotationally symmetric even bodies."""
    if np.any(f.values < 0) or integrate(f) <= 0:
        raise ValueError("f must be nonnegative with positive integral")
    grid = f.grid
    n = grid.n
    kap = ball_volume(n)
    g0 = init if init is not None else AxiFn.constant(grid)
    if np.any(g0.values <= 0):
        raise ValueError("initial g must be positive")
    h = normalize_to_constraint(convexify(g0), q)
    J = functional_J(h, f, p)
    hist_J, hist_gap, kinds = [J], [dual_volume_from_support(h, q) / kap - 1], ["init"]
    converged = False
    res = math.inf
    it = 0
    for it in range(1, opts.max_iter + 1):
        c, F, rel, res = _el_defect(h, f, p, q, J)
        if res <= opts.tol:
            converged = True
            break
        cand = None
        if opts.use_newton:
            H = h.like(c ** (1.0 / (q - p)) * h.values)
            try:
                Fh, jac = _operator_jacobian(H, p, q)
                delta = np.linalg.solve(jac, f.values - Fh)
                cand, Jc = _line_search(h, delta / H.values, f, p, q, J, 1.0, 30)
                kind = "newton"
            except np.linalg.LinAlgError:
                cand = None
        if cand is None:
            psi = _smoothed_gradient(h, f, p, c, F)
            cand, Jc = _line_search(h, psi, f, p, q, J, 0.5, opts.max_halvings)
            kind = "gradient"
        if cand is None:
            raise MaximizationError(
                f"line search exhausted at iteration {it}: J={J:.12g}, EL residual={res:.3e}"
            )
        gain = (Jc - J) / abs(J)
        h, J = cand, Jc
        hist_J.append(J)
        hist_gap.append(dual_volume_from_support(h, q) / kap - 1)
        kinds.append(kind)
        if gain < opts.stall:
            c, F, rel, res = _el_defect(h, f, p, q, J)
            converged = res <= opts.tol
            break
    else:
        c, F, rel, res = _el_defect(h, f, p, q, J)
        converged = res <= opts.tol
    return MaximizerState(
        g=h,
        log_g=np.log(h.values),
        J_value=J,
        constraint_gap=hist_gap[-1],
        iteration=it,
        el_residual=res,
        converged=converged,
        J_history=hist_J,
        gap_history=hist_gap,
        step_kinds=kinds,
    )


# ---------------------------------------------------------------------------
# solution extraction


@dataclass(frozen=True, eq=False)
class SolutionRecord:
    h: AxiFn
    c: float
    H: AxiFn
    residual: float
    dual_volume_H: float


def extract_solution(state: MaximizerState, f: AxiFn, p: float, q: float) -> SolutionRecord:
    """c = J / (n kappa_n) and H = c^{1/(q-p)} h."""
    h = state.g
    n = h.grid.n
    c = functional_J(h, f, p) / (n * ball_volume(n))
    H = h.like(c ** (1.0 / (q - p)) * h.values)
    return SolutionRecord(h, c, H, residual(H, f, p, q), dual_volume_from_support(H, q))
