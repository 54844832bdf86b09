"""Ellipsoid integrals that control the variational problem, and their asymptotic exponents.

For the rotationally symmetric ellipsoid A = diag(r a^{1/n}, ..., r a^{(1-n)/n})
two integrals matter:

* the normalization  int |A^{-1} x|^{-q}, which pins r as a function of a;
* F(A) = int |x'|^alpha |x_n|^beta |Ax|^p, whose decay as a -> 0 or a -> inf
  keeps maximizing sequences from degenerating.

Both have power-type endpoint singularities and, for extreme a, a boundary
layer of width min(a, 1/a) at one pole.  They are integrated with
composite Gauss-Jacobi/Gauss-Legendre rules on panels graded toward both
endpoints.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .sphere_core import RotEllipsoid, sphere_area

A1, A2, A3 = "A1", "A2", "A3"


# ---------------------------------------------------------------------------
# quadrature


@lru_cache(maxsize=None)
def _legendre(m: int):
    return roots_legendre(m)


@lru_cache(maxsize=None)
def _jacobi(m: int, b: float):
    # weight (1 + x)^b on [-1, 1]
    return roots_jacobi(m, 0.0, b)


def _graded_breaks(width: float, ratio: float = 0.25) -> np.ndarray:
    """Panel breakpoints in (0, pi/4], geometric toward 0 down to ~1e-3 * width."""
    stop = 1e-3 * min(width, 1.0)
    b = [math.pi / 4]
    while b[-1] > stop:
        b.append(b[-1] * ratio)
    return np.array(b[::-1])


def meridian_integral(smooth, n: int, a_exp: float, b_exp: float, width: float = 1.0, m: int = 24) -> float:
    """2 omega_{n-2} int_0^{pi/2} sin^{a_exp} cos^{b_exp} smooth(sin, cos) dtheta.

    ``smooth`` receives sin(theta) and cos(theta), both computed from the
    distance to the nearer pole so that neither loses relative accuracy
    there.  ``a_exp`` should already include the sin^{n-2} surface factor.
    The endpoint panels use Gauss-Jacobi rules for the power weights.
    """
    if a_exp <= -1 or b_exp <= -1:
        raise ValueError(f"divergent endpoint exponents ({a_exp}, {b_exp})")
    breaks = _graded_breaks(width)
    L = breaks[0]
    x, w = _legendre(m)
    lo, hi = breaks[:-1], breaks[1:]
    d = 0.5 * (hi - lo)[:, None]
    s_mid = d * (x + 1) + lo[:, None]
    w_mid = d * w
    total = 0.0
    for near, far in ((a_exp, b_exp), (b_exp, a_exp)):
        # s is the distance to the pole whose weight exponent is `near`
        sn, cs = np.sin(s_mid), np.cos(s_mid)
        sin_t, cos_t = (sn, cs) if near is a_exp else (cs, sn)
        total += float(np.sum(w_mid * sin_t**a_exp * cos_t**b_exp * smooth(sin_t, cos_t)))
        xj, wj = _jacobi(m, float(near))
        s = 0.5 * L * (xj + 1)
        sn, cs = np.sin(s), np.cos(s)
        sin_t, cos_t = (sn, cs) if near is a_exp else (cs, sn)
        reg = (sn / s) ** near * cs**far
        total += float((0.5 * L) ** (near + 1) * np.sum(wj * reg * smooth(sin_t, cos_t)))
    return 2 * sphere_area(n - 1) * total


# ---------------------------------------------------------------------------
# the two integrals


def normalization_integral(e: RotEllipsoid, q: float, n: int) -> float:
    """int over S^{n-1} of |A^{-1} x|^{-q}."""
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    r, a = e.r, e.a
    pre = (r * a ** (1 / n - 1)) ** q
    smooth = lambda sn, cs: (sn**2 / a**2 + cs**2) ** (-q / 2)  # noqa: E731
    return pre * meridian_integral(smooth, n, n - 2, 0.0, min(a, 1 / a))


def solve_r_for_normalization(a: float, q: float, n: int, target: float | None = None) -> float:
    """r with normalization_integral(r, a) = target (default n kappa_n)."""
    if target is None:
        target = sphere_area(n)
    return (target / normalization_integral(RotEllipsoid(1.0, a), q, n)) ** (1 / q)


def F_of_A(e: RotEllipsoid, p: float, alpha: float, beta: float, n: int) -> float:
    """int over S^{n-1} of |x'|^alpha |x_n|^beta |Ax|^p."""
    if not (alpha > 1 - n and beta > -1):
        raise ValueError(f"need alpha > 1-n and beta > -1 (alpha={alpha}, beta={beta}, n={n})")
    r, a = e.r, e.a
    pre = (r * a ** (1 / n)) ** p
    smooth = lambda sn, cs: (sn**2 + cs**2 / a**2) ** (p / 2)  # noqa: E731
    return pre * meridian_integral(smooth, n, alpha + n - 2, beta, min(a, 1 / a))


def Lambda(n: int, q: float) -> float:
    kap = sphere_area(n) / n
    return max(n ** (q + 1) * kap, 1 / (n * kap))


# ---------------------------------------------------------------------------
# regimes and predicted exponents


@dataclass(frozen=True)
class RegimeLabel:
    a_regime: str
    q_branch: str
    sign_branch: int  # sign of p+alpha+n-1 (A1) or beta+p+1 (A3); 0 in A2


def _cmp(x: float, y: float, tol: float = 1e-12) -> int:
    return 0 if abs(x - y) <= tol else (1 if x > y else -1)


def classify(a: float, n: int, p: float, q: float, alpha: float, beta: float) -> RegimeLabel:
    if a > 3:
        c = _cmp(q, 1)
        return RegimeLabel(A1, ("q<1", "q=1", "q>1")[c + 1], _cmp(p + alpha + n - 1, 0))
    if a < 1 / 3:
        c = _cmp(q, n - 1)
        return RegimeLabel(A3, ("q<n-1", "q=n-1", "q>n-1")[c + 1], _cmp(beta + p + 1, 0))
    return RegimeLabel(A2, "", 0)


def predicted_r_exponent(n: int, q: float, regime: str) -> tuple[float, float]:
    """(exponent, log power) in r ~ a^exponent |log a|^power."""
    if regime == A1:
        c = _cmp(q, 1)
        if c < 0:
            return 1 - 1 / n, 0.0
        if c == 0:
            return 1 - 1 / n, -1.0
        return 1 / q - 1 / n, 0.0
    if regime == A3:
        c = _cmp(q, n - 1)
        if c < 0:
            return -1 / n, 0.0
        if c == 0:
            return -1 / n, -1 / (n - 1)
        return (n - 1) * (q - n) / (n * q), 0.0
    raise ValueError("r is bounded in the A2 band; no exponent")


def predicted_F_exponent(n: int, p: float, q: float, alpha: float, beta: float, regime: str) -> tuple[float, float]:
    """(exponent, log power) in F(A) ~ a^exponent |log a|^power along normalized sweeps."""
    if regime == A1:
        s = _cmp(p + alpha + n - 1, 0)
        c = _cmp(q, 1)
        if c < 0:
            return {1: (p, 0.0), 0: (p, 1.0), -1: (-alpha - n + 1, 0.0)}[s]
        if c == 0:
            return {1: (p, -p), 0: (p, 1 - p), -1: (-alpha - n + 1, -p)}[s]
        return {1: (p / q, 0.0), 0: (p / q, 1.0), -1: (p / q - p - alpha - n + 1, 0.0)}[s]
    if regime == A3:
        s = _cmp(beta + p + 1, 0)
        c = _cmp(q, n - 1)
        if c < 0:
            return {1: (-p, 0.0), 0: (-p, 1.0), -1: (beta + 1, 0.0)}[s]
        if c == 0:
            lp = -p / (n - 1)
            return {1: (-p, lp), 0: (-p, (n - 1 - p) / (n - 1)), -1: (beta + 1, lp)}[s]
        e = p * (1 - n) / q
        return {1: (e, 0.0), 0: (e, 1.0), -1: (e + beta + p + 1, 0.0)}[s]
    raise ValueError("F is bounded in the A2 band; no exponent")


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SlopeFit:
    points: tuple[tuple[float, float], ...]
    fitted_slope: float
    predicted_slope: float
    rel_error: float
    log_power: float = 0.0
    degenerate: bool = False
    monotone: bool = True

    @property
    def passed(self) -> bool:
        tol = 0.15 * abs(self.predicted_slope) + 0.05
        return abs(self.fitted_slope - self.predicted_slope) <= tol


@dataclass(frozen=True)
class SweepRow:
    a: float
    r: float
    F: float


def sweep(a_values, n: int, p: float, q: float, alpha: float, beta: float) -> list[SweepRow]:
    rows = []
    for a in a_values:
        r = solve_r_for_normalization(float(a), q, n)
        rows.append(SweepRow(float(a), r, F_of_A(RotEllipsoid(r, float(a)), p, alpha, beta, n)))
    return rows


def verify_decay(n: int, p: float, q: float, alpha: float, beta: float, regime: str, a_sweep) -> SlopeFit:
    """Fit the log-log slope of F along a normalized sweep and compare with the prediction.

    Log-corrected branches are fitted after dividing out |log a|^power.
    """
    a_sweep = np.asarray(sorted(a_sweep), dtype=float)
    if a_sweep.size < 4:
        raise ValueError("need at least 4 sweep points")
    if regime == A1 and np.min(a_sweep) < 1e2 * (1 - 1e-12):
        raise ValueError("A1 sweeps must stay at a >= 1e2")
    if regime == A3 and np.max(a_sweep) > 1e-2 * (1 + 1e-12):
        raise ValueError("A3 sweeps must stay at a <= 1e-2")
    expo, lp = predicted_F_exponent(n, p, q, alpha, beta, regime)
    rows = sweep(a_sweep, n, p, q, alpha, beta)
    la = np.log(a_sweep)
    lF = np.log([row.F for row in rows])
    fitted = float(np.polyfit(la, lF - lp * np.log(np.abs(la)), 1)[0])
    F = np.array([row.F for row in rows])
    # strict decay toward the limit: F falls as a grows (A1) or shrinks (A3)
    decreasing_toward_limit = np.all(np.diff(F) < 0) if regime == A1 else np.all(np.diff(F) > 0)
    return SlopeFit(
        points=tuple(zip(la.tolist(), lF.tolist())),
        fitted_slope=fitted,
        predicted_slope=expo,
        rel_error=abs(fitted - expo) / max(abs(expo), 0.1),
        log_power=lp,
        degenerate=abs(expo) < 1e-12,
        monotone=bool(decreasing_toward_limit) or abs(expo) < 1e-12,
    )


def band_ratio(n: int, p: float, q: float, alpha: float, beta: float, points: int = 25) -> float:
    """max F / min F over the A2 band a in [1/3, 3] with normalized r."""
    F = [row.F for row in sweep(np.geomspace(1 / 3, 3, points), n, p, q, alpha, beta)]
    return max(F) / min(F)
