"""Axisymmetric convex-geometry kernel on the unit sphere.

Rotationally symmetric even fields on S^{n-1} are sampled along the meridian
angle theta measured from the symmetry axis, so that |x'| = sin(theta) and
x_n = cos(theta).  Evenness plus rotational symmetry make every such field an
even, pi-periodic function of theta, and only theta in (0, pi/2) is stored.

Two grid families are provided:

* ``grading == 1``: open midpoint nodes, uniform in theta.  In the variable
  t = cos(2 theta) these are Chebyshev-Gauss points, so fields are handled as
  cosine series in 2 theta (spectral differentiation and interpolation, with
  the even reflections at 0 and pi/2 built in).
* ``grading >= 2``: Gauss-Legendre nodes in s mapped by a sigmoidal map that
  clusters nodes like s**grading at both ends.  Meant for integrands with
  endpoint power singularities.  Derivatives and off-node evaluation go
  through a quadrature projection onto the lowest N//3 cosine modes, since
  node spacings near the poles are far too small for difference stencils.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import fft
from scipy.special import roots_legendre

HALF_PI = 0.5 * math.pi


def ball_volume(n: int) -> float:
    """kappa_n, the volume of the unit ball in R^n."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def sphere_area(n: int) -> float:
    """Area of S^{n-1}, equal to n * kappa_n."""
    return n * ball_volume(n)


# ---------------------------------------------------------------------------
# parameters and small geometric types


@dataclass(frozen=True)
class ProblemParams:
    n: int
    p: float
    q: float
    alpha: float = 0.0
    beta: float = 0.0
    delta: float | None = None
    epsilon: float | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n}")
        if not self.p < 0 < self.q:
            raise ValueError(f"p < 0 < q violated (p={self.p}, q={self.q})")
        if self.delta is not None and not 0 < self.delta < -self.p:
            raise ValueError(f"delta outside (0, -p): delta={self.delta}, p={self.p}")
        if self.epsilon is not None and not 0 < self.epsilon < 0.5:
            raise ValueError(f"epsilon outside (0, 1/2): {self.epsilon}")

    def alpha_floor(self) -> float:
        n, p, q = self.n, self.p, self.q
        return max(1 - n, 1 - n + p * (1 - q) / q)

    def beta_floor(self) -> float:
        n, p, q = self.n, self.p, self.q
        return max(-1.0, -1 + p * (n - 1 - q) / q)

    def check_existence_window(self) -> None:
        """Raise unless alpha and beta satisfy the existence hypotheses."""
        if not self.alpha > self.alpha_floor():
            raise ValueError(
                f"alpha > max(1-n, 1-n+p(1-q)/q) = {self.alpha_floor():.6g} violated "
                f"(alpha={self.alpha})"
            )
        if not self.beta > self.beta_floor():
            raise ValueError(
                f"beta > max(-1, -1+p(n-1-q)/q) = {self.beta_floor():.6g} violated "
                f"(beta={self.beta})"
            )


@dataclass(frozen=True)
class RotEllipsoid:
    """Ellipsoid A B^n with A = diag(r a^{1/n}, ..., r a^{1/n}, r a^{(1-n)/n})."""

    r: float
    a: float

    def __post_init__(self):
        if not (self.r > 0 and self.a > 0):
            raise ValueError(f"r and a must be positive, got r={self.r}, a={self.a}")

    def semi_axes(self, n: int) -> tuple[float, float]:
        """(equatorial, polar) semi-axis lengths."""
        return self.r * self.a ** (1 / n), self.r * self.a ** ((1 - n) / n)

    def det(self, n: int) -> float:
        return self.r**n

    def matrix(self, n: int) -> np.ndarray:
        s, t = self.semi_axes(n)
        return np.diag([s] * (n - 1) + [t])

    def support(self, n: int, theta) -> np.ndarray:
        s, t = self.semi_axes(n)
        return np.hypot(s * np.sin(theta), t * np.cos(theta))

    def radial(self, n: int, theta) -> np.ndarray:
        s, t = self.semi_axes(n)
        return 1.0 / np.hypot(np.sin(theta) / s, np.cos(theta) / t)


# ---------------------------------------------------------------------------
# grids


def _fold(theta):
    """Map any angle to [0, pi/2] using evenness and pi-periodicity."""
    t = np.mod(np.abs(theta), math.pi)
    return np.minimum(t, math.pi - t)


@dataclass(frozen=True, eq=False)
class MeridianGrid:
    """Nodes and sphere-quadrature weights on theta in (0, pi/2).

    Fields are represented as truncated cosine series in 2 theta.  On the
    uniform grid the coefficients come from a DCT (exact interpolation); on
    graded grids they are a quadrature projection onto ``modes`` terms.
    """

    n: int
    nodes: np.ndarray
    weights: np.ndarray
    grading: int = 1

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def spectral(self) -> bool:
        return self.grading == 1

    @property
    def modes(self) -> int:
        return self.size if self.spectral else self.size // 3

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return 2.0 * np.arange(self.modes)

    # -- reflected extension used by local interpolation ------------------
    @cached_property
    def _extended(self):
        pad = min(12, self.size)
        th = self.nodes
        idx = np.arange(self.size)
        x = np.concatenate([-th[:pad][::-1], th, math.pi - th[-pad:][::-1]])
        ix = np.concatenate([idx[:pad][::-1], idx, idx[-pad:][::-1]])
        return x, ix

    # -- cosine-series machinery --------------------------------------------
    @cached_property
    def _projection(self) -> np.ndarray:
        # plain d(theta) quadrature weights recovered from the sphere weights
        dth = self.weights / (2 * sphere_area(self.n - 1) * np.sin(self.nodes) ** (self.n - 2))
        norm = np.full(self.modes, 4 / math.pi)
        norm[0] = 2 / math.pi
        return norm[:, None] * np.cos(np.outer(self.wavenumbers, self.nodes)) * dth

    def coefficients(self, values) -> np.ndarray:
        """Coefficients c_k with values ~ sum_k c_k cos(2k theta)."""
        values = np.asarray(values, dtype=float)
        if not self.spectral:
            return self._projection @ values
        y = fft.dct(values, type=2)
        y /= self.size
        y[0] *= 0.5
        return y

    def synthesize(self, coef, deriv: int = 0) -> np.ndarray:
        """Nodal values of the deriv-th theta derivative of a cosine series."""
        c = np.asarray(coef, dtype=float)
        if not self.spectral:
            return self._basis(self.nodes, deriv) @ c
        w = self.wavenumbers
        if deriv % 2 == 0:
            x = c * (-(w**2)) ** (deriv // 2)
            x[1:] *= 0.5
            return fft.dct(x, type=3)
        b = c * (-w) * (-(w**2)) ** (deriv // 2)
        return 0.5 * fft.dst(np.append(b[1:], 0.0), type=3)

    def _basis(self, theta, deriv: int) -> np.ndarray:
        w = self.wavenumbers
        arg = np.outer(theta, w)
        if deriv % 2 == 0:
            return np.cos(arg) * (-(w**2)) ** (deriv // 2)
        return np.sin(arg) * (-w) * (-(w**2)) ** (deriv // 2)

    @cached_property
    def _analysis(self) -> np.ndarray:
        if not self.spectral:
            return self._projection
        d = np.full(self.size, 2.0 / self.size)
        d[0] = 1.0 / self.size
        return d[:, None] * np.cos(np.outer(self.wavenumbers, self.nodes))

    def derivative(self, values, order: int = 1) -> np.ndarray:
        c = self.coefficients(values)
        if self.spectral:
            c = _chop(c)
        return self.synthesize(c, order)

    def diff_matrix(self, order: int) -> np.ndarray:
        """Dense matrix of the order-th theta derivative acting on nodal values."""
        if order not in (1, 2):
            raise ValueError("only first and second derivative matrices are provided")
        return self._d1 if order == 1 else self._d2

    @cached_property
    def _d1(self) -> np.ndarray:
        return self._basis(self.nodes, 1) @ self._analysis

    @cached_property
    def _d2(self) -> np.ndarray:
        return self._basis(self.nodes, 2) @ self._analysis

    # -- evaluation off the grid ---------------------------------------------
    def evaluate(self, values, theta, deriv: int = 0) -> np.ndarray:
        """Interpolate a field (or its theta derivative) at arbitrary angles."""
        theta = np.asarray(theta, dtype=float)
        c = self.coefficients(values)
        flat = theta.ravel()
        out = np.empty_like(flat)
        step = max(1, 2**22 // self.modes)
        for s in range(0, flat.size, step):
            out[s : s + step] = self._basis(flat[s : s + step], deriv) @ c
        return out.reshape(theta.shape)

    def interpolate_local(self, values, theta, order: int = 8) -> np.ndarray:
        """Local Lagrange interpolation of an even field on reflected nodes.

        Unlike ``evaluate`` this stays local, so kinks do not pollute
        distant angles.
        """
        x, ix = self._extended
        t = _fold(np.asarray(theta, dtype=float))
        ext = np.asarray(values, dtype=float)[ix]
        k = np.searchsorted(x, t)
        lo = np.clip(k - order // 2, 0, len(x) - order)
        cols = lo[..., None] + np.arange(order)
        xs, fs = x[cols], ext[cols]
        out = np.zeros(t.shape)
        for j in range(order):
            lj = np.ones(t.shape)
            for m in range(order):
                if m != j:
                    lj = lj * (t - xs[..., m]) / (xs[..., j] - xs[..., m])
            out = out + lj * fs[..., j]
        return out


def _chop(c: np.ndarray) -> np.ndarray:
    """Zero the trailing rounding plateau of a cosine series.

    Differentiation multiplies mode k by (2k)^order, so plateau noise at
    machine precision would otherwise dominate derivatives of smooth fields
    on fine grids.
    """
    a = np.abs(c)
    big = np.flatnonzero(a > np.finfo(float).eps * a.max())
    if big.size == 0 or big[-1] == c.size - 1:
        return c
    out = c.copy()
    out[big[-1] + 1 :] = 0.0
    return out


def _fejer_weights(n: int, nodes: np.ndarray) -> np.ndarray:
    """Weights exact for cos(2k theta) * sin^{n-2}(theta), k < len(nodes)."""
    N = nodes.size
    m = n - 2
    # I_k = int_0^{pi/2} sin^m cos(2k theta); I_{k+1} / I_k = (k - m/2) / (k + 1 + m/2)
    k = np.arange(N - 1)
    ratios = (k - m / 2) / (k + 1 + m / 2)
    i0 = math.pi / 2 ** (m + 1) * math.gamma(m + 1) / math.gamma(m / 2 + 1) ** 2
    moments = 2 * sphere_area(n - 1) * i0 * np.concatenate([[1.0], np.cumprod(ratios)])
    d = np.full(N, 2.0 / N)
    d[0] = 1.0 / N
    # w = (T^{-1})^T m with T^{-1} = diag(d) T^T, i.e. a type-3 DCT
    x = d * moments
    x[1:] *= 0.5
    return fft.dct(x, type=3)


def _graded_map(s: np.ndarray, g: int):
    a, b = s**g, (1 - s) ** g
    phi = a / (a + b)
    dphi = g * (s * (1 - s)) ** (g - 1) / (a + b) ** 2
    return HALF_PI * phi, HALF_PI * dphi


def make_grid(n: int, N: int, grading: int = 1) -> MeridianGrid:
    """Open quadrature/collocation grid on theta in (0, pi/2).

    Weights integrate even axisymmetric functions over the whole sphere,
    i.e. they carry the factor 2 * omega_{n-2} * sin^{n-2}(theta).
    """
    if int(n) != n or n < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {n}")
    if N < 32:
        raise ValueError(f"need at least 32 nodes, got {N}")
    if int(grading) != grading or grading < 1:
        raise ValueError(f"grading must be a positive integer, got {grading}")
    n, N, grading = int(n), int(N), int(grading)
    if grading == 1:
        nodes = (np.arange(N) + 0.5) * (HALF_PI / N)
        weights = _fejer_weights(n, nodes)
    else:
        s, ws = roots_legendre(N)
        s = 0.5 * (s + 1)
        nodes, jac = _graded_map(s, grading)
        weights = ws * jac * sphere_area(n - 1) * np.sin(nodes) ** (n - 2)
    if np.any(np.diff(nodes) <= 0) or nodes[0] <= 0 or nodes[-1] >= HALF_PI:
        raise ValueError("grading produced duplicate or endpoint nodes; lower grading or N")
    return MeridianGrid(n=n, nodes=nodes, weights=weights, grading=grading)


# ---------------------------------------------------------------------------
# fields and bodies


@dataclass(frozen=True, eq=False)
class AxiFn:
    grid: MeridianGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.nodes.shape:
            raise ValueError(f"expected {self.grid.size} values, got shape {v.shape}")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: MeridianGrid, fn) -> "AxiFn":
        return cls(grid, np.broadcast_to(fn(grid.nodes), grid.nodes.shape).astype(float))

    @classmethod
    def constant(cls, grid: MeridianGrid, value: float = 1.0) -> "AxiFn":
        return cls(grid, np.full(grid.size, float(value)))

    def like(self, values) -> "AxiFn":
        return AxiFn(self.grid, values)

    def derivative(self, order: int = 1) -> np.ndarray:
        return self.grid.derivative(self.values, order)

    def at(self, theta, deriv: int = 0) -> np.ndarray:
        return self.grid.evaluate(self.values, theta, deriv)


@dataclass(frozen=True, eq=False)
class AxiBody:
    support: AxiFn
    radial: AxiFn
    curvature: AxiFn
    grad_tangential: AxiFn
    grad_axial: AxiFn

    @property
    def grid(self) -> MeridianGrid:
        return self.support.grid

    @property
    def n(self) -> int:
        return self.grid.n

    def scaled(self, lam: float) -> "AxiBody":
        g = self.grid
        return AxiBody(
            AxiFn(g, lam * self.support.values),
            AxiFn(g, lam * self.radial.values),
            AxiFn(g, lam ** (g.n - 1) * self.curvature.values),
            AxiFn(g, lam * self.grad_tangential.values),
            AxiFn(g, lam * self.grad_axial.values),
        )

    def check(self, tol: float = 1e-8) -> None:
        """Raise ValueError if a body invariant fails."""
        h = self.support.values
        th = self.grid.nodes
        if np.any(h <= 0) or np.any(self.radial.values <= 0):
            raise ValueError("origin is not interior: nonpositive support or radial sample")
        xt, xn = self.grad_tangential.values, self.grad_axial.values
        defect = np.max(np.abs(xt * np.sin(th) + xn * np.cos(th) - h))
        if defect > tol * max(1.0, np.max(h)):
            raise ValueError(f"gradient map not consistent with support: {defect:.3e}")
        if np.any(xt**2 + xn**2 < h**2 * (1 - 1e-12) - tol):
            raise ValueError("|gradient map| < support somewhere")
        if self.grid.spectral or self.grid.grading > 1:
            r1, r2 = principal_radii(self.support)
            floor = -1e-9 * np.max(h)
            if np.any(r1 < floor) or np.any(r2 < floor):
                raise ValueError("support samples are not convex (negative principal radius)")


# ---------------------------------------------------------------------------
# quadrature


def integrate(F) -> float:
    """Integral over S^{n-1} of an even axisymmetric field."""
    v = F.values
    bad = ~np.isfinite(v)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise ValueError(f"non-finite integrand at node {i} (theta={F.grid.nodes[i]:.6g})")
    return float(F.grid.weights @ v)


def dual_volume(body: AxiBody, q: float) -> float:
    """q-th dual volume (1/n) * int rho^q over the sphere."""
    if q == 0:
        raise ValueError("dual volume needs q != 0")
    rho = body.radial.values
    if np.any(rho <= 0):
        raise ValueError("radial samples must be positive")
    return integrate(body.radial.like(rho**q)) / body.n


def dual_volume_from_support(h: AxiFn, q: float) -> float:
    """q-th dual volume of K_h computed through the Gauss map.

    Uses rho(u)^n du = h |grad h|^0 dS pulled back by u = grad h / |grad h|,
    giving (1/n) * int h |grad h|^{q-n} det(hess h + h I) dx.  Valid for
    smooth convex h only.
    """
    if q == 0:
        raise ValueError("dual volume needs q != 0")
    n = h.grid.n
    ma = monge_ampere(h).values
    gn = np.hypot(h.values, h.derivative(1))
    return integrate(h.like(h.values * gn ** (q - n) * ma)) / n


def surface_area(body: AxiBody) -> float:
    return integrate(body.curvature)


def volume(body: AxiBody) -> float:
    return integrate(body.support.like(body.support.values * body.curvature.values)) / body.n


# ---------------------------------------------------------------------------
# Monge-Ampere operator and Gauss map


def _radii(h, d1, d2, theta):
    # h' cot(theta) + h, with the theta -> 0 limit h''(0) + h(0)
    r1 = d2 + h
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = d1 / np.tan(theta) + h
    r2 = np.where(theta == 0, r1, r2)
    return r1, r2


def principal_radii(h: AxiFn) -> tuple[np.ndarray, np.ndarray]:
    """(meridional, parallel) principal radii h'' + h and h' cot + h."""
    return _radii(h.values, h.derivative(1), h.derivative(2), h.grid.nodes)


def monge_ampere(h: AxiFn, return_flags: bool = False):
    """det(hess h + h I) = (h'' + h)(h' cot + h)^{n-2} at every node.

    With ``return_flags`` also returns a boolean mask of nodes where a
    principal radius is negative (non-convex iterate).
    """
    r1, r2 = principal_radii(h)
    ma = h.like(r1 * r2 ** (h.grid.n - 2))
    if return_flags:
        return ma, (r1 < 0) | (r2 < 0)
    return ma


def gradient_map(h: AxiFn) -> tuple[AxiFn, AxiFn]:
    """Components (|xi'|, xi_n) of grad h + h x, the inverse Gauss map."""
    th = h.grid.nodes
    d1 = h.derivative(1)
    c, s = np.cos(th), np.sin(th)
    return h.like(d1 * c + h.values * s), h.like(h.values * c - d1 * s)


def is_convex(h: AxiFn, rel_tol: float = 1e-9) -> bool:
    r1, r2 = principal_radii(h)
    floor = -rel_tol * np.max(np.abs(h.values))
    return bool(np.all(h.values > 0) and np.all(r1 >= floor) and np.all(r2 >= floor))


# ---------------------------------------------------------------------------
# Alexandrov body, support/radial conversion

_INVPHI = (math.sqrt(5) - 1) / 2


def _golden(fun, lo, hi, tol=1e-11, maximize=False):
    """Vectorized golden-section search; returns (argopt, opt)."""
    sgn = -1.0 if maximize else 1.0
    a, b = lo.copy(), hi.copy()
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = sgn * fun(c), sgn * fun(d)
    width = np.max(b - a) if a.size else 0.0
    iters = int(math.ceil(math.log(max(width, tol) / tol) / -math.log(_INVPHI))) + 1
    for _ in range(iters):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        d_new = np.where(left, c, a + _INVPHI * (b - a))
        c_new = np.where(left, b - _INVPHI * (b - a), d)
        fd_new = np.where(left, fc, np.nan)
        fc_new = np.where(left, np.nan, fd)
        need_c, need_d = np.isnan(fc_new), np.isnan(fd_new)
        if np.any(need_c):
            fc_new[need_c] = sgn * fun(c_new[need_c], need_c)
        if np.any(need_d):
            fd_new[need_d] = sgn * fun(d_new[need_d], need_d)
        c, d, fc, fd = c_new, d_new, fc_new, fd_new
    x = np.where(fc < fd, c, d)
    return x, sgn * np.minimum(fc, fd)


def _meridian_extension(grid: MeridianGrid, values: np.ndarray):
    th = grid.nodes
    x = np.concatenate([-th[::-1], th, math.pi - th[::-1]])
    v = np.concatenate([values[::-1], values, values[::-1]])
    return x, v


def _scan(grid, values, targets, mode, chunk=256):
    """Discrete extremum of values(x) * cos(t - x)^{+-1} over reflected nodes.

    Returns the best value and the two best discrete local extrema brackets.
    """
    x, v = _meridian_extension(grid, values)
    P = targets.size
    best = np.empty(P)
    brackets = np.empty((P, 2, 2))
    for s in range(0, P, chunk):
        t = targets[s : s + chunk]
        cosd = np.cos(t[:, None] - x[None, :])
        with np.errstate(divide="ignore"):
            if mode == "min":
                score = np.where(cosd > 1e-14, v[None, :] / cosd, np.inf)
            else:
                score = np.where(cosd > 0, v[None, :] * cosd, -np.inf)
        sc = score if mode == "min" else -score
        left = np.concatenate([np.full((sc.shape[0], 1), np.inf), sc[:, :-1]], axis=1)
        right = np.concatenate([sc[:, 1:], np.full((sc.shape[0], 1), np.inf)], axis=1)
        local = (sc <= left) & (sc <= right)
        ranked = np.where(local, sc, np.inf)
        order = np.argsort(ranked, axis=1, kind="stable")[:, :2]
        j0 = np.argmin(sc, axis=1)  # leftmost on ties
        order[:, 0] = j0
        second = order[:, 1]
        second = np.where(np.abs(second - j0) <= 1, j0, second)
        best[s : s + chunk] = sc[np.arange(sc.shape[0]), j0]
        for col, j in enumerate((j0, second)):
            lo = np.clip(j - 1, 0, len(x) - 1)
            hi = np.clip(j + 1, 0, len(x) - 1)
            brackets[s : s + chunk, col, 0] = x[lo]
            brackets[s : s + chunk, col, 1] = x[hi]
    if mode == "max":
        best = -best
    return best, brackets


def alexandrov_radial(g: AxiFn) -> AxiFn:
    """Radial function of the Alexandrov body of a positive field g.

    rho(u) = min over directions x with <u, x> > 0 of g(x) / <u, x>.  By
    rotational symmetry the minimum is attained in the meridian plane of u.
    The discrete minimum over reflected nodes is refined by golden-section
    search on the local interpolant of g.
    """
    grid = g.grid
    if np.any(g.values <= 0):
        raise ValueError("Alexandrov body needs a positive field")
    u = grid.nodes
    best, br = _scan(grid, g.values, u, "min")
    rho = best.copy()
    for col in range(2):
        lo, hi = br[:, col, 0], br[:, col, 1]

        def ratio(x, mask=None, _u=u):
            uu = _u if mask is None else _u[mask]
            cosd = np.cos(uu - x)
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(cosd > 1e-14, grid.interpolate_local(g.values, x) / cosd, np.inf)

        _, val = _golden(ratio, lo, hi)
        rho = np.minimum(rho, val)
    return g.like(rho)


def support_from_radial(rho: AxiFn, resolve_tol: float = 1e-11) -> AxiFn:
    """Support function h(x) = max_u rho(u) <u, x> of a star body's hull.

    The discrete maximum over the radial samples is a guaranteed lower bound;
    golden-section refinement on the interpolated radial function is kept only
    where two interpolation orders agree (the radial function is resolved
    there), so kinks never produce overshoot.
    """
    grid = rho.grid
    if np.any(rho.values <= 0):
        raise ValueError("radial samples must be positive")
    xs = grid.nodes
    best, br = _scan(grid, rho.values, xs, "max")
    h = best.copy()
    for col in range(2):
        lo, hi = br[:, col, 0], br[:, col, 1]

        def prod(u, mask=None, _x=xs):
            xx = _x if mask is None else _x[mask]
            return grid.interpolate_local(rho.values, u) * np.maximum(np.cos(xx - u), 0.0)

        arg, val = _golden(prod, lo, hi, maximize=True)
        coarse = grid.interpolate_local(rho.values, arg, order=6) * np.maximum(np.cos(xs - arg), 0.0)
        resolved = np.abs(coarse - val) <= resolve_tol * np.max(rho.values)
        h = np.where(resolved, np.maximum(h, val), h)
    return rho.like(h)


def convexify(g: AxiFn) -> AxiFn:
    """Support function of the Alexandrov body of g (identity on support functions)."""
    if is_convex(g):
        return g
    return support_from_radial(alexandrov_radial(g))


# ---------------------------------------------------------------------------
# bodies


def body_from_support(h: AxiFn) -> AxiBody:
    xt, xn = gradient_map(h)
    return AxiBody(h, alexandrov_radial(h), monge_ampere(h), xt, xn)


def ellipsoid_body(e: RotEllipsoid, grid: MeridianGrid) -> AxiBody:
    """Closed-form body of a rotationally symmetric ellipsoid."""
    n = grid.n
    th = grid.nodes
    s, t = e.semi_axes(n)
    hx = e.support(n, th)
    curv = e.det(n) ** 2 * hx ** (-(n + 1))
    xt = s**2 * np.sin(th) / hx
    xn = t**2 * np.cos(th) / hx
    f = lambda v: AxiFn(grid, v)  # noqa: E731
    return AxiBody(f(hx), f(e.radial(n, th)), f(curv), f(xt), f(xn))


def min_ellipsoid(body: AxiBody, scan: int = 161) -> RotEllipsoid:
    """Volume-minimal rotationally symmetric ellipsoid containing the body.

    For each shape parameter a the smallest admissible r is the larger of the
    radial containment max rho(u) |A(1,a)^{-1} u| and the support containment
    max h(x) / |A(1,a) x| over the grid.  log a is located by a scan followed
    by golden-section refinement.
    """
    n = body.n
    th = body.grid.nodes
    sn, cs = np.sin(th), np.cos(th)
    rho, h = body.radial.values, body.support.values

    def r_of(loga):
        a = np.exp(np.atleast_1d(loga))[:, None]
        inv = np.sqrt(a ** (-2 / n) * sn**2 + a ** (2 * (n - 1) / n) * cs**2)
        fwd = np.sqrt(a ** (2 / n) * sn**2 + a ** (-2 * (n - 1) / n) * cs**2)
        return np.maximum(np.max(rho * inv, axis=1), np.max(h / fwd, axis=1))

    spread = math.log(max(np.max(rho) / np.min(rho), np.max(h) / np.min(h)))
    half = n * spread + 1.0
    grid_a = np.linspace(-half, half, scan)
    vals = r_of(grid_a)
    k = int(np.argmin(vals))
    step = grid_a[1] - grid_a[0]
    lo, hi = np.array([grid_a[k] - step]), np.array([grid_a[k] + step])
    loga, r = _golden(lambda x, mask=None: r_of(x), lo, hi, tol=1e-13)
    e = RotEllipsoid(float(r[0]), float(math.exp(loga[0])))
    inner = e.support(n, th) / n
    if np.any(inner > h * (1 + 1e-10)):
        raise ValueError("inner containment E/n in K failed; input body is not convex")
    return e
