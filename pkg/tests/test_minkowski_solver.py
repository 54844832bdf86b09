import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from duallp.minkowski_solver import (
    MinkowskiError,
    NewtonOptions,
    linear_operator,
    rhs_classical,
    solve_minkowski,
    verify_h_bounds,
)
from duallp.sphere_core import AxiFn, ProblemParams, integrate, monge_ampere, principal_radii
from helpers import cosine_field, grid


def _params(n=2, p=-1.0, q=0.5, delta=0.75, eps=0.1, alpha=0.0, beta=0.0):
    return ProblemParams(n, p, q, alpha, beta, delta, eps)


# ---------------------------------------------------------------------------
# right-hand side


def test_rhs_is_one_when_exponents_vanish():
    # alpha = beta = 0 and p + delta = -1 make every factor 1
    g = grid(3, 128)
    rhs = rhs_classical(_params(n=3, p=-1.5, delta=0.5, eps=0.3), g)
    assert np.allclose(rhs.values.values, 1.0, atol=1e-15)


def test_rhs_pole_and_equator_values():
    g = grid(2, 2048)
    rhs = rhs_classical(_params(eps=0.1), g).values.values
    assert rhs[0] == pytest.approx(1.0, rel=1e-6)  # theta -> 0: |M e_n| = 1
    assert rhs[-1] == pytest.approx(0.1 ** (1 - 0.75 - 1), rel=1e-5)  # theta -> pi/2: eps^{-p-delta-1}


def test_rhs_formula_nodewise():
    g = grid(3, 256)
    pr = _params(n=3, p=-1.0, q=2.0, alpha=2.0, beta=2.0, eps=0.2)
    th = g.nodes
    m = np.sqrt((0.2 * np.sin(th)) ** 2 + np.cos(th) ** 2)
    expected = np.sin(th) ** 2 * np.cos(th) ** 2 * m ** (1 - 0.75 - 1 - 2)
    assert np.allclose(rhs_classical(pr, g).values.values, expected, rtol=1e-14)


def test_rhs_requires_matching_grid_and_eps():
    with pytest.raises(ValueError, match="dimension"):
        rhs_classical(_params(n=3), grid(2, 64))
    with pytest.raises(ValueError):
        rhs_classical(ProblemParams(2, -1.0, 0.5), grid(2, 64))


# ---------------------------------------------------------------------------
# solver


@pytest.mark.parametrize("n", [2, 3, 4])
def test_constant_data_gives_unit_ball(n):
    h = solve_minkowski(AxiFn.constant(grid(n, 256)))
    assert np.max(np.abs(h.values - 1)) <= 1e-12


def test_manufactured_n2():
    g = grid(2, 512)
    th = g.nodes
    h = solve_minkowski(AxiFn(g, 1 - 0.3 * np.cos(2 * th)))
    assert np.max(np.abs(h.values - (1 + 0.1 * np.cos(2 * th)))) <= 1e-8


@pytest.mark.parametrize("n", [3, 4])
def test_manufactured_higher_dimension(n):
    g = grid(n, 512)
    exact = cosine_field(g, [0.05])
    h = solve_minkowski(monge_ampere(exact))
    assert np.max(np.abs(h.values - exact.values)) <= 1e-6


@given(c=st.lists(st.floats(-0.06, 0.06), min_size=1, max_size=3), n=st.integers(2, 4))
@settings(max_examples=15)
def test_measure_conservation_and_convexity(c, n):
    g = grid(n, 256)
    exact = cosine_field(g, c)
    assume(min(np.min(r) for r in principal_radii(exact)) > 0.05)
    data = monge_ampere(exact)
    h = solve_minkowski(data)
    assert integrate(monge_ampere(h)) == pytest.approx(integrate(data), rel=1e-8)
    r1, r2 = principal_radii(h)
    floor = -1e-9 * np.max(h.values)
    assert np.all(r1 >= floor) and np.all(r2 >= floor)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("eps", [0.4, 0.05])
def test_pipeline_rhs_residual(n, eps):
    pr = _params(n=n, q=0.5 if n == 2 else 2.0, eps=eps)
    g = grid(n, 1024)
    rhs = rhs_classical(pr, g)
    h = solve_minkowski(rhs)
    gv = rhs.values.values
    res = np.max(np.abs(monge_ampere(h).values - gv)) / np.max(gv)
    # n = 2 is limited by rounding in the second-derivative operator (cond ~ 4N^2)
    assert res <= (1e-9 if n == 2 else 1e-6)


def _limited_smoothness(th, m=3.5, c=0.05):
    # h = 1 + c |cos 2theta|^m is C^3 but not C^4 at theta = pi/4
    x, s = np.cos(2 * th), np.sin(2 * th)
    h = 1 + c * np.abs(x) ** m
    d2 = c * (4 * m * (m - 1) * np.abs(x) ** (m - 2) * s**2 - 4 * m * np.abs(x) ** m)
    return h, d2 + h


def test_grid_convergence_order():
    errs = []
    for N in (128, 256, 512, 1024):
        g = grid(2, N)
        exact, data = _limited_smoothness(g.nodes)
        errs.append(np.max(np.abs(solve_minkowski(AxiFn(g, data)).values - exact)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 2)


def test_linear_operator_condition_number():
    # invertibility of h'' + h with even Neumann conditions, checked through conditioning
    cond = np.linalg.cond(linear_operator(grid(2, 1024)))
    assert cond < 1e6


def test_linear_operator_is_invertible():
    L = linear_operator(grid(2, 256))
    s = np.linalg.svd(L, compute_uv=False)
    assert s.min() >= 0.99  # smallest |1 - 4k^2| is 1, at k = 0


def test_solver_rejects_bad_input():
    g = grid(2, 64)
    with pytest.raises(ValueError, match="nonnegative"):
        solve_minkowski(AxiFn(g, np.cos(4 * g.nodes)))
    with pytest.raises(ValueError, match="grading"):
        solve_minkowski(AxiFn.constant(grid(2, 64, 2)))


def test_solver_reports_stalled_newton():
    g = grid(3, 256)
    data = monge_ampere(cosine_field(g, [0.05]))
    with pytest.raises(MinkowskiError) as info:
        solve_minkowski(data, NewtonOptions(max_iter=1))
    assert math.isfinite(info.value.residual)


def test_n2_nonconvex_data_raises():
    # data whose solution has a negative radius: g = 1 + 3 cos 2theta changes sign
    g = grid(2, 128)
    th = g.nodes
    with pytest.raises(ValueError):
        solve_minkowski(AxiFn(g, 1 + 3 * np.cos(2 * th)))


# ---------------------------------------------------------------------------
# h_eps bounds report


def test_h_bounds_constant_solutions():
    g = grid(2, 64)
    hs = [AxiFn.constant(g)] * 4
    rep = verify_h_bounds(hs, [0.4, 0.1, 0.04, 0.01])
    assert rep.h_min == (1.0,) * 4 and rep.h_max == (1.0,) * 4
    assert rep.slope_min == pytest.approx(0.0, abs=1e-12) and rep.passed
    assert rep.spans_decade


def test_h_bounds_single_eps_is_insufficient():
    rep = verify_h_bounds([AxiFn.constant(grid(2, 64))], [0.1])
    assert not rep.sufficient and rep.passed is None and rep.slope_max is None


def test_h_bounds_detects_drift():
    g = grid(2, 64)
    eps = [0.4, 0.2, 0.1, 0.05]
    hs = [AxiFn.constant(g, e**-0.3) for e in eps]
    rep = verify_h_bounds(hs, eps)
    assert rep.slope_max == pytest.approx(-0.3)
    assert not rep.passed and not rep.spans_decade


def test_h_bounds_length_mismatch():
    with pytest.raises(ValueError):
        verify_h_bounds([AxiFn.constant(grid(2, 64))], [0.1, 0.2])
