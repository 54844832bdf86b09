import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from duallp.ellipsoid_bounds import (
    A1,
    A2,
    A3,
    F_of_A,
    Lambda,
    band_ratio,
    classify,
    meridian_integral,
    normalization_integral,
    predicted_F_exponent,
    predicted_r_exponent,
    solve_r_for_normalization,
    sweep,
    verify_decay,
)
from duallp.sphere_core import ProblemParams, RotEllipsoid, ball_volume, sphere_area
from helpers import REGIME_MATRIX
from helpers import A1_SWEEP as HI
from helpers import A3_SWEEP as LO


def _mp_meridian(n, integrand):
    """30-digit reference for 2 omega_{n-2} int_0^{pi/2} integrand(theta) sin^{n-2} dtheta."""
    with mp.workdps(30):
        val = mp.quad(lambda t: integrand(t) * mp.sin(t) ** (n - 2), mp.linspace(0, mp.pi / 2, 9))
        return float(2 * sphere_area(n - 1) * val)


def _mp_F(r, a, p, alpha, beta, n):
    a = mp.mpf(a)
    return _mp_meridian(
        n,
        lambda t: mp.sin(t) ** alpha * mp.cos(t) ** beta
        * (r * a ** (mp.mpf(1) / n) * mp.sqrt(mp.sin(t) ** 2 + mp.cos(t) ** 2 / a**2)) ** p,
    )


def _mp_norm(r, a, q, n):
    a = mp.mpf(a)
    return _mp_meridian(
        n, lambda t: (a ** (1 - mp.mpf(1) / n) / r * mp.sqrt(mp.sin(t) ** 2 / a**2 + mp.cos(t) ** 2)) ** (-q)
    )


# ---------------------------------------------------------------------------
# quadrature


def test_normalization_examples():
    assert normalization_integral(RotEllipsoid(1.0, 1.0), 1.0, 2) == pytest.approx(2 * math.pi, rel=1e-13)
    ref = _mp_norm(1.0, 10.0, 2.0, 3)
    assert normalization_integral(RotEllipsoid(1.0, 10.0), 2.0, 3) == pytest.approx(ref, rel=1e-8)


@given(r=st.floats(0.1, 10.0), a=st.floats(1e-3, 1e3), q=st.floats(0.2, 5.0), n=st.integers(2, 4))
def test_normalization_homogeneous_in_r(r, a, q, n):
    base = normalization_integral(RotEllipsoid(1.0, a), q, n)
    assert normalization_integral(RotEllipsoid(r, a), q, n) == pytest.approx(r**q * base, rel=1e-12)


@pytest.mark.parametrize("a", [1e-5, 1e-2, 0.5, 7.0, 1e4])
@pytest.mark.parametrize("n, q", [(2, 0.5), (3, 2.0), (3, 4.0)])
def test_normalization_against_mpmath(a, n, q):
    assert normalization_integral(RotEllipsoid(1.0, a), q, n) == pytest.approx(_mp_norm(1.0, a, q, n), rel=1e-9)


def test_normalization_rejects_nonpositive_q():
    with pytest.raises(ValueError):
        normalization_integral(RotEllipsoid(1.0, 1.0), 0.0, 2)


def test_F_examples():
    for p in (-1.0, -3.5):
        assert F_of_A(RotEllipsoid(1.0, 1.0), p, 2.0, 0.0, 2) == pytest.approx(math.pi, rel=1e-13)
    assert F_of_A(RotEllipsoid(1.0, 1.0), 0.0, 0.0, 0.0, 3) == pytest.approx(4 * math.pi, rel=1e-13)


@given(lam=st.floats(0.1, 10.0), a=st.floats(1e-3, 1e3), p=st.floats(-3.0, -0.1))
def test_F_homogeneity(lam, a, p):
    e = RotEllipsoid(1.3, a)
    scaled = RotEllipsoid(lam * 1.3, a)
    assert F_of_A(scaled, p, 0.5, 0.0, 3) == pytest.approx(lam**p * F_of_A(e, p, 0.5, 0.0, 3), rel=1e-12)


@pytest.mark.parametrize(
    "n, p, alpha, beta",
    [(2, -1.0, 0.0, 0.0), (2, -2.0, 0.5, -0.5), (3, -2.0, 0.5, -0.5), (3, -1.0, -1.5, 2.0), (2, -0.5, 2.0, 1.0)],
)
@pytest.mark.parametrize("a", [1e-5, 1e-3, 0.2, 3.0, 1e3, 1e5])
def test_F_against_mpmath(n, p, alpha, beta, a):
    r = 0.7
    got = F_of_A(RotEllipsoid(r, a), p, alpha, beta, n)
    assert got == pytest.approx(_mp_F(r, a, p, alpha, beta, n), rel=1e-9)


def test_F_rejects_divergent_exponents():
    with pytest.raises(ValueError, match="alpha > 1-n"):
        F_of_A(RotEllipsoid(1.0, 1.0), -1.0, -1.0, 0.0, 2)
    with pytest.raises(ValueError, match="beta > -1"):
        F_of_A(RotEllipsoid(1.0, 1.0), -1.0, 0.0, -1.0, 2)
    with pytest.raises(ValueError, match="divergent"):
        meridian_integral(lambda s, c: 1.0 + 0 * s, 2, -1.0, 0.0)


@given(a=st.floats(1e-5, 1e5), q=st.floats(0.2, 5.0), n=st.integers(2, 4))
def test_solve_r_reproduces_target(a, q, n):
    r = solve_r_for_normalization(a, q, n)
    assert normalization_integral(RotEllipsoid(r, a), q, n) == pytest.approx(n * ball_volume(n), rel=1e-10)
    lam = Lambda(n, q)
    assert 1 / lam <= n * ball_volume(n) <= lam


def test_solve_r_examples():
    for n in (2, 3, 4):
        assert solve_r_for_normalization(1.0, 1.5, n) == pytest.approx(1.0, rel=1e-13)
    # q < 1, A1: r ~ a^{1 - 1/n} = a^{1/2}; local log-log slope around a = 1e3
    lo, hi = solve_r_for_normalization(10**2.5, 0.5, 2), solve_r_for_normalization(10**3.5, 0.5, 2)
    assert math.log10(hi / lo) == pytest.approx(0.5, rel=0.2)


# ---------------------------------------------------------------------------
# regimes and exponent tables


def test_predicted_r_exponent_examples():
    assert predicted_r_exponent(2, 0.5, A1) == (0.5, 0.0)
    e, lp = predicted_r_exponent(3, 2.0, A3)
    assert e == pytest.approx(-1 / 3) and lp != 0
    assert predicted_r_exponent(3, 4.0, A3)[0] == pytest.approx(1 / 6)
    with pytest.raises(ValueError):
        predicted_r_exponent(2, 1.0, A2)


def test_predicted_F_exponent_examples():
    assert predicted_F_exponent(2, -1.0, 0.5, 2.0, 0.0, A1) == (-1.0, 0.0)
    assert predicted_F_exponent(3, -1.0, 2.0, 0.0, 0.0, A3) == pytest.approx((1.0, 1.5))
    assert predicted_F_exponent(2, -2.0, 3.0, 0.0, 2.0, A3)[0] == pytest.approx(2 / 3)
    assert predicted_F_exponent(3, -2.0, 4.0, 0.0, 0.0, A3)[0] == pytest.approx(0.0)
    with pytest.raises(ValueError):
        predicted_F_exponent(2, -1.0, 1.0, 0.0, 0.0, A2)


@given(
    a=st.floats(1e-6, 1e6),
    n=st.integers(2, 4),
    p=st.floats(-3.0, -0.1),
    q=st.sampled_from([0.5, 1.0, 2.0, 3.0, 4.0]),
    alpha=st.floats(-0.5, 2.0),
    beta=st.floats(-0.5, 2.0),
)
def test_classify_is_exhaustive_and_exclusive(a, n, p, q, alpha, beta):
    lab = classify(a, n, p, q, alpha, beta)
    if a > 3:
        assert lab.a_regime == A1
        assert lab.q_branch == ("q<1" if q < 1 else "q=1" if q == 1 else "q>1")
        assert lab.sign_branch == int(np.sign(p + alpha + n - 1))
    elif a < 1 / 3:
        assert lab.a_regime == A3
        assert lab.q_branch == ("q<n-1" if q < n - 1 else "q=n-1" if q == n - 1 else "q>n-1")
        assert lab.sign_branch == int(np.sign(beta + p + 1))
    else:
        assert lab == classify(1.0, n, p, q, alpha, beta)


# ---------------------------------------------------------------------------
# sweeps


def test_verify_decay_example_A1():
    fit = verify_decay(2, -1.0, 0.5, 2.0, 0.0, A1, HI)
    assert fit.predicted_slope == -1.0
    assert fit.passed and fit.monotone and not fit.degenerate
    assert len(fit.points) == 4


def test_verify_decay_flags_degenerate_prediction():
    fit = verify_decay(3, -2.0, 4.0, 0.0, 0.0, A3, LO)
    assert fit.degenerate


def test_verify_decay_rejects_bad_sweeps():
    with pytest.raises(ValueError, match="at least 4"):
        verify_decay(2, -1.0, 0.5, 0.0, 0.0, A1, HI[:3])
    with pytest.raises(ValueError, match="A1"):
        verify_decay(2, -1.0, 0.5, 0.0, 0.0, A1, (10.0, 1e3, 1e4, 1e5))
    with pytest.raises(ValueError, match="A3"):
        verify_decay(2, -1.0, 0.5, 0.0, 0.0, A3, (0.1, 1e-3, 1e-4, 1e-5))


@pytest.mark.parametrize("n, p, q, alpha, beta, regime", REGIME_MATRIX)
def test_r_law(n, p, q, alpha, beta, regime):
    expo, lp = predicted_r_exponent(n, q, regime)
    a = np.array(HI if regime == A1 else LO)
    r = np.array([solve_r_for_normalization(x, q, n) for x in a])
    la = np.log(a)
    fitted = np.polyfit(la, np.log(r) - lp * np.log(np.abs(la)), 1)[0]
    assert abs(fitted - expo) <= 0.15 * abs(expo) + 0.05


@given(
    n=st.integers(2, 3),
    p=st.floats(-2.5, -0.3),
    q=st.floats(0.3, 4.0),
    alpha=st.floats(0.0, 4.0),
    beta=st.floats(0.0, 4.0),
)
@settings(max_examples=15)
def test_F_bounded_by_band_and_vanishes_at_extremes(n, p, q, alpha, beta):
    pr = ProblemParams(n, p, q, alpha, beta)
    assume(alpha > pr.alpha_floor() and beta > pr.beta_floor())
    band = max(row.F for row in sweep(np.geomspace(1 / 3, 3, 9), n, p, q, alpha, beta))
    rows = sweep(np.geomspace(1e-5, 1e5, 21), n, p, q, alpha, beta)
    assert all(row.F <= 10 * band for row in rows)
    # numerical shadow of F -> 0 only once the predicted exponents are clearly nonzero
    e1 = predicted_F_exponent(n, p, q, alpha, beta, A1)[0]
    e3 = predicted_F_exponent(n, p, q, alpha, beta, A3)[0]
    if e1 <= -0.5:
        assert rows[-1].F <= 0.1 * band
    if e3 >= 0.5:
        assert rows[0].F <= 0.1 * band


@pytest.mark.parametrize("n, p, q", [(2, -1.0, 0.5), (3, -2.0, 2.0), (3, -1.0, 4.0)])
def test_band_ratio_bounded(n, p, q):
    assert band_ratio(n, p, q, 0.0, 0.0) <= 10
