import numpy as np
import pytest

import linehit as lh
from linehit.edge import harmonic_measure_probe
from linehit.errors import WindowTooSmall


@pytest.fixture(scope="module")
def h0(srw):
    return lh.axis_overstep_law(srw, 400)


def test_overstep_first_step_bound(h0):
    assert h0[1] >= 1 / 8 and h0[-1] >= 1 / 8
    assert h0.probs.sum() + h0.deficit == pytest.approx(1.0, abs=1e-9)


def test_overstep_symmetric(h0):
    np.testing.assert_allclose(h0.probs, h0.probs[::-1], atol=1e-14)


def test_overstep_tail(h0):
    val = 100**2 * h0[100] * np.pi / 0.5
    assert 0.85 <= val <= 1.15


def test_nu_residual_and_shape(srw_nu):
    assert srw_nu.residual < 1e-6
    assert srw_nu.extra["defect"].size == 1001
    assert np.all(srw_nu.values > 0)
    assert srw_nu.strictly_increasing


def test_nu_normalization(srw_nu):
    y = np.arange(50, 1001)
    left = srw_nu(-y) * np.sqrt(y)
    right = srw_nu(y) * srw_nu.sigma2 / (2 * np.sqrt(y))
    assert left.min() >= 0.8 and left.max() <= 1.2
    assert right.min() >= 0.8 and right.max() <= 1.2
    # both approach 1 from above
    assert abs(left[-1] - 1) < abs(left[0] - 1)
    assert abs(right[-1] - 1) < abs(right[0] - 1)


def test_mu_equals_nu_for_symmetric_law(srw_mu, srw_nu):
    np.testing.assert_allclose(srw_mu.values, srw_nu.values, rtol=1e-12, atol=0)


def test_mu_is_nu_of_reversed_law(skew):
    mu = lh.compute_mu(skew, 500)
    nu_rev = lh.compute_nu(skew.negated(), 500)
    np.testing.assert_array_equal(mu.values, nu_rev.values)
    assert mu.kind == "mu"


def test_skew_nu(skew):
    nu = lh.compute_nu(skew, 1000)
    mu = lh.compute_mu(skew, 1000)
    for tab in (nu, mu):
        assert tab.residual < 1e-6
        assert tab.strictly_increasing
    # the reversal is a different function for an asymmetric law
    assert np.max(np.abs(nu.values / mu.values - 1)) > 1e-3


def test_window_checks(srw_nu, srw):
    with pytest.raises(WindowTooSmall):
        srw_nu(2001)
    with pytest.raises(WindowTooSmall):
        lh.compute_nu(srw, 10**6)


@pytest.fixture(scope="module")
def cor1(srw, srw_mu, srw_nu):
    return {n: harmonic_measure_probe(srw, n, srw_mu, srw_nu) for n in (8, 16)}


def test_harmonic_measure_bracket(cor1):
    r = cor1[8].ratios()
    assert r.size == 15
    assert np.all((r >= 0.7) & (r <= 1.3))


def test_harmonic_measure_trend(cor1):
    assert cor1[16].summary["mean_dev"] < cor1[8].summary["mean_dev"]


def test_harmonic_measure_edge_site(cor1):
    row = [r for r in cor1[8].rows if r.s == 7][0]
    assert row.discrete > 0 and row.continuum > 0
    assert np.isfinite(row.ratio)


def test_harmonic_measure_positive(srw):
    d = lh.hit_segment(srw, 8, (50, 3))
    hm = d.extra["hm"]
    assert np.all(hm > 0)
    assert hm.sum() == pytest.approx(1.0, abs=1e-9)
