import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from linehit import continuum as c
from linehit.errors import DomainError, OnSlit, SingularArguments


def test_segment_spec():
    seg = c.SegmentSpec(3)
    assert seg.n_star == 2.5
    np.testing.assert_array_equal(seg.sites, [-2, -1, 0, 1, 2])
    with pytest.raises(DomainError):
        c.SegmentSpec(0)


def test_slit_point_validation():
    assert c.SlitPoint(0.5, c.ABOVE).z == 0.5
    with pytest.raises(DomainError):
        c.SlitPoint(1.5, c.ABOVE)
    with pytest.raises(DomainError):
        c.SlitPoint(0.5 + 0.1j, c.BELOW)


# --- half-line ---------------------------------------------------------------------

def test_h_minus_values():
    assert c.h_minus(1, -1) == pytest.approx(1 / (2 * np.pi), rel=1e-15)
    assert c.h_minus(4, -1) == pytest.approx(2 / (5 * np.pi), rel=1e-15)
    with pytest.raises(DomainError):
        c.h_minus(1, 1)


def test_h_minus_mass():
    # s = -u^2 removes the inverse square root at 0
    val, _ = integrate.quad(lambda u: 2 * u * c.h_minus(2.0, -u * u), 0, np.inf, epsrel=1e-12)
    assert val == pytest.approx(1.0, abs=1e-9)


# --- segment, exterior ---------------------------------------------------------------

def test_exterior_values():
    assert c.h_segment_exterior(c.SegmentSpec(1), 1, 0) == pytest.approx(np.sqrt(0.75) / (np.pi * 0.5), rel=1e-14)
    assert c.h_segment_exterior(c.SegmentSpec(1), 2, 0) == pytest.approx(np.sqrt(3.75) / np.pi, rel=1e-14)
    with pytest.raises(DomainError):
        c.h_segment_exterior(0.5, 0.2, 0.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.2, 20), st.floats(1.001, 30), st.floats(-0.999, 0.999), st.booleans())
def test_exterior_joint_negation(ns, xr, sr, left):
    x = (-1 if left else 1) * xr * ns
    s = sr * ns
    a = c.h_segment_exterior(ns, x, s)
    b = c.h_segment_exterior(ns, -x, -s)
    assert a == pytest.approx(b, rel=1e-14)


@pytest.mark.parametrize("x", [0.6, 0.75, 1.5, 4.0, -2.0, 40.0])
def test_exterior_normalization(x):
    ns = 0.5
    # s = ns cos(t) absorbs both endpoint singularities
    f = lambda t: float(c.h_segment_exterior(ns, x, ns * np.cos(t))) * ns * np.sin(t)
    val, _ = integrate.quad(f, 1e-300, np.pi, epsabs=0, epsrel=1e-11, limit=200,
                            points=[np.arccos(np.clip(x / ns, -1, 1))] if abs(x) < ns else None)
    assert val == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("scale", [2.0, 10.0])
def test_exterior_scaling(scale, rng):
    for _ in range(50):
        ns = rng.uniform(0.5, 4)
        x = ns * rng.uniform(1.01, 8) * rng.choice([-1, 1])
        s = ns * rng.uniform(-0.99, 0.99)
        big = c.h_segment_exterior(ns * scale, x * scale, s * scale)
        assert big == pytest.approx(c.h_segment_exterior(ns, x, s) / scale, rel=1e-13)


# --- segment, interior ---------------------------------------------------------------

def test_interior_value():
    # (1 - 0) / (pi * 0.25 * sqrt(0.75)) = 4.6188022 / pi
    assert c.h_segment_interior(1.0, 0.0, 0.5) == pytest.approx(4.618802153517006 / np.pi, rel=1e-14)


def test_interior_symmetry_and_errors():
    assert c.h_segment_interior(1.0, 0.3, -0.3) == c.h_segment_interior(1.0, -0.3, 0.3)
    with pytest.raises(SingularArguments):
        c.h_segment_interior(1.0, 0.2, 0.2)
    with pytest.raises(DomainError):
        c.h_segment_interior(1.0, 1.2, 0.2)


def test_interior_printed_variant():
    seg = c.SegmentSpec(4)
    a = c.h_segment_interior(seg, 1.0, -2.0)
    b = c.h_segment_interior(seg, 1.0, -2.0, printed=True)
    assert b / a == pytest.approx((16 + 2) / (3.5**2 + 2), rel=1e-14)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.xfail(strict=True, reason="the interior density has a non-integrable (x - s)^-2 singularity")
def test_interior_density_integrates_to_one():
    x = 0.2
    f = lambda t: float(c.h_segment_interior(1.0, x, np.cos(t))) * np.sin(t)
    tx = np.arccos(x)
    total = 0.0
    for a, b in ((1e-12, tx - 1e-6), (tx + 1e-6, np.pi - 1e-12)):
        v, _ = integrate.quad(f, a, b, limit=400)
        total += v
    assert total == pytest.approx(1.0, abs=1e-6)


# --- conformal map -------------------------------------------------------------------

def test_joukowski_values():
    assert c.joukowski_inverse(2.0) == pytest.approx(2 + np.sqrt(3), rel=1e-15)
    assert abs(c.joukowski_inverse(-2.0)) == pytest.approx(2 + np.sqrt(3), rel=1e-15)
    with pytest.raises(OnSlit):
        c.joukowski_inverse(0.3)


def test_joukowski_roundtrip(rng):
    z = rng.normal(size=1000) * 3 + 1j * rng.normal(size=1000) * 3
    w = c.joukowski_inverse(z)
    assert np.all(np.abs(w) > 1)
    np.testing.assert_allclose((w + 1 / w) / 2, z, rtol=0, atol=1e-12 * np.max(np.abs(z)))


def test_joukowski_branch_grid():
    g = np.linspace(-3, 3, 61)
    z = (g[:, None] + 1j * g[None, :]).ravel()
    z = z[~((z.imag == 0) & (np.abs(z.real) <= 1))]
    assert np.all(np.abs(c.joukowski_inverse(z)) > 1)


def test_boundary_f():
    f = c.boundary_f(0.5, c.ABOVE)
    assert f == pytest.approx(0.5 + 0.8660254037844386j, abs=1e-15)
    assert np.angle(f) == pytest.approx(np.pi / 3, abs=1e-15)
    g = c.boundary_f(0.0, c.BELOW)
    assert g == pytest.approx(-1j, abs=1e-15)
    assert np.angle(g) == pytest.approx(-np.pi / 2, abs=1e-15)
    s = np.random.default_rng(1).uniform(-0.999, 0.999, 100)
    for side in (c.ABOVE, c.BELOW):
        np.testing.assert_allclose(np.abs(c.boundary_f(s, side)), 1.0, atol=1e-14)
    with pytest.raises(DomainError):
        c.boundary_f(1.0, c.ABOVE)


def test_slit_kernel_golden():
    # R = 2 + sqrt(3), theta(z) = 0, theta(0 + i0) = pi/2
    R = 2 + np.sqrt(3)
    hand = (R * R - 1) / (2 * np.pi * (R * R + 1))
    assert hand == pytest.approx(0.1378322, abs=5e-8)
    assert c.slit_plane_kernel(2.0, 0.0, c.ABOVE) == pytest.approx(hand, rel=1e-14)
    assert c.slit_plane_kernel(2.0, c.SlitPoint(0.0, c.ABOVE)) == pytest.approx(hand, rel=1e-14)


def test_slit_kernel_real_start_matches_segment():
    assert 2 * c.slit_plane_kernel(2.0, 0.0, c.ABOVE) == pytest.approx(0.2756644, abs=5e-8)
    assert 2 * c.slit_plane_kernel(2.0, 0.0, c.ABOVE) == pytest.approx(c.h_segment_exterior(1.0, 2.0, 0.0), rel=1e-13)


@pytest.mark.parametrize("z", [1.5 + 0.7j, -0.2 + 0.05j, 3 - 4j, 1.01])
def test_slit_kernel_total_mass(z):
    def f(t):
        s = np.cos(t)
        return float(c.slit_plane_kernel(z, s, c.ABOVE) + c.slit_plane_kernel(z, s, c.BELOW)) * np.sin(t)

    val, _ = integrate.quad(f, 1e-300, np.pi, epsabs=0, epsrel=1e-11, limit=400)
    assert val == pytest.approx(1.0, abs=1e-8)


# --- anisotropic ---------------------------------------------------------------------

def test_anisotropic_identity(rng):
    amap = c.AnisotropicMap(np.eye(2))
    for _ in range(100):
        z = complex(rng.normal() * 2, rng.normal() * 2 + 0.01)
        s = rng.uniform(-0.99, 0.99)
        side = c.ABOVE if rng.random() < 0.5 else c.BELOW
        assert c.anisotropic_kernel(amap, z, s, side) == c.slit_plane_kernel(z, s, side)


def test_anisotropic_real_start_independent_of_q():
    for q in ([[1, 0.5], [0.5, 1]], [[2.0, -0.3], [-0.3, 0.4]]):
        amap = c.AnisotropicMap(q)
        for x in (1.3, -2.0, 7.5):
            assert c.anisotropic_kernel(amap, x, 0.25, c.BELOW) == c.slit_plane_kernel(x, 0.25, c.BELOW)


def test_anisotropic_map_image():
    amap = c.AnisotropicMap([[1, 0.5], [0.5, 1]])
    assert amap.omega == 0.5
    assert amap.lam == pytest.approx(np.sqrt(0.75), rel=1e-15)
    assert amap(1j) == pytest.approx(-0.5 + 1j * np.sqrt(0.75), abs=1e-15)
    with pytest.raises(DomainError):
        c.AnisotropicMap([[1, 2], [2, 1]])


# --- q and J ---------------------------------------------------------------------------

def test_q_matches_double_integral():
    closed = float(c.q_continuum(c.SegmentSpec(2), 4.0, 3.0))
    direct = c.q_double_integral(c.SegmentSpec(2), 4.0, 3.0)
    assert closed == pytest.approx(direct, abs=1e-7)
    assert closed == pytest.approx(direct, rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.5, 5), st.floats(0.01, 30), st.floats(0.01, 30))
def test_j_closed_form_vs_quadrature(ns, a, b):
    closed = float(c.j_integral(a * ns, b * ns, 2 * ns))
    quad = c.j_integral_quad(a * ns, b * ns, 2 * ns)
    assert closed == pytest.approx(quad, rel=1e-8)


def test_q_subprobability():
    ns = 4.5
    for x in (4.6, 5.5, 9.0, 45.0):
        # y = -ns + u^2, upper tail ~ y^-3/2 handled by quad on [0, inf)
        f = lambda u: 2 * u * float(c.q_continuum(ns, x, -ns + u * u))
        val, _ = integrate.quad(f, 1e-12, np.inf, epsrel=1e-10, limit=400)
        assert 0 < val <= 1.0
        grid = c.q_continuum(ns, x, np.linspace(-ns + 0.01, 100, 200))
        assert np.all(grid >= 0)


def test_q_bound_I_envelope():
    n = 5
    ns = n - 0.5
    xs = np.arange(n + 1, 10 * n + 1, dtype=float)
    ys = np.arange(-n + 1, 10 * n + 1, dtype=float)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    q = c.q_continuum(ns, X, Y)
    a, b = Y + 2 * n, X + 2 * n
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.where(X == Y, 1 / b, np.abs(np.log(b / a) / (b - a)))
    ratio = q / (np.sqrt(X - ns) / np.sqrt(ns + Y) * lg)
    assert ratio.min() >= 1 / 20 and ratio.max() <= 20


# --- interior identity -----------------------------------------------------------------

def test_interior_identity_values():
    lhs, rhs = c.interior_identity_check(0.0, 0.5)
    assert rhs == pytest.approx(4.6188022, abs=1e-7)
    assert abs(lhs - rhs) < 1e-6
    lhs, rhs = c.interior_identity_check(0.3, -0.3)
    assert abs(lhs - rhs) < 1e-6


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.95, 0.95), st.floats(-0.95, 0.95))
def test_interior_identity_joint_negation(x, s):
    if abs(x - s) < 1e-3:
        return
    a = c.interior_identity_check(x, s)
    b = c.interior_identity_check(-x, -s)
    assert a[1] == pytest.approx(b[1], rel=1e-13)
    assert a[0] == pytest.approx(b[0], rel=1e-9)


def test_trig_identity(rng):
    tx = rng.uniform(0, np.pi, 1000)
    ts = rng.uniform(0, np.pi, 1000)
    assert np.max(c.trig_identity_residual(tx, ts)) < 1e-12
