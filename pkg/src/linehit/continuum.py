"""Brownian hitting densities for half-lines, segments and the slit plane.

All densities are per unit length.  Segments are ``(-n_star, n_star)`` with
``n_star = n - 1/2``; functions taking a segment accept either a
:class:`SegmentSpec` or a bare positive ``n_star``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import integrate

from .errors import DomainError, OnSlit, QuadratureFailure, SingularArguments

ABOVE, BELOW, OFF = "above", "below", "off-slit"


@dataclass(frozen=True)
class SegmentSpec:
    """Lattice segment ``{-n+1, ..., n-1}`` and its continuum version."""

    n: int
    n_star: float = field(init=False)
    sites: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError("segment index n must be a positive integer")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "n_star", self.n - 0.5)
        object.__setattr__(self, "sites", np.arange(-self.n + 1, self.n))


@dataclass(frozen=True)
class SlitPoint:
    """A point of the slit plane, or a boundary point ``s +- i0`` of the unit slit."""

    z: complex
    side: str = OFF

    def __post_init__(self):
        if self.side not in (ABOVE, BELOW, OFF):
            raise DomainError(f"unknown side {self.side!r}")
        z = complex(self.z)
        object.__setattr__(self, "z", z)
        if self.side != OFF and (z.imag != 0.0 or not abs(z.real) < 1.0):
            raise DomainError("boundary points must be real with |s| < 1")


Segment = Union[SegmentSpec, float]


def _nstar(seg: Segment) -> float:
    if isinstance(seg, SegmentSpec):
        return seg.n_star
    ns = float(seg)
    if not ns > 0:
        raise DomainError("n_star must be positive")
    return ns


def h_minus(x, s):
    """Density of the first hit of the negative half-line from ``x > 0``."""
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(x <= 0) or np.any(s >= 0):
        raise DomainError("h_minus needs x > 0 and s < 0")
    return np.sqrt(x) / (np.pi * (x - s) * np.sqrt(-s))


def h_plus(x, s):
    """Density of the first hit of the positive half-line from ``x < 0``."""
    return h_minus(-np.asarray(x, dtype=float), -np.asarray(s, dtype=float))


def h_segment_exterior(seg: Segment, x, s):
    """Hitting density of the segment from a real point outside it."""
    ns = _nstar(seg)
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(np.abs(x) <= ns) or np.any(np.abs(s) >= ns):
        raise DomainError("need |x| > n_star and |s| < n_star")
    return np.sqrt(x * x - ns * ns) / (np.pi * np.abs(x - s) * np.sqrt(ns * ns - s * s))


def h_segment_interior(seg: Segment, x, s, printed: bool = False):
    """Extension of the segment density to starts inside the segment.

    The numerator is ``n_star**2 - x*s``.  ``printed=True`` uses ``n**2 - x*s``
    with ``n = n_star + 1/2`` instead, for comparison.
    """
    ns = _nstar(seg)
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(np.abs(x) >= ns) or np.any(np.abs(s) >= ns):
        raise DomainError("need |x| < n_star and |s| < n_star")
    if np.any(x == s):
        raise SingularArguments("density is singular at x == s")
    top = (ns + 0.5) ** 2 if printed else ns * ns
    return (top - x * s) / (np.pi * (x - s) ** 2 * np.sqrt((ns * ns - x * x) * (ns * ns - s * s)))


def joukowski_inverse(z):
    """Inverse of ``w -> (w + 1/w)/2`` from the slit plane onto ``|w| > 1``."""
    z = np.asarray(z, dtype=complex)
    if np.any((z.imag == 0.0) & (np.abs(z.real) <= 1.0)):
        raise OnSlit("point lies on the slit [-1, 1]; use boundary_f")
    f = z + z * np.sqrt(1.0 - 1.0 / (z * z))
    return np.where(np.abs(f) < 1.0, 1.0 / f, f)


def boundary_f(s, side: str):
    """Boundary values ``s +- i sqrt(1 - s^2)`` of the inverse map on the slit."""
    s = np.asarray(s, dtype=float)
    if np.any(np.abs(s) >= 1.0):
        raise DomainError("need |s| < 1")
    if side not in (ABOVE, BELOW):
        raise DomainError("side must be 'above' or 'below'")
    sign = 1.0 if side == ABOVE else -1.0
    return s + 1j * sign * np.sqrt(1.0 - s * s)


def slit_plane_kernel(z, s, side: str = ABOVE):
    """Density of the first hit of ``[-1, 1]`` at ``s +- i0`` from ``z``."""
    if isinstance(s, SlitPoint):
        s, side = s.z.real, s.side
    w = joukowski_inverse(z)
    r2 = (w * np.conj(w)).real
    fs = boundary_f(s, side)
    # cos(theta(z) - theta(s)) = Re(w conj(fs)) / R with |fs| = 1
    rc = (w * np.conj(fs)).real
    s = np.asarray(s, dtype=float)
    return (r2 - 1.0) / (2.0 * np.pi * (r2 - 2.0 * rc + 1.0) * np.sqrt(1.0 - s * s))


@dataclass(frozen=True)
class AnisotropicMap:
    """Linear map taking ``Q^(1/2) B`` to a multiple of planar Brownian motion.

    It fixes the real axis and sends ``x + iy`` to ``(x - omega*y) + i*lam*y``.
    """

    qmat: np.ndarray
    omega: float = field(init=False)
    lam: float = field(init=False)

    def __post_init__(self):
        q = np.asarray(self.qmat, dtype=float)
        if q.shape != (2, 2) or not np.allclose(q, q.T):
            raise DomainError("qmat must be a symmetric 2x2 matrix")
        det = q[0, 0] * q[1, 1] - q[0, 1] ** 2
        if q[1, 1] <= 0 or det <= 0:
            raise DomainError("qmat must be positive definite")
        object.__setattr__(self, "qmat", q)
        object.__setattr__(self, "omega", q[0, 1] / q[1, 1])
        object.__setattr__(self, "lam", np.sqrt(det) / q[1, 1])

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return (z.real - self.omega * z.imag) + 1j * self.lam * z.imag


def anisotropic_kernel(amap: AnisotropicMap, z, s, side: str = ABOVE):
    """Slit hitting density for ``Q^(1/2) B`` started at ``z``."""
    return slit_plane_kernel(amap(z), s, side)


# --- two-half-line kernel q --------------------------------------------------

def _h_ratio(r):
    """``h(r) = artanh(sqrt(1-r))/sqrt(1-r)``, analytically continued past r = 1."""
    r = np.asarray(r, dtype=float)
    out = np.empty_like(r)
    near = np.abs(1.0 - r) < 0.1
    lo = ~near & (r < 1.0)
    hi = ~near & (r > 1.0)
    x = np.sqrt(1.0 - r[lo])
    out[lo] = np.arctanh(x) / x
    y = np.sqrt(r[hi] - 1.0)
    out[hi] = np.arctan(y) / y
    e = 1.0 - r[near]
    acc = np.zeros_like(e)
    for k in range(18, -1, -1):
        acc = acc * e + 1.0 / (2 * k + 1)
    out[near] = acc
    return out


def j_integral(a, b, c):
    """``int_0^inf sqrt(t) dt / (sqrt(t + c) (t + a) (t + b))`` in closed form.

    With ``K(a) = h(c/a)`` the integral equals ``2 (K(b) - K(a)) / (b - a)``.
    """
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    shape = a.shape
    a, b = a.ravel(), b.ravel()
    ka = _h_ratio(c / a)
    kb = _h_ratio(c / b)
    diff = b - a
    close = np.abs(diff) < 1e-6 * np.maximum(a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 2.0 * (kb - ka) / diff
    if np.any(close):
        m = 0.5 * (a[close] + b[close])
        r = c / m
        h = _h_ratio(r)
        e = 1.0 - r
        diag = np.empty_like(m)
        far = np.abs(e) > 1e-3
        diag[far] = (1.0 - r[far] * h[far]) / (e[far] * m[far])
        diag[~far] = _diag_series(e[~far]) / m[~far]
        out[close] = diag
    return out.reshape(shape)


def _diag_series(e):
    """``(1 - r h(r))/(1 - r)`` with ``e = 1 - r``, by its power series."""
    # r h = (1 - e) sum e^k/(2k+1); subtract from 1 and divide by e
    acc = np.zeros_like(e)
    for k in range(10, -1, -1):
        ck = 1.0 / (2 * k + 1) - 1.0 / (2 * k + 3)
        acc = acc * e + ck
    return acc


def j_integral_quad(a: float, b: float, c: float, rtol: float = 1e-10) -> float:
    """Adaptive quadrature of :func:`j_integral` after ``t = u**2``."""

    def f(u):
        t = u * u
        return 2.0 * t / (np.sqrt(t + c) * (t + a) * (t + b))

    val, err = integrate.quad(f, 0.0, np.inf, epsabs=0.0, epsrel=rtol, limit=200)
    if not np.isfinite(val) or err > 1e2 * rtol * abs(val):
        raise QuadratureFailure(f"J integral did not converge (est. error {err:.2e})")
    return val


def q_continuum(seg: Segment, x, y, method: str = "closed"):
    """Brownian analogue of the two-half-line kernel Q.

    Density at ``y`` of the first return to the line right of ``-n_star``,
    after a visit to ``(-inf, -n_star]``, for the motion started at
    ``x > n_star``.
    """
    ns = _nstar(seg)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= ns) or np.any(y <= -ns):
        raise DomainError("need x > n_star and y > -n_star")
    a = y + ns
    b = x + ns
    if method == "closed":
        jv = j_integral(a, b, 2.0 * ns)
    elif method == "quad":
        jv = np.vectorize(lambda aa, bb: j_integral_quad(aa, bb, 2.0 * ns))(a, b)
    else:
        raise ValueError(f"unknown method {method!r}")
    return np.sqrt((x - ns) / a) * jv / np.pi**2


def q_double_integral(seg: Segment, x: float, y: float) -> float:
    """``int h_minus(x - n*, u - n*) h_plus(u + n*, y + n*) du`` over ``u < -n*``."""
    ns = _nstar(seg)

    def f(v):
        u = -ns - v * v
        dens = h_minus(x - ns, u - ns) * h_plus(u + ns, y + ns)
        return float(2.0 * v * dens)

    val, _ = integrate.quad(f, 0.0, np.inf, epsabs=0.0, epsrel=1e-11, limit=400)
    return val


# --- segment identity used for interior starts --------------------------------

def interior_identity_check(x: float, s: float) -> tuple[float, float]:
    """Both sides of the interior-start identity for the unit segment.

    ``lhs = 1/(s-x)^2 + int_{|xi|>=1} h_ext(xi, s) / (xi - x)^2 dxi`` by
    quadrature with ``xi = +-(1 + u^2)``; ``rhs`` in closed form.
    """
    if not (abs(x) < 1 and abs(s) < 1):
        raise DomainError("need |x| < 1 and |s| < 1")
    if x == s:
        raise SingularArguments("x == s")
    norm = np.pi * np.sqrt(1.0 - s * s)

    def piece(sign):
        def f(u):
            xi = sign * (1.0 + u * u)
            root = u * np.sqrt(2.0 + u * u)
            return 2.0 * u * root / ((xi - x) ** 2 * abs(xi - s) * norm)

        val, err = integrate.quad(f, 0.0, np.inf, epsabs=0.0, epsrel=1e-12, limit=400)
        if err > 1e-8 * max(abs(val), 1.0):
            raise QuadratureFailure("interior identity quadrature did not converge")
        return val

    lhs = 1.0 / (s - x) ** 2 + piece(1.0) + piece(-1.0)
    rhs = (1.0 - x * s) / ((s - x) ** 2 * np.sqrt((1.0 - x * x) * (1.0 - s * s)))
    return float(lhs), float(rhs)


def trig_identity_residual(tx, ts):
    """Residual of ``1/(1-cos(tx-ts)) + 1/(1-cos(tx+ts)) = 2(1-xs)/(x-s)^2``.

    ``x = cos tx`` and ``s = cos ts``; both sides are compared relatively.
    """
    tx = np.asarray(tx, dtype=float)
    ts = np.asarray(ts, dtype=float)
    x, s = np.cos(tx), np.cos(ts)
    # 1 - cos(a) = 2 sin^2(a/2), and x - s = -2 sin((tx+ts)/2) sin((tx-ts)/2)
    left = 0.5 / np.sin(0.5 * (tx - ts)) ** 2 + 0.5 / np.sin(0.5 * (tx + ts)) ** 2
    dxs = -2.0 * np.sin(0.5 * (tx + ts)) * np.sin(0.5 * (tx - ts))
    right = 2.0 * (1.0 - x * s) / dxs**2
    return np.abs(left - right) / np.abs(right)


lemma_a1_check = interior_identity_check  # interface name
