"""Contour-integral machinery for one-dimensional slices of the walk's symbol.

For a fixed frequency ``t`` of one coordinate, ``1 - phi`` is a Laurent
polynomial in ``w = exp(i theta)`` of the other coordinate.  Integrals of the
form ``(1/2pi) int w**k / (1 - phi) dtheta`` (k >= 0) reduce to residues at the
roots inside the unit circle.  Roots are computed in the shifted variable
``u = w - 1`` with the two lowest coefficients formed without cancellation, so
the near-double root at ``w = 1`` stays resolved as ``t -> 0``.
"""

from __future__ import annotations

from math import comb

import numpy as np
from numpy.polynomial import legendre

from .walk_model import WalkLaw


def clog1p(u):
    """Accurate complex ``log(1 + u)`` (numpy's drops the real part for tiny u)."""
    u = np.asarray(u, dtype=complex)
    re, im = u.real, u.imag
    with np.errstate(divide="ignore", invalid="ignore"):
        mod = 0.5 * np.log1p(2.0 * re + re * re + im * im)
    return mod + 1j * np.arctan2(im, 1.0 + re)


def one_minus_expi(x):
    """``1 - exp(i x)`` without cancellation."""
    x = np.asarray(x, dtype=float)
    s = np.sin(0.5 * x)
    return 2.0 * s * s - 1j * np.sin(x)


def slice_residues(law: WalkLaw, t, axis: int = 0):
    """Roots inside the unit circle and residue weights of ``1/(1 - phi)``.

    ``axis`` selects the coordinate carried by ``w``; ``t`` is the frequency
    of the other coordinate.  Returns ``(u, rho, inside)`` of shape
    ``(len(t), deg)`` with roots ``w = 1 + u`` and weights ``rho`` such that

        (1/2pi) int_{-pi}^{pi} w**k / (1 - phi) dtheta = sum_inside rho * w**k

    for every integer ``k >= 0``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    steps = law.steps
    p = law.weights
    d_w = steps[:, axis]
    d_t = steps[:, 1 - axis]
    dmin, dmax = int(d_w.min()), int(d_w.max())
    if dmin >= 0 or dmax <= 0:
        raise ValueError("law must step both ways along the residue coordinate")
    deg = dmax - dmin

    phase = np.exp(1j * np.outer(t, d_t))  # (T, E)
    b = np.zeros((t.size, deg + 1), dtype=complex)
    for m in range(deg + 1):
        b[:, m] = comb(-dmin, m)
        coef = np.array([comb(int(d) - dmin, m) for d in d_w], dtype=float)
        b[:, m] -= phase @ (p * coef)
    omc = one_minus_expi(np.outer(t, d_t))  # 1 - exp(i t e_t)
    b[:, 0] = omc @ p
    b[:, 1] = omc @ (p * d_w) - dmin * b[:, 0]

    lead = b[:, deg]
    if np.min(np.abs(lead)) < 1e-13:
        raise ValueError("leading coefficient vanishes on the frequency grid")
    if deg == 1:
        u = (-b[:, 0] / lead)[:, None]
    else:
        comp = np.zeros((t.size, deg, deg), dtype=complex)
        comp[:, 1:, :-1] = np.eye(deg - 1)
        comp[:, :, -1] = -b[:, :deg] / lead[:, None]
        u = np.linalg.eigvals(comp)

    dpoly = np.zeros_like(u)
    upow = np.ones_like(u)
    for m in range(1, deg + 1):
        dpoly += m * b[:, m, None] * upow
        upow = upow * u
    inside = 2.0 * u.real + (u * np.conj(u)).real < 0.0
    lw = clog1p(u)
    with np.errstate(all="ignore"):
        rho = np.exp((-1 - dmin) * lw) / dpoly
    rho = np.where(inside, rho, 0.0)
    return u, rho, inside


def dyadic_nodes(levels: int = 52, order: int = 24, top: float = np.pi):
    """Gauss-Legendre nodes on the dyadic partition of (0, top] toward 0."""
    x, w = legendre.leggauss(order)
    nodes, weights = [], []
    for lev in range(levels):
        hi = top * 2.0**-lev
        lo = hi / 2.0
        half = 0.5 * (hi - lo)
        nodes.append(lo + half * (x + 1.0))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)
