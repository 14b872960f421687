"""Exact sampling of where a correlated planar Brownian motion first hits ``[-1, 1]``.

The process is ``X = Q^(1/2) B`` with ``B`` standard.  Sampling is done for
``B`` (symmetric square root), against the tilted image of the slit, by
walk-on-spheres: jumps to a uniform point of the largest disc avoiding the
segment, and, far away, exact jumps to a circle enclosing the segment using
the exterior Poisson kernel (a Mobius image of a uniform angle after
inversion).  Walks stop inside an ``eps``-shell around the segment.  No time
discretization is involved, so the only bias is ``O(eps)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np
from scipy import integrate, linalg

from .continuum import ABOVE, BELOW, AnisotropicMap, anisotropic_kernel
from .errors import DomainError
from .montecarlo import McConfig, _GAMMA, _mix

HIT, CENSORED = 0, 1


@nb.njit(cache=True, inline="always")
def _uniform(state):
    return (_mix(state) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@nb.njit(cache=True)
def _wos(first, count, seed, b0x, b0y, px, py, qh, eps, cap, out_s, out_side, out_kind):
    half = np.sqrt(px * px + py * py)
    inner = 2.0 * half
    outer = 3.0 * half
    pp = px * px + py * py
    key0 = _mix(np.uint64(seed) + _GAMMA)
    for w in range(count):
        state = _mix(key0 ^ _mix(np.uint64(first + w) * _GAMMA + np.uint64(1)))
        x, y = b0x, b0y
        kind = CENSORED
        for _ in range(cap):
            t = (x * px + y * py) / pp
            t = min(1.0, max(-1.0, t))
            dx, dy = x - t * px, y - t * py
            d = np.sqrt(dx * dx + dy * dy)
            if d < eps:
                kind = HIT
                out_s[w] = t
                out_side[w] = 1 if qh[1, 0] * x + qh[1, 1] * y > 0 else -1
                break
            state += _GAMMA
            ang = 2.0 * np.pi * _uniform(state)
            r = np.sqrt(x * x + y * y)
            if r > outer:
                # exterior Poisson kernel of the circle |b| = inner, via inversion
                wr, wi = inner / r * x / r, inner / r * y / r
                ur, ui = np.cos(ang), np.sin(ang)
                nr, ni = ur + wr, ui + wi
                dr = 1.0 + wr * ur + wi * ui
                di = wr * ui - wi * ur
                den = dr * dr + di * di
                x = inner * (nr * dr + ni * di) / den
                y = inner * (ni * dr - nr * di) / den
            else:
                x += d * np.cos(ang)
                y += d * np.sin(ang)
        out_kind[w] = kind


@dataclass
class SlitHits:
    s: np.ndarray      # hit position on [-1, 1]
    side: np.ndarray   # +1 above, -1 below
    censored: int
    eps: float


def sample_slit_hits(qmat, z, cfg: McConfig, eps: float = 1e-7) -> SlitHits:
    """First-hit positions and sides of ``[-1, 1]`` for ``Q^(1/2) B`` started at ``z``."""
    q = AnisotropicMap(qmat).qmat
    z = complex(z)
    if z.imag == 0.0 and abs(z.real) <= 1.0:
        raise DomainError("start lies on the slit")
    qh = np.real(linalg.sqrtm(q))
    qih = np.linalg.inv(qh)
    b0 = qih @ np.array([z.real, z.imag])
    p = qih @ np.array([1.0, 0.0])
    n = cfg.samples
    s = np.empty(n)
    side = np.zeros(n, dtype=np.int8)
    kind = np.empty(n, dtype=np.int8)
    for first in range(0, n, cfg.chunk):
        m = min(cfg.chunk, n - first)
        sl = slice(first, first + m)
        _wos(first, m, np.uint64(cfg.seed % (1 << 64)), b0[0], b0[1], p[0], p[1], qh, eps,
             int(min(cfg.step_cap, 1 << 40)), s[sl], side[sl], kind[sl])
    hit = kind == HIT
    return SlitHits(s[hit], side[hit], int((~hit).sum()), eps)


def kernel_bin_mass(amap: AnisotropicMap, z, a: float, b: float, side: str) -> float:
    """``int_a^b`` of the anisotropic kernel, in ``s = cos(theta)`` to remove the end singularities."""
    def f(th):
        return float(anisotropic_kernel(amap, z, np.cos(th), side)) * np.sin(th)

    val, _ = integrate.quad(f, np.arccos(min(b, 1.0)), np.arccos(max(a, -1.0)), epsabs=1e-13, epsrel=1e-11)
    return val


@dataclass
class BinComparison:
    edges: np.ndarray
    side: np.ndarray
    observed: np.ndarray
    expected: np.ndarray
    stderr: np.ndarray

    @property
    def zscores(self) -> np.ndarray:
        return (self.observed - self.expected) / self.stderr


def compare_with_kernel(qmat, z, cfg: McConfig, bins: int = 8, eps: float = 1e-7) -> BinComparison:
    """Binned empirical hit law against the integrated anisotropic kernel (both sides)."""
    amap = AnisotropicMap(qmat)
    hits = sample_slit_hits(qmat, z, cfg, eps)
    edges = np.linspace(-1.0, 1.0, bins + 1)
    obs, exp, sides = [], [], []
    n = cfg.samples
    for sgn, label in ((1, ABOVE), (-1, BELOW)):
        counts, _ = np.histogram(hits.s[hits.side == sgn], bins=edges)
        obs.append(counts / n)
        exp.append([kernel_bin_mass(amap, z, a, b, label) for a, b in zip(edges[:-1], edges[1:])])
        sides.append(np.full(bins, sgn))
    obs = np.concatenate(obs)
    exp = np.asarray(exp).ravel()
    se = np.sqrt(np.maximum(exp * (1 - exp), 1e-300) / n)
    return BinComparison(edges, np.concatenate(sides), obs, exp, se)
