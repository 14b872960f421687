"""Potential kernel ``a(z)`` of a recurrent planar walk.

Convention: ``sum_e p(e) a(z + e) - a(z) = [z == 0]`` and ``a(0) = 0``, i.e.

    a(z) = (2 pi)^-2  int int (1 - exp(i theta . z)) / (1 - phi(theta)) dtheta.

The inner integral (along the dominant coordinate of ``z``) is done exactly by
residues, the outer one by Gauss-Legendre on a dyadic grid that resolves the
``1/|z|`` scale near ``t = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .spectral import clog1p, dyadic_nodes, slice_residues
from .walk_model import WalkLaw, validate

_CHUNK = 512


def _oriented(points: np.ndarray):
    """Group index (swap, negate) that maps each point to k >= |j|."""
    swap = np.abs(points[:, 1]) > np.abs(points[:, 0])
    pts = np.where(swap[:, None], points[:, ::-1], points)
    neg = pts[:, 0] < 0
    pts = np.where(neg[:, None], -pts, pts)
    return swap, neg, pts


class PotentialKernel:
    """Cached evaluator of the potential kernel for one law."""

    def __init__(self, law: WalkLaw, levels: int = 52, order: int = 24):
        validate(law)
        self.law = law
        self.levels = levels
        self.order = order
        self._cache: dict[tuple[int, int], float] = {(0, 0): 0.0}
        self._slices = {}

    def _slice(self, swap: bool, neg: bool):
        key = (swap, neg)
        if key not in self._slices:
            law = self.law
            if swap:
                law = law.swapped()
            if neg:
                law = law.negated()
            t, wt = dyadic_nodes(self.levels, self.order)
            u, rho, inside = slice_residues(law, t, axis=0)
            self._slices[key] = (t, wt, np.where(inside, clog1p(u), 0.0), rho)
        return self._slices[key]

    def _compute(self, pts: np.ndarray) -> np.ndarray:
        swap, neg, opts = _oriented(pts)
        out = np.empty(len(pts))
        for s in (False, True):
            for g in (False, True):
                sel = np.nonzero((swap == s) & (neg == g))[0]
                if sel.size == 0:
                    continue
                t, wt, lw, rho = self._slice(s, g)
                for start in range(0, sel.size, _CHUNK):
                    idx = sel[start:start + _CHUNK]
                    k = opts[idx, 0].astype(float)[:, None, None]
                    j = opts[idx, 1].astype(float)[:, None, None]
                    with np.errstate(invalid="ignore"):
                        expo = k * lw[None] + 1j * t[None, :, None] * j
                    expo = np.where(k == 0, 1j * t[None, :, None] * j, expo)
                    integrand = (rho[None] * -np.expm1(expo)).sum(axis=2).real
                    out[idx] = integrand @ wt / np.pi
        return out

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=np.int64).reshape(-1, 2)
        keys = [tuple(p) for p in pts.tolist()]
        missing = sorted({k for k in keys if k not in self._cache})
        if missing:
            vals = self._compute(np.array(missing, dtype=np.int64))
            self._cache.update(zip(missing, vals.tolist()))
        return np.array([self._cache[k] for k in keys])

    def harmonicity_residual(self, points) -> np.ndarray:
        """``sum_e p(e) a(z+e) - a(z) - [z == 0]`` at each point."""
        pts = np.asarray(points, dtype=np.int64).reshape(-1, 2)
        res = -self(pts) - np.all(pts == 0, axis=1)
        for e, p in zip(self.law.steps, self.law.weights):
            res += p * self(pts + e)
        return res


@dataclass(frozen=True)
class PotentialKernelTable:
    values: dict
    accuracy: float
    law: WalkLaw = field(repr=False)

    def __getitem__(self, z):
        return self.values[tuple(z)]


def potential_kernel(law: WalkLaw, points: Iterable, estimate_error: bool = True) -> PotentialKernelTable:
    """Tabulate ``a`` at ``points``; accuracy from a coarser quadrature rerun."""
    pts = np.asarray(list(points), dtype=np.int64).reshape(-1, 2)
    fine = PotentialKernel(law)
    vals = fine(pts)
    acc = 0.0
    if estimate_error:
        coarse = PotentialKernel(law, order=16)(pts)
        acc = float(np.max(np.abs(coarse - vals), initial=0.0))
    table = {tuple(p): float(v) for p, v in zip(pts.tolist(), vals)}
    return PotentialKernelTable(table, acc, law)


def srw_potential_exact(max_coord: int) -> dict:
    """Exact simple-walk values on the wedge ``0 <= y <= x <= max_coord``.

    Each value is a pair of rationals ``(A, B)`` meaning ``A + B/pi``.  The
    diagonal is ``a(n, n) = (4/pi) sum_{k<=n} 1/(2k-1)`` and harmonicity fills
    the rest column by column.
    """
    zero = Fraction(0)
    diag = {0: (zero, zero)}
    acc = Fraction(0)
    for n in range(1, max_coord + 2):
        acc += Fraction(1, 2 * n - 1)
        diag[n] = (zero, 4 * acc)
    vals: dict[tuple[int, int], tuple[Fraction, Fraction]] = {(0, 0): diag[0], (1, 0): (Fraction(1), zero),
                                                              (1, 1): diag[1]}

    def get(x, y):
        x, y = abs(x), abs(y)
        if y > x:
            x, y = y, x
        return vals[(x, y)]

    for x in range(1, max_coord):
        for y in range(0, x):
            # harmonicity at (x, y): a(x+1,y) = 4a(x,y) - a(x-1,y) - a(x,y+1) - a(x,y-1) (+ [z=0] term absent)
            c = get(x, y)
            terms = [get(x - 1, y), get(x, y + 1), get(x, y - 1)]
            vals[(x + 1, y)] = (4 * c[0] - sum(tt[0] for tt in terms), 4 * c[1] - sum(tt[1] for tt in terms))
        c, d = get(x, x), get(x, x - 1)
        vals[(x + 1, x)] = (2 * c[0] - d[0], 2 * c[1] - d[1])
        vals[(x + 1, x + 1)] = diag[x + 1]
    return vals


def exact_to_float(pair) -> float:
    import mpmath

    with mpmath.workdps(60):
        a, b = pair
        return float(mpmath.mpf(a.numerator) / a.denominator + mpmath.mpf(b.numerator) / b.denominator / mpmath.pi)
