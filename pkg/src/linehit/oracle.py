"""Exact hitting distributions of finite sets, segments and the axis.

The main route is the boundary representation

    H_A(x, y) = hm_A(y) + sum_{z in A} c_z(y) a(x - z),   sum_z c_z(y) = 0,

whose coefficients solve a small dense system built from the potential kernel.
A sparse absorbing solve on a finite box serves as an independent, one-sided
(sub-probability) cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .axis import AxisSpectrum
from .continuum import SegmentSpec
from .errors import DomainError, SingularSystem, WindowTooSmall
from .potential import PotentialKernel
from .walk_model import WalkLaw, validate

COND_LIMIT = 1e14
KERNEL_ACCURACY = 1e-12


def as_point(x) -> tuple[int, int]:
    """Parse a lattice point from an int, a pair, a complex or a string like ``"3+2i"``."""
    if isinstance(x, str):
        x = complex(x.replace(" ", "").replace("i", "j"))
    if isinstance(x, complex):
        if x.real != int(x.real) or x.imag != int(x.imag):
            raise DomainError(f"{x} is not a lattice point")
        return int(x.real), int(x.imag)
    if np.ndim(x) == 0:
        return int(x), 0
    a, b = x
    return int(a), int(b)


@dataclass
class HittingDistribution:
    """Probabilities of the first visited site of a target set."""

    target: str
    start: tuple[int, int]
    sites: np.ndarray
    probs: np.ndarray
    deficit: float
    method: str
    stderr: Optional[np.ndarray] = None
    error: Optional[np.ndarray] = None
    extra: dict = field(default_factory=dict)

    @property
    def table(self) -> dict:
        return {int(s): float(p) for s, p in zip(self.sites, self.probs)}

    def __getitem__(self, s) -> float:
        idx = np.nonzero(self.sites == s)[0]
        return float(self.probs[idx[0]]) if idx.size else 0.0


class FiniteSetSolver:
    """Factorized boundary system for one law and one finite set ``A``.

    Parameters
    ----------
    law : WalkLaw
    points : sequence of lattice points
        The set ``A`` (any finite set, not necessarily on the axis).
    kernel : PotentialKernel, optional
        Shared evaluator, so cached values are reused across solvers.
    """

    def __init__(self, law: WalkLaw, points: Sequence, kernel: PotentialKernel | None = None):
        validate(law)
        self.law = law
        self.points = np.asarray([as_point(p) for p in points], dtype=np.int64).reshape(-1, 2)
        if len(self.points) == 0:
            raise DomainError("target set is empty")
        if len({tuple(p) for p in self.points.tolist()}) != len(self.points):
            raise DomainError("target set has repeated points")
        self.kernel = kernel or PotentialKernel(law)
        m = len(self.points)
        diffs = (self.points[:, None, :] - self.points[None, :, :]).reshape(-1, 2)
        amat = self.kernel(diffs).reshape(m, m)
        big = np.zeros((m + 1, m + 1))
        big[:m, :m] = amat
        big[:m, m] = 1.0
        big[m, :m] = 1.0
        cond = np.linalg.cond(big)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise SingularSystem("boundary system is numerically singular", condition=cond)
        rhs = np.zeros((m + 1, m))
        rhs[:m, :m] = np.eye(m)
        sol = scipy.linalg.solve(big, rhs)
        self.coef = sol[:m]  # c_z(y), rows z, columns y
        self.hm = sol[m]
        self.condition = cond
        self.residual = float(np.abs(big @ sol - rhs).max())
        self._index = {tuple(p): i for i, p in enumerate(self.points.tolist())}

    def from_points(self, starts) -> np.ndarray:
        """``H_A(x, .)`` for starts ``x`` outside ``A``; one row per start."""
        xs = np.asarray([as_point(p) for p in starts], dtype=np.int64).reshape(-1, 2)
        for p in xs.tolist():
            if tuple(p) in self._index:
                raise DomainError(f"start {tuple(p)} lies in the target set")
        diffs = (xs[:, None, :] - self.points[None, :, :]).reshape(-1, 2)
        avals = self.kernel(diffs).reshape(len(xs), len(self.points))
        return self.hm[None, :] + avals @ self.coef

    def after_one_step(self, start) -> np.ndarray:
        """First visit after time 0, allowing ``start`` inside ``A``."""
        x = np.asarray(as_point(start), dtype=np.int64)
        out = np.zeros(len(self.points))
        outside, weights = [], []
        for e, p in zip(self.law.steps, self.law.weights):
            y = tuple((x + e).tolist())
            if y in self._index:
                out[self._index[y]] += p
            else:
                outside.append(y)
                weights.append(p)
        if outside:
            out += np.asarray(weights) @ self.from_points(outside)
        return out

    def distribution(self, start, target: str = "set") -> HittingDistribution:
        x = as_point(start)
        if x in self._index:
            probs = self.after_one_step(x)
        else:
            probs = self.from_points([x])[0]
        err = self.kernel_error_bar(probs)
        deficit = abs(1.0 - probs.sum())
        return HittingDistribution(target, x, self._labels(), probs, deficit, "potential-kernel",
                                   error=err, extra={"condition": self.condition})

    def kernel_error_bar(self, probs) -> np.ndarray:
        """Propagated error from the kernel values and the solve residual."""
        scale = np.abs(self.coef).sum(axis=0)
        return KERNEL_ACCURACY * (1.0 + 2.0 * scale) + self.residual + 0.0 * probs

    def _labels(self) -> np.ndarray:
        if np.all(self.points[:, 1] == 0):
            return self.points[:, 0].copy()
        return np.arange(len(self.points))


def hit_finite_set(law: WalkLaw, points: Sequence, x, kernel: PotentialKernel | None = None
                   ) -> HittingDistribution:
    """Hitting distribution of a finite set from ``x`` (potential-kernel method).

    ``extra['hm']`` holds the harmonic measure from infinity.
    """
    solver = FiniteSetSolver(law, points, kernel)
    if as_point(x) in solver._index:
        raise DomainError("start lies in the target set; use hit_segment for the one-step convention")
    dist = solver.distribution(x)
    dist.extra["hm"] = solver.hm.copy()
    return dist


def segment_points(seg: SegmentSpec) -> np.ndarray:
    return np.stack([seg.sites, np.zeros_like(seg.sites)], axis=1)


def hit_segment(law: WalkLaw, seg: SegmentSpec | int, x, method: str = "pk",
                kernel: PotentialKernel | None = None, box: int | None = None) -> HittingDistribution:
    """``H^{I(n)}_x`` over the ``2n - 1`` sites of the segment.

    ``method`` is ``"pk"`` (potential kernel) or ``"solve"`` (absorbing box of
    half-width ``box``; escaped mass is the deficit).
    """
    if not isinstance(seg, SegmentSpec):
        seg = SegmentSpec(int(seg))
    pts = segment_points(seg)
    if method == "pk":
        solver = FiniteSetSolver(law, pts, kernel)
        dist = solver.distribution(x, target=f"segment({seg.n})")
        dist.extra["hm"] = solver.hm.copy()
        return dist
    if method == "solve":
        xs = as_point(x)
        half = box or max(8 * seg.n, 4 * max(abs(xs[0]), abs(xs[1])), 64)
        return box_hitting(law, pts, xs, half, target=f"segment({seg.n})", labels=seg.sites)
    raise ValueError(f"unknown method {method!r}")


def box_hitting(law: WalkLaw, points, start, half: int, target: str = "set",
                labels: np.ndarray | None = None) -> HittingDistribution:
    """Absorbing solve on ``[-half, half]^2``; leaving the box counts as deficit.

    Uses one adjoint (Green's-row) solve, so the cost does not grow with ``|A|``.
    Every entry is a lower bound for the true probability and falls short of it
    by at most the deficit.
    """
    law_steps = law.steps
    p = law.weights
    pts = np.asarray([as_point(q) for q in points], dtype=np.int64).reshape(-1, 2)
    side = 2 * half + 1
    if np.any(np.abs(pts) > half) or max(abs(start[0]), abs(start[1])) > half:
        raise DomainError("box does not contain the start and the target")

    def idx(xy):
        return (xy[..., 0] + half) * side + (xy[..., 1] + half)

    nstate = side * side
    target_idx = idx(pts)
    is_target = np.zeros(nstate, dtype=bool)
    is_target[target_idx] = True
    grid = np.stack(np.meshgrid(np.arange(-half, half + 1), np.arange(-half, half + 1), indexing="ij"),
                    axis=-1).reshape(-1, 2)
    free = ~is_target
    free_ids = np.nonzero(free)[0]
    pos = -np.ones(nstate, dtype=np.int64)
    pos[free_ids] = np.arange(free_ids.size)
    rows, cols, vals = [], [], []
    hit_rows, hit_cols, hit_vals = [], [], []
    tpos = -np.ones(nstate, dtype=np.int64)
    tpos[target_idx] = np.arange(len(pts))
    src = grid[free_ids]
    for e, pe in zip(law_steps, p):
        dst = src + e
        inside = np.all(np.abs(dst) <= half, axis=1)
        di = idx(dst[inside])
        si = np.nonzero(inside)[0]
        tgt = is_target[di]
        rows.append(si[~tgt])
        cols.append(pos[di[~tgt]])
        vals.append(np.full((~tgt).sum(), pe))
        hit_rows.append(si[tgt])
        hit_cols.append(tpos[di[tgt]])
        hit_vals.append(np.full(tgt.sum(), pe))
    nfree = free_ids.size
    pmat = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(nfree, nfree))
    hmat = sp.csr_matrix((np.concatenate(hit_vals), (np.concatenate(hit_rows), np.concatenate(hit_cols))),
                         shape=(nfree, len(pts)))
    system = (sp.identity(nfree, format="csc") - pmat.tocsc()).T.tocsc()
    start = tuple(start)
    sidx = idx(np.asarray(start))
    rhs = np.zeros(nfree)
    if is_target[sidx]:
        # first visit after time 0: take one step by hand
        direct = np.zeros(len(pts))
        for e, pe in zip(law_steps, p):
            d = np.asarray(start) + e
            if np.all(np.abs(d) <= half):
                di = idx(d)
                if is_target[di]:
                    direct[tpos[di]] += pe
                else:
                    rhs[pos[di]] += pe
    else:
        direct = np.zeros(len(pts))
        rhs[pos[sidx]] = 1.0
    green = spla.spsolve(system, rhs)
    probs = direct + hmat.T @ green
    probs = np.clip(probs, 0.0, None)
    deficit = max(0.0, 1.0 - probs.sum())
    lab = labels if labels is not None else np.arange(len(pts))
    return HittingDistribution(target, start, np.asarray(lab), probs, deficit, "truncated-solve",
                               error=np.full(len(pts), deficit), extra={"half": half})


def hit_axis(law: WalkLaw, z, window: int, n_fft: int | None = None, deficit_target: float | None = None,
             spectrum: AxisSpectrum | None = None) -> HittingDistribution:
    """First visit to the real axis (after time 0) from ``z``, on ``[-W, W]``.

    Computed from the Fourier description of axis hitting; the mass outside
    the window is the reported deficit.
    """
    x0, m = as_point(z)
    if spectrum is None:
        size = 1 << max(14, int(np.ceil(np.log2(8 * (window + abs(x0)) + 1))))
        spectrum = AxisSpectrum(law, n_fft or size)
    s, probs = spectrum.hitting((x0, m), window)
    deficit = max(0.0, 1.0 - probs.sum())
    if deficit_target is not None and deficit > deficit_target:
        raise WindowTooSmall(f"mass outside [-{window}, {window}] is {deficit:.3e} > {deficit_target:.3e}")
    return HittingDistribution("axis", (x0, m), s, probs, deficit, "fourier",
                               error=np.full(s.size, 1e-13))
