"""Monte Carlo sampling of first visits to axis intervals.

Each walker owns a counter-based random stream keyed by ``(seed, walker)``, so
results do not depend on how walkers are grouped into chunks or threads.

Two-dimensional walks are recurrent but their hitting times have tails of
order ``1/log t``, so plain step caps leave a large censored mass.  With a
completion radius ``R`` the walk is stopped on leaving the disc of radius
``R`` and its contribution is replaced by the exact conditional law
``H_A(X_exit, .)`` (a conditional expectation, so unbiased).
"""

from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from .continuum import SegmentSpec
from .errors import ConfigError
from .oracle import FiniteSetSolver, HittingDistribution, as_point, segment_points
from .walk_model import WalkLaw, validate

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_NO_LIMIT = np.int64(1) << np.int64(62)

ABSORBED, EXITED, CENSORED = 0, 1, 2


@dataclass(frozen=True)
class McConfig:
    samples: int
    seed: int = 42
    step_cap: int = 10**8
    chunk: int = 1 << 16

    def __post_init__(self):
        if self.samples < 1 or self.step_cap < 1 or self.chunk < 1:
            raise ConfigError("samples, step_cap and chunk must be positive")


@nb.njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@nb.njit(cache=True)
def _run_walkers(first, count, seed, x0, y0, cdf, dx, dy, lo, hi, cap, radius2, out_site, out_kind,
                 out_x, out_y):
    """Simulate walkers ``first .. first+count-1`` until they hit ``[lo, hi] x {0}``."""
    key0 = _mix(np.uint64(seed) + _GAMMA)
    nstep = cdf.size
    for w in range(count):
        state = _mix(key0 ^ _mix(np.uint64(first + w) * _GAMMA + np.uint64(1)))
        x = x0
        y = y0
        kind = CENSORED
        for _ in range(cap):
            state += _GAMMA
            u = (_mix(state) >> np.uint64(11)) * (1.0 / 9007199254740992.0)
            k = 0
            while k < nstep - 1 and u >= cdf[k]:
                k += 1
            x += dx[k]
            y += dy[k]
            if y == 0 and lo <= x <= hi:
                kind = ABSORBED
                break
            if radius2 > 0 and x * x + y * y > radius2:
                kind = EXITED
                break
        out_kind[w] = kind
        out_site[w] = x
        out_x[w] = x
        out_y[w] = y


def simulate(law: WalkLaw, start, lo: int, hi: int, cfg: McConfig, radius: float | None = None):
    """Raw outcomes ``(kind, site, x, y)`` for ``cfg.samples`` walkers."""
    validate(law)
    x0, y0 = as_point(start)
    w = law.weights
    cdf = np.cumsum(w)
    cdf[-1] = 1.0
    steps = law.steps
    radius2 = -1 if radius is None else int(np.floor(radius * radius))
    n = cfg.samples
    kind = np.empty(n, dtype=np.int8)
    site = np.empty(n, dtype=np.int64)
    ex = np.empty(n, dtype=np.int64)
    ey = np.empty(n, dtype=np.int64)
    lo = max(int(lo), -int(_NO_LIMIT))
    hi = min(int(hi), int(_NO_LIMIT))
    for first in range(0, n, cfg.chunk):
        m = min(cfg.chunk, n - first)
        sl = slice(first, first + m)
        _run_walkers(first, m, np.uint64(cfg.seed % (1 << 64)), x0, y0, cdf, steps[:, 0].copy(),
                     steps[:, 1].copy(), lo, hi, int(cfg.step_cap), radius2, site[sl], kind[sl], ex[sl], ey[sl])
    return kind, site, ex, ey


def _summarize(target, start, sites, contrib_sum, contrib_sq, n, censored, method, extra):
    mean = contrib_sum / n
    var = np.maximum(contrib_sq / n - mean * mean, 0.0)
    stderr = np.sqrt(var / n)
    return HittingDistribution(target, start, sites, mean, censored / n, method, stderr=stderr,
                               extra=extra)


def hit_segment_mc(law: WalkLaw, seg: SegmentSpec | int, x, cfg: McConfig, radius: float | None = None,
                   solver: FiniteSetSolver | None = None) -> HittingDistribution:
    """Empirical ``H^{I(n)}_x``; censored walkers are reported as deficit.

    With ``radius`` set, walkers leaving the disc are completed with the exact
    law from the exit point (requires the boundary solver, built if absent).
    """
    if not isinstance(seg, SegmentSpec):
        seg = SegmentSpec(int(seg))
    start = as_point(x)
    lo, hi = -seg.n + 1, seg.n - 1
    kind, site, ex, ey = simulate(law, start, lo, hi, cfg, radius)
    sites = seg.sites
    nsite = sites.size
    absorbed = kind == ABSORBED
    counts = np.bincount(site[absorbed] - lo, minlength=nsite).astype(float)
    csum = counts.copy()
    csq = counts.copy()
    extra = {"absorbed": int(absorbed.sum())}
    exited = kind == EXITED
    if exited.any():
        solver = solver or FiniteSetSolver(law, segment_points(seg))
        pts = np.stack([ex[exited], ey[exited]], axis=1)
        uniq, inv = np.unique(pts, axis=0, return_inverse=True)
        table = solver.from_points(uniq)
        mult = np.bincount(inv.ravel(), minlength=len(uniq)).astype(float)
        csum += mult @ table
        csq += mult @ (table * table)
        extra["exited"] = int(exited.sum())
        extra["exit_points"] = len(uniq)
    censored = int((kind == CENSORED).sum())
    method = "monte-carlo" if radius is None else "monte-carlo+completion"
    return _summarize(f"segment({seg.n})", start, sites, csum, csq, cfg.samples, censored, method, extra)


def hit_interval_mc(law: WalkLaw, start, lo: int | None, hi: int | None, window: tuple[int, int],
                    cfg: McConfig) -> HittingDistribution:
    """Empirical first visit to ``[lo, hi] x {0}`` (``None`` = unbounded), tabulated on ``window``.

    Walkers hitting outside the window or censored at the step cap count as
    deficit; each table entry is therefore a lower estimate.
    """
    lo_i = -int(_NO_LIMIT) if lo is None else int(lo)
    hi_i = int(_NO_LIMIT) if hi is None else int(hi)
    kind, site, _, _ = simulate(law, start, lo_i, hi_i, cfg, None)
    sites = np.arange(window[0], window[1] + 1)
    hit = (kind == ABSORBED) & (site >= window[0]) & (site <= window[1])
    counts = np.bincount(site[hit] - window[0], minlength=sites.size).astype(float)
    deficit_count = cfg.samples - int(hit.sum())
    dist = _summarize("interval", as_point(start), sites, counts, counts, cfg.samples, deficit_count,
                      "monte-carlo", {"censored": int((kind == CENSORED).sum())})
    return dist
