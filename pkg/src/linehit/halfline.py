"""First visits to the half-lines ``{-1, -2, ...}`` and ``{1, 2, ...}`` of the axis."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .axis import AxisSpectrum, Ladder
from .errors import BudgetInfeasible, DomainError
from .oracle import FiniteSetSolver, HittingDistribution, as_point
from .walk_model import WalkLaw

DEFAULT_FFT = 1 << 18
MAX_FFT = 1 << 23


@dataclass(frozen=True)
class HalfLineKernels:
    """Axis spectrum and descending ladder data of one law."""

    spectrum: AxisSpectrum
    ladder: Ladder
    axis_law: np.ndarray  # H_0 coefficients indexed by s mod N


@lru_cache(maxsize=16)
def halfline_kernels(law: WalkLaw, n_fft: int = DEFAULT_FFT) -> HalfLineKernels:
    spec = AxisSpectrum(law, n_fft)
    ch = spec.char_fn(0)
    return HalfLineKernels(spec, Ladder(ch, spec.sigma2), spec.coefficients(0))


@dataclass
class HalfLineDistribution:
    """``H^{sign}_{start}`` on the sites ``sign*1, ..., sign*D``."""

    sign: str
    start: tuple[int, int]
    sites: np.ndarray
    probs: np.ndarray
    tail_bound: float
    D: int
    method: str = "wiener-hopf"
    extra: dict = field(default_factory=dict)

    @property
    def table(self) -> dict:
        return {int(s): float(p) for s, p in zip(self.sites, self.probs)}

    @property
    def tail_constant(self) -> float:
        """``tail_bound * sqrt(D)``, the fitted constant of the ``D^(-1/2)`` tail."""
        return self.tail_bound * np.sqrt(self.D)

    def __getitem__(self, s) -> float:
        idx = np.nonzero(self.sites == s)[0]
        return float(self.probs[idx[0]]) if idx.size else 0.0


def _fft_for(need: int, n_fft: int | None) -> int:
    if n_fft:
        return n_fft
    size = DEFAULT_FFT
    while size // 4 < need:
        size *= 2
        if size > MAX_FFT:
            raise BudgetInfeasible(f"half-line tables of length {need} exceed the FFT budget")
    return size


def _negative_side(law: WalkLaw, start: tuple[int, int], depth: int, reach: int, n_fft: int | None):
    """``H^-_start(-d)``, d = 1..depth, and the mass lost by truncating the axis sum at ``reach``."""
    x0, m = start
    if m == 0 and x0 >= 0:
        ker = halfline_kernels(law, _fft_for(x0 + depth + 2, n_fft))
        return ker.ladder.halfline_row(x0, depth), 0.0
    ker = halfline_kernels(law, _fft_for(reach + depth + 2, n_fft))
    nf = ker.spectrum.n_fft
    if m == 0:
        first = ker.axis_law[(np.arange(-x0 - depth, reach - x0 + 1)) % nf]
    else:
        first = ker.spectrum.coefficients(m)[(np.arange(-x0 - depth, reach - x0 + 1)) % nf]
    # first[i] is the probability of the first axis visit at site i - depth
    direct = first[:depth][::-1].copy()
    landing = first[depth:]
    rows = ker.ladder.halfline_table(reach, depth)
    out = direct + landing @ rows
    lost = max(0.0, 1.0 - first.sum())
    return out, lost


def hit_halfline(law: WalkLaw, sign: str, start, D: int, n_fft: int | None = None,
                 reach: int | None = None) -> HalfLineDistribution:
    """First visit (after time 0) to the negative (``"-"``) or positive (``"+"``) half-line.

    Starts on the axis outside the target use the exact ladder factorization.
    Other starts first go to the axis (exactly), then continue; axis landing
    sites beyond ``reach`` are dropped and their mass is added to the tail.
    """
    if sign not in ("-", "+"):
        raise DomainError("sign must be '-' or '+'")
    x0, m = as_point(start)
    D = int(D)
    if D < 1:
        raise DomainError("D must be positive")
    work_law = law if sign == "-" else law.reflected_x()
    wx = x0 if sign == "-" else -x0
    reach = int(reach or max(8 * D, 4096))
    probs, lost = _negative_side(work_law, (wx, m), D, reach, n_fft)
    probs = np.clip(probs, 0.0, None)
    tail = max(0.0, 1.0 - probs.sum())
    d = np.arange(1, D + 1)
    sites = -d if sign == "-" else d
    return HalfLineDistribution(sign, (x0, m), sites, probs, tail, D, extra={"axis_cutoff_mass": lost})


def hit_halfline_truncated(law: WalkLaw, sign: str, start, D: int) -> HittingDistribution:
    """First visit to the first ``D`` sites of the half-line (potential-kernel solve).

    Each entry bounds the true half-line probability from above; the sum of
    the excesses equals the true mass beyond ``D``.
    """
    sgn = -1 if sign == "-" else 1
    sites = sgn * np.arange(1, D + 1)
    pts = np.stack([sites, np.zeros_like(sites)], axis=1)
    solver = FiniteSetSolver(law, pts)
    dist = solver.distribution(as_point(start), target=f"halfline{sign}[{D}]")
    dist.method = "truncated-set"
    return dist
