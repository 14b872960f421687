"""Edge functions ``mu`` and ``nu`` and the axis overstep law ``H_0``.

``nu`` is the positive solution of ``sum_{k>=0} H_0(k - j) nu(k) = nu(j)``
(all integers ``j``) normalized by ``nu(y) ~ 2 sqrt(y) / sigma^2`` as
``y -> +inf``.  On ``j >= 0`` it is harmonic for the axis walk killed on
entering the negatives, hence a multiple of the descending ladder renewal
function; on ``j < 0`` the relation itself defines it.  ``mu`` is ``nu`` of
the reversed walk.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.signal import correlate

from .errors import NotConverged, WindowTooSmall
from .halfline import halfline_kernels
from .oracle import FiniteSetSolver, hit_axis, segment_points
from .continuum import SegmentSpec
from .report import RatioReport
from .walk_model import WalkLaw, validate

EDGE_FFT = 1 << 21
TAIL_FIT = 64  # points used to fit the constant term of the renewal function


@dataclass
class EdgeFunctionTable:
    """Values of ``mu`` or ``nu`` on ``[-M, M]``."""

    kind: str
    M: int
    sigma2: float
    values: np.ndarray  # index j + M
    residual: float
    extra: dict = field(default_factory=dict)

    @property
    def args(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)

    def __call__(self, j):
        j = np.asarray(j)
        if np.any(np.abs(j) > self.M):
            raise WindowTooSmall(f"argument outside [-{self.M}, {self.M}]")
        out = self.values[j.astype(np.int64) + self.M]
        return float(out) if out.ndim == 0 else out

    @property
    def strictly_increasing(self) -> bool:
        return bool(np.all(np.diff(self.values) > 0))


def axis_overstep_law(law: WalkLaw, window: int, n_fft: int | None = None):
    """``H_0(s)``, ``|s| <= window``: displacement at the first return to the axis.

    Returns the ``HittingDistribution`` of :func:`~linehit.oracle.hit_axis`
    from the origin (one-step convention); its deficit is the mass outside
    the window.
    """
    return hit_axis(law, (0, 0), window, n_fft=n_fft)


def _sqrt_tail(A: float, y: np.ndarray) -> np.ndarray:
    """``int_A^inf sqrt(k) / (k + y)^2 dk`` for ``|y| < A``."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    sa = np.sqrt(A)
    pos, neg, zero = y > 0, y < 0, y == 0
    yp = y[pos]
    out[pos] = sa / (A + yp) + (np.pi / 2 - np.arctan(sa / np.sqrt(yp))) / np.sqrt(yp)
    a = -y[neg]
    out[neg] = sa / (A - a) - np.log((sa - np.sqrt(a)) / (sa + np.sqrt(a))) / (2 * np.sqrt(a))
    out[zero] = 2.0 / sa
    return out


@lru_cache(maxsize=8)
def _nu_pieces(law: WalkLaw, n_fft: int):
    ker = halfline_kernels(law, n_fft)
    lad = ker.ladder
    sigma2 = ker.spectrum.sigma2
    scale = (2.0 / sigma2) / lad.V_slope
    K = lad.length
    k = np.arange(K - TAIL_FIT, K + 1)
    const = float(np.mean(lad.V[k] - lad.V_slope * np.sqrt(k)))
    return ker, scale * lad.V[:K + 1], const / lad.V_slope, K


def _renewal_sum(h0: np.ndarray, nf: int, nu_pos: np.ndarray, K: int, js: np.ndarray) -> np.ndarray:
    """``sum_{0<=k<=K} H_0(k - j) nu(k)`` for each ``j`` in ``js``."""
    jlo, jhi = int(js.min()), int(js.max())
    seg = h0[np.arange(-jhi, K - jlo + 1) % nf]
    full = correlate(seg, nu_pos, mode="valid", method="fft")  # index jhi - j
    return full[jhi - js]


def compute_nu(law: WalkLaw, M: int = 2000, tol: float = 1e-6, n_fft: int | None = None,
               kind: str = "nu") -> EdgeFunctionTable:
    """``nu`` on ``[-M, M]`` with the renewal defect on ``|j| <= M/2``.

    ``tol`` is the residual the table must meet; the check is a direct
    substitution into the renewal relation.  The sums over ``k`` are explicit
    up to the ladder length and use the asymptotic forms of ``H_0`` and
    ``nu`` beyond it.
    """
    validate(law)
    M = int(M)
    nf = n_fft or EDGE_FFT
    ker, nu_pos, b, K = _nu_pieces(law, nf)
    if 4 * M > K:
        raise WindowTooSmall(f"window {M} too large for ladder length {K}; raise n_fft")
    h0 = ker.axis_law
    sigma2 = ker.spectrum.sigma2

    def tail(y):
        # sum_{k>K} H_0(k+y) nu(k) with H_0(s) ~ sigma2/(pi s^2), nu(k) ~ (2/sigma2)(sqrt k + b)
        A = K + 0.5
        return (2.0 / np.pi) * (_sqrt_tail(A, y) + b / (A + y))

    neg_y = np.arange(M, 0, -1)
    neg = _renewal_sum(h0, nf, nu_pos, K, -neg_y) + tail(neg_y)
    values = np.concatenate([neg, nu_pos[:M + 1]])
    half = M // 2
    js = np.arange(0, half + 1)
    defect = np.abs(_renewal_sum(h0, nf, nu_pos, K, js) + tail(-js) - nu_pos[js])
    residual = float(defect.max())
    tab = EdgeFunctionTable(kind, M, sigma2, values, residual,
                            extra={"n_fft": nf, "ladder_length": K, "tail_constant": b, "tol": tol,
                                   "defect": defect})
    if residual > tol:
        raise NotConverged(f"renewal residual {residual:.3e} exceeds {tol:.1e}; raise n_fft")
    return tab


def compute_mu(law: WalkLaw, M: int = 2000, tol: float = 1e-6, n_fft: int | None = None) -> EdgeFunctionTable:
    """``mu`` of ``law``: ``nu`` of the reversed walk."""
    return compute_nu(law.negated(), M, tol, n_fft, kind="mu")


def harmonic_measure_probe(law: WalkLaw, n: int, mu: EdgeFunctionTable | None = None,
                     nu: EdgeFunctionTable | None = None) -> RatioReport:
    """``pi hm(s)`` against ``mu(-n+s) nu(-n-s)`` for every site of the segment."""
    seg = SegmentSpec(n)
    M = max(2 * n + 2, 64)
    mu = mu or compute_mu(law, M)
    nu = nu or compute_nu(law, M)
    solver = FiniteSetSolver(law, segment_points(seg))
    rep = RatioReport("cor1")
    for s, h in zip(seg.sites, solver.hm):
        rep.add(n, 0, int(s), np.pi * h, mu(-n + s) * nu(-n - s))
    dev = rep.ratios() - 1.0
    rep.summary = {"max_dev": float(np.abs(dev).max()), "mean_dev": float(np.abs(dev).mean()),
                   "hm_sum": float(solver.hm.sum())}
    return rep


corollary1_probe = harmonic_measure_probe  # interface name
