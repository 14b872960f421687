"""Excursion operators between the two sides of a segment, and their continuum shadows.

For the segment ``{-n+1, ..., n-1}`` and integers ``x >= n``, ``y > -n``:

* ``Q(x, y)``  start at ``x``, first enter ``(-inf, n-1]`` at some ``s <= -n``,
  then first enter ``[-n+1, inf)`` at ``y``;
* ``K_I(x, s)`` start at ``x`` and enter ``(-inf, n-1]`` directly at ``s`` on
  the segment;
* ``Lambda = sum_{k>=1} Q^k`` restricted to ``y >= n``.

Then ``H^{I(n)}_x = (1 + Lambda)(Q_I + K_I)(x, .)``.  Every term is a
probability of an explicit event, so truncating any sum can only lose mass;
the lost mass is the truncation error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .continuum import h_minus, q_continuum
from .errors import DomainError, SeriesNotConverged
from .halfline import halfline_kernels, _fft_for
from .oracle import HittingDistribution, as_point
from .report import RatioReport
from .walk_model import WalkLaw, validate

NEUMANN_TOL = 1e-10
MAX_CELLS = 1 << 24
MAX_DEPTH = 1 << 16


@dataclass
class OperatorTable:
    """Dense table of one operator on ``rows x cols``."""

    kind: str
    n: int
    rows: np.ndarray
    cols: np.ndarray
    entries: np.ndarray
    trunc_err: float
    extra: dict = field(default_factory=dict)

    def row(self, x) -> np.ndarray:
        return self.entries[int(x) - int(self.rows[0])]

    def at(self, x, y) -> float:
        return float(self.entries[int(x) - int(self.rows[0]), int(y) - int(self.cols[0])])


@dataclass
class SegmentOperators:
    """``Q``, ``K_I`` and friends for one law and one segment, truncated at ``D``.

    Rows are ``x = n .. n+D``; ``Q`` columns are ``y = -n+1 .. n+D``; the
    intermediate sum over the far side runs over ``s = -n .. -n-S``.
    """

    law: WalkLaw
    n: int
    D: int
    S: int
    Q: OperatorTable
    K_I: OperatorTable
    hminus_tail: np.ndarray  # per row: mass of H^- beyond the tabulated range

    @property
    def n_star(self) -> float:
        return self.n - 0.5

    @property
    def Q_I(self) -> OperatorTable:
        m = 2 * self.n - 1
        return OperatorTable("Q_I", self.n, self.Q.rows, self.Q.cols[:m], self.Q.entries[:, :m],
                             self.Q.trunc_err)

    @property
    def Q_R(self) -> np.ndarray:
        """Square block ``Q(x, y)``, ``x, y >= n``."""
        return self.Q.entries[:, 2 * self.n - 1:]

    @property
    def p_n(self) -> float:
        return float(self.Q_R.max())


def build_Q(law: WalkLaw, n: int, D: int | None = None, S: int | None = None,
            n_fft: int | None = None) -> SegmentOperators:
    """Tabulate ``Q`` and ``K_I`` from the two half-line laws.

    ``D`` bounds the rows and the right-side columns (default ``64 n``).
    ``S`` is the excursion depth on the far side; an entry ``Q(x, y)`` loses
    a relative ``O(x / S)`` to it, so it defaults to the largest depth that
    keeps each intermediate table under ``MAX_CELLS`` entries.
    """
    validate(law)
    n = int(n)
    if n < 1:
        raise DomainError("n must be positive")
    D = int(D or 64 * n)
    S = int(S or min(MAX_DEPTH, max(D, MAX_CELLS // (D + 2 * n + 1))))
    width = 2 * n + S
    need = D + width + 2
    left = halfline_kernels(law, _fft_for(need, n_fft)).ladder
    right = halfline_kernels(law.reflected_x(), _fft_for(S + 2 * n + D + 2, n_fft)).ladder
    lm = left.halfline_table(D, width)             # lm[x-n, d-1] = H^-_{x-n}(-d)
    lp = right.halfline_table(S, 2 * n + D)        # lp[u, t-1] = H^+_{-u}(t)
    # s = -n - u for u = 0..S: H^-_{x-n}(s-n) has d = 2n + u; H^+_{s+n}(y+n) has start -u
    qmat = lm[:, 2 * n - 1:2 * n + S] @ lp
    rows = np.arange(n, n + D + 1)
    cols = np.arange(-n + 1, n + D + 1)
    k_i = lm[:, :2 * n - 1][:, ::-1]               # s = n-d for d = 2n-1..1 -> s = -n+1..n-1
    tail = 1.0 - lm.sum(axis=1)
    q = OperatorTable("Q", n, rows, cols, qmat, float(tail.max()), extra={"S": S})
    k = OperatorTable("K_I", n, rows, np.arange(-n + 1, n), k_i, 0.0)
    return SegmentOperators(law, n, D, S, q, k, tail)


def neumann_rows(qr: np.ndarray, start_rows: np.ndarray, kmax: int = 10_000, tol: float = NEUMANN_TOL):
    """``sum_{k>=1} start_rows @ qr^(k-1)`` with a geometric remainder bound.

    Returns ``(total, remainder_bound, terms)``.
    """
    rowsum = qr.sum(axis=1)
    p = float(rowsum.max())
    if p >= 1.0:
        raise SeriesNotConverged(f"truncated Q has row sum {p:.6f} >= 1")
    total = start_rows.copy()
    term = start_rows
    k = 1
    while k < kmax:
        term = term @ qr
        total += term
        k += 1
        if np.abs(term).max() < tol:
            break
    else:
        raise SeriesNotConverged(f"no convergence after {kmax} terms")
    remainder = float((term @ rowsum).max() * 1.0 / (1.0 - p))
    return total, remainder, k


def lambda_series(ops: SegmentOperators, xs=None, kmax: int = 10_000, tol: float = NEUMANN_TOL) -> OperatorTable:
    """``Lambda(x, y)`` for ``y >= n`` on the requested rows (all rows by default)."""
    qr = ops.Q_R
    rows = ops.Q.rows if xs is None else np.asarray(xs, dtype=np.int64)
    start = qr[rows - ops.n]
    total, rem, k = neumann_rows(qr, start, kmax, tol)
    cols = np.arange(ops.n, ops.n + ops.D + 1)
    return OperatorTable("Lambda", ops.n, rows, cols, total, rem, extra={"terms": k})


def reconstruct_segment_hit(law: WalkLaw, n: int, x, D: int | None = None, S: int | None = None,
                            ops: SegmentOperators | None = None) -> HittingDistribution:
    """``H^{I(n)}_x`` from ``(1 + Lambda)(Q_I + K_I)`` for ``|x| >= n`` on the axis.

    Starts left of the segment use the mirrored law.  ``deficit`` is the mass
    lost to truncation, which bounds the error at every site.
    """
    x0, m = as_point(x)
    if m != 0 or abs(x0) < n:
        raise DomainError("reconstruction needs an axis start with |x| >= n")
    if x0 < 0:
        mirrored = reconstruct_segment_hit(law.reflected_x(), n, -x0, D, S)
        mirrored.sites = -mirrored.sites[::-1]
        mirrored.probs = mirrored.probs[::-1]
        mirrored.start = (x0, 0)
        return mirrored
    if ops is None:
        D = D or max(64 * n, 4 * x0)
        ops = build_Q(law, n, D, S)
    if x0 > n + ops.D:
        raise DomainError("start outside the tabulated rows")
    lam = lambda_series(ops, [x0])
    src = ops.Q_I.entries + ops.K_I.entries
    probs = src[x0 - n] + lam.entries[0] @ src
    trunc = max(0.0, 1.0 - probs.sum())
    return HittingDistribution(f"segment({n})", (x0, 0), np.arange(-n + 1, n), probs, trunc, "qqq",
                               error=np.full(probs.size, trunc),
                               extra={"lambda_remainder": lam.trunc_err, "terms": lam.extra["terms"]})


# --- continuum counterparts ----------------------------------------------------

def q_grid(n: int, xs, ys) -> np.ndarray:
    ns = n - 0.5
    X, Y = np.meshgrid(np.asarray(xs, float), np.asarray(ys, float), indexing="ij")
    return q_continuum(ns, X, Y)


def k_grid(n: int, xs, ss) -> np.ndarray:
    ns = n - 0.5
    X, S = np.meshgrid(np.asarray(xs, float), np.asarray(ss, float), indexing="ij")
    return h_minus(X - ns, S - ns)


def q_cell_average(n: int, xs, ys, order: int = 4) -> np.ndarray:
    """``q`` averaged over the unit cells centred on the grid points."""
    g, w = np.polynomial.legendre.leggauss(order)
    acc = 0.0
    for gi, wi in zip(g, w):
        for gj, wj in zip(g, w):
            acc = acc + 0.25 * wi * wj * q_grid(n, np.asarray(xs) + 0.5 * gi, np.asarray(ys) + 0.5 * gj)
    return acc


@dataclass
class ResolventCheck:
    n: int
    xs: np.ndarray
    ys: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    residual: float
    budget: float
    eta: np.ndarray
    Q: np.ndarray
    q: np.ndarray
    quadrature_gap: float

    @property
    def ok(self) -> bool:
        return self.residual <= 3.0 * self.budget


def eta_resolvent_check(law: WalkLaw, n: int, grid: tuple[int, int] | None = None, D: int | None = None,
                        ops: SegmentOperators | None = None) -> ResolventCheck:
    """Both sides of ``Lambda - lambda = (1 + Lambda) eta (1 + lambda)``.

    ``q`` is discretized on the integer grid of ``Q`` (value on the unit cell
    around each point), so both operators act on the same space; ``Lambda``
    and ``lambda`` are summed independently by their Neumann series and the
    right side is formed by explicit products.  The budget collects the two
    series remainders and floating-point rounding.
    """
    ops = ops or build_Q(law, n, D or 16 * n)
    lo, hi = grid or (n + 2, 4 * n)
    pts = np.arange(n, n + ops.D + 1)
    qr = ops.Q_R
    qc = q_grid(n, pts, pts)
    big_l, rem_l, _ = neumann_rows(qr, qr.copy())
    small_l, rem_s, _ = neumann_rows(qc, qc.copy())
    eye = np.eye(pts.size)
    eta = qr - qc
    rhs = (eye + big_l) @ eta @ (eye + small_l)
    lhs = big_l - small_l
    sel = slice(lo - n, hi - n + 1)
    resid = float(np.abs(lhs[sel, sel] - rhs[sel, sel]).max())
    norm = float(np.abs(eye + big_l).sum(axis=1).max() * np.abs(eta).sum(axis=1).max()
                 * np.abs(eye + small_l).sum(axis=1).max())
    budget = rem_l * (1.0 + np.abs(eta).sum(axis=1).max() * np.abs(eye + small_l).sum(axis=1).max()) \
        + rem_s * (1.0 + np.abs(eye + big_l).sum(axis=1).max() * np.abs(eta).sum(axis=1).max()) \
        + 64 * np.finfo(float).eps * pts.size * max(norm, 1.0)
    cell = q_cell_average(n, pts[sel], pts[sel])
    gap = float(np.abs(cell - qc[sel, sel]).max())
    return ResolventCheck(n, pts[sel], pts[sel], lhs[sel, sel], rhs[sel, sel], resid, float(budget),
                          eta[sel, sel], qr[sel, sel], qc[sel, sel], gap)


# --- empirical bound probes ------------------------------------------------------

def _log_ratio_factor(x, y, n):
    """``|log((x+2n)/(y+2n)) / (x - y)|`` continued to ``x = y``."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    a, b = y + 2 * n, x + 2 * n
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.log(b / a) / (b - a)
    return np.abs(np.where(np.abs(b - a) < 1e-12, 1.0 / b, val))


PROBES = ("I", "Iprime", "II", "III", "IV", "V", "VI", "lemma31", "pn")


def bound_probe(which: str, law: WalkLaw, n: int, D: int | None = None, xmax: int | None = None,
                ops: SegmentOperators | None = None, Ns=(1, 2, 5, 10)) -> RatioReport:
    """Left and right sides of one of the comparison relations, row by row.

    The summary gives the extreme ratios (the empirical constants).
    The two-sided relations skip the boundary layers ``x - n < 2``,
    ``n - |s| < 2`` and ``n + y < 2``.
    """
    if which not in PROBES:
        raise ValueError(f"unknown probe {which!r}")
    ns = n - 0.5
    xmax = xmax or 10 * n
    rep = RatioReport(which)
    needs_ops = which not in ("I", "Iprime")
    if needs_ops and ops is None:
        ops = build_Q(law, n, D or max(64 * n, 2 * xmax))
    xs = np.arange(n + 2, xmax + 1)
    inner = np.arange(-n + 2, n - 1)
    if which in ("Iprime", "III", "lemma31") and inner.size == 0:
        raise DomainError("segment too short for an interior probe (need n >= 3)")
    if which == "I":
        ys = np.arange(-n + 2, xmax + 1)
        q = q_grid(n, xs, ys)
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                rhs = np.sqrt(x - ns) / np.sqrt(ns + y) * _log_ratio_factor(x, y, n)
                rep.add(n, x, y, q[i, j], rhs)
    elif which == "Iprime":
        ss = inner
        q = q_grid(n, xs, ss)
        for i, x in enumerate(xs):
            for j, s in enumerate(ss):
                rhs = np.sqrt(x - ns) / np.sqrt(ns + s) / x * (1.0 + np.log(x / ns))
                rep.add(n, x, s, q[i, j], rhs)
    elif which == "II":
        ys = np.arange(-n + 2, xmax + 1)
        qc = q_grid(n, xs, ys)
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                Q = ops.Q.at(x, y)
                rhs = 1.0 / np.sqrt(min(x - ns, ns + y))
                rep.add(n, x, y, abs(Q - qc[i, j]) / qc[i, j], rhs)
    elif which == "III":
        pts = np.arange(n, n + ops.D + 1)
        ss = np.arange(-n + 1, n)
        qr = q_grid(n, pts, pts)
        lam, _, _ = neumann_rows(qr, qr.copy())
        src = q_grid(n, pts, ss) + k_grid(n, pts, ss)
        prop = src + lam @ src
        keep = np.abs(ss) <= n - 2
        for x in xs:
            eta = np.abs(ops.Q_R[x - n] - qr[x - n])
            lhs = eta @ prop
            for j, s in enumerate(ss):
                if not keep[j]:
                    continue
                rhs = (1.0 + np.log(x / ns) ** 2) / (np.sqrt(x) * np.sqrt(ns * ns - s * s))
                rep.add(n, x, s, lhs[j], rhs)
    elif which in ("IV", "V", "VI"):
        xs_all = np.arange(n, xmax + 1)
        lam = lambda_series(ops, xs_all)
        ys = lam.cols
        for i, x in enumerate(xs_all):
            base = np.sqrt((x - ns) / x)
            if which == "IV":
                rep.add(n, x, 0, lam.entries[i].sum(), base)
            elif which == "V":
                for s in range(-n + 1, n):
                    lhs = (lam.entries[i] / (ys - s)).sum()
                    rep.add(n, x, s, lhs, base * np.log(3 * n / (n - s)) / n)
            else:
                for N in Ns:
                    rep.add(n, x, N, lam.entries[i][:N + 1].sum(), base * N / n)
    elif which == "lemma31":
        # sum_y Q(x, y) / (y - s) against its two-sided envelope
        ys = np.arange(n, n + ops.D + 1)
        for x in xs:
            row = ops.Q_R[x - n]
            for s in inner:
                lhs = (row / (ys - s)).sum()
                rhs = np.sqrt(x - ns) / (x * np.sqrt(n)) * (1.0 + np.log(x / n)) * np.log(3 * n / (n - s))
                rep.add(n, x, s, lhs, rhs)
    elif which == "pn":
        rep.add(n, n, 0, ops.p_n, 1.0 / np.sqrt(n))
    r = rep.ratios()
    rep.summary = {"sup_ratio": float(np.max(r)), "inf_ratio": float(np.min(r)), "rows": len(r)}
    if ops is not None:
        rep.summary["trunc_err"] = ops.Q.trunc_err
    return rep
