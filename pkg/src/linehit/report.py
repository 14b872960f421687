"""Tabular comparison reports shared by the probes and the lab."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

LAB_COLUMNS = ("claim", "n", "x_re", "x_im", "s", "discrete", "continuum", "ratio", "envelope")
PROBE_COLUMNS = ("probe", "n", "x", "y_or_s", "lhs", "rhs", "ratio")


def fmt(v) -> str:
    """Frozen numeric rendering: integers as-is, reals with 17 significant digits."""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


@dataclass
class RatioRow:
    n: int
    x: complex
    s: float
    discrete: float
    continuum: float
    envelope: float = float("nan")

    @property
    def ratio(self) -> float:
        return self.discrete / self.continuum if self.continuum != 0 else float("nan")


@dataclass
class RatioReport:
    """Rows of (discrete, continuum) comparands with a summary."""

    claim: str
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def add(self, n, x, s, discrete, continuum, envelope=float("nan")):
        self.rows.append(RatioRow(int(n), complex(x), s, float(discrete), float(continuum), float(envelope)))

    def ratios(self, select=None) -> np.ndarray:
        rows = self.rows if select is None else [r for r in self.rows if select(r)]
        return np.array([r.ratio for r in rows])

    def max_dev(self, select=None) -> float:
        r = self.ratios(select)
        return float(np.max(np.abs(r - 1.0))) if r.size else float("nan")

    def mean_dev(self, select=None) -> float:
        r = self.ratios(select)
        return float(np.mean(np.abs(r - 1.0))) if r.size else float("nan")

    def lab_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(LAB_COLUMNS)
        for r in self.rows:
            s = int(r.s) if float(r.s).is_integer() else r.s
            w.writerow([self.claim, r.n, fmt(int(r.x.real)), fmt(int(r.x.imag)), fmt(s), fmt(r.discrete),
                        fmt(r.continuum), fmt(r.ratio), fmt(r.envelope)])
        return buf.getvalue()

    def probe_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(PROBE_COLUMNS)
        for r in self.rows:
            s = int(r.s) if float(r.s).is_integer() else r.s
            w.writerow([self.claim, r.n, fmt(int(r.x.real)), fmt(s), fmt(r.discrete), fmt(r.continuum),
                        fmt(r.ratio)])
        return buf.getvalue()
