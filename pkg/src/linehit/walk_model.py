"""Finite-support increment laws on the square lattice and their moments."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import BadProbabilities, NotIrreducible, NotZeroMean

Number = Union[float, Fraction]

SUM_TOL = 1e-12
MEAN_TOL = 1e-12
MAX_CLOSURE_STEPS = 64


@dataclass(frozen=True)
class WalkLaw:
    """Distribution of one increment ``S_1`` of the walk.

    Probabilities may be given as :class:`fractions.Fraction` to keep the
    moment computations exact.
    """

    support: tuple[tuple[int, int], ...]
    probs: tuple[Number, ...]
    name: str = "law"

    def __post_init__(self):
        support = tuple((int(dx), int(dy)) for dx, dy in self.support)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", tuple(self.probs))
        if len(support) != len(self.probs):
            raise BadProbabilities("support and probs have different lengths")
        if len(set(support)) != len(support):
            raise BadProbabilities("support points are not distinct")
        if not support:
            raise BadProbabilities("empty support")

    @property
    def steps(self) -> np.ndarray:
        return np.array(self.support, dtype=np.int64).reshape(-1, 2)

    @property
    def weights(self) -> np.ndarray:
        return np.array([float(p) for p in self.probs])

    @property
    def exact(self) -> bool:
        return all(isinstance(p, Fraction) for p in self.probs)

    def transformed(self, matrix, name: str | None = None) -> "WalkLaw":
        """Image of the law under an integer 2x2 matrix acting on increments."""
        m = np.asarray(matrix, dtype=np.int64)
        support = tuple(tuple(int(c) for c in m @ np.array(e)) for e in self.support)
        return WalkLaw(support, self.probs, name or self.name)

    def negated(self) -> "WalkLaw":
        """The time-reversed walk (increments negated)."""
        return self.transformed([[-1, 0], [0, -1]], f"-{self.name}")

    def reflected_x(self) -> "WalkLaw":
        return self.transformed([[-1, 0], [0, 1]], f"rx({self.name})")

    def reflected_y(self) -> "WalkLaw":
        return self.transformed([[1, 0], [0, -1]], f"ry({self.name})")

    def swapped(self) -> "WalkLaw":
        return self.transformed([[0, 1], [1, 0]], f"sw({self.name})")

    def is_symmetric(self) -> bool:
        table = dict(zip(self.support, self.probs))
        return all(table.get((-dx, -dy)) == p for (dx, dy), p in table.items())

    def char_fn(self, t1, t2):
        """phi(t) = E exp(i t . S_1), broadcast over ``t1`` and ``t2``."""
        t1 = np.asarray(t1, dtype=float)
        t2 = np.asarray(t2, dtype=float)
        out = np.zeros(np.broadcast(t1, t2).shape, dtype=complex)
        for (dx, dy), p in zip(self.support, self.weights):
            out += p * np.exp(1j * (dx * t1 + dy * t2))
        return out


@dataclass(frozen=True)
class MomentReport:
    mean: np.ndarray
    covariance: np.ndarray
    sigma2: float
    first_coord_log_moment: float

    @property
    def omega(self) -> float:
        return self.covariance[0, 1] / self.covariance[1, 1]

    @property
    def lam(self) -> float:
        return self.sigma2 / self.covariance[1, 1]


def make_simple_walk() -> WalkLaw:
    q = Fraction(1, 4)
    return WalkLaw(((1, 0), (-1, 0), (0, 1), (0, -1)), (q, q, q, q), "srw")


def make_skew_walk() -> WalkLaw:
    """A non-symmetric mean-zero law used as the asymmetric test case."""
    return WalkLaw(
        ((2, 0), (-1, 1), (-1, -1), (0, 1), (0, -1)),
        (Fraction(1, 6), Fraction(1, 6), Fraction(1, 6), Fraction(1, 4), Fraction(1, 4)),
        "skew",
    )


def _closure_reaches(steps: np.ndarray, targets: Sequence[tuple[int, int]]) -> bool:
    reach = int(np.abs(steps).max())
    half = 8 * reach + 2
    size = 2 * half + 1
    grid = np.zeros((size, size), dtype=bool)
    frontier = np.zeros_like(grid)
    frontier[half, half] = True
    for _ in range(MAX_CLOSURE_STEPS):
        nxt = np.zeros_like(grid)
        for dx, dy in steps:
            shifted = np.zeros_like(frontier)
            xs = slice(max(dx, 0), size + min(dx, 0))
            xd = slice(max(-dx, 0), size + min(-dx, 0))
            ys = slice(max(dy, 0), size + min(dy, 0))
            yd = slice(max(-dy, 0), size + min(-dy, 0))
            shifted[xs, ys] = frontier[xd, yd]
            nxt |= shifted
        frontier = nxt & ~grid
        grid |= nxt
        if all(grid[half + tx, half + ty] for tx, ty in targets):
            return True
        if not frontier.any():
            break
    return False


def validate(law: WalkLaw) -> MomentReport:
    """Check the standing assumptions and return the moment data.

    Raises
    ------
    BadProbabilities
        if some probability is not positive or they do not sum to one.
    NotZeroMean
        if the mean increment is not (0, 0).
    NotIrreducible
        if sums of increments do not generate the whole lattice.
    """
    if any(p <= 0 for p in law.probs):
        raise BadProbabilities("probabilities must be positive")
    if law.exact:
        total = sum(law.probs)
        if total != 1:
            raise BadProbabilities(f"probabilities sum to {total}, not 1")
        mx = sum(p * e[0] for p, e in zip(law.probs, law.support))
        my = sum(p * e[1] for p, e in zip(law.probs, law.support))
        if mx != 0 or my != 0:
            raise NotZeroMean(f"mean increment is ({mx}, {my}); the walk must have zero mean")
        c = [[sum(p * e[i] * e[j] for p, e in zip(law.probs, law.support)) for j in range(2)]
             for i in range(2)]
        cov = np.array([[float(v) for v in row] for row in c])
        det = c[0][0] * c[1][1] - c[0][1] * c[1][0]
        mean = np.zeros(2)
    else:
        w = law.weights
        if abs(w.sum() - 1.0) > SUM_TOL:
            raise BadProbabilities(f"probabilities sum to {w.sum()!r}, not 1")
        steps = law.steps.astype(float)
        mean = w @ steps
        if np.abs(mean).max() > MEAN_TOL:
            raise NotZeroMean(f"mean increment is {tuple(mean)}; the walk must have zero mean")
        cov = (steps * w[:, None]).T @ steps
        det = cov[0, 0] * cov[1, 1] - cov[0, 1] * cov[1, 0]
    if not _closure_reaches(law.steps, [(1, 0), (0, 1), (-1, 0), (0, -1)]):
        raise NotIrreducible(f"law {law.name!r} does not generate the lattice; the walk must be irreducible")
    if det <= 0:
        raise NotIrreducible("covariance is degenerate")
    sigma2 = math.sqrt(float(det))
    x = np.abs(law.steps[:, 0]).astype(float)
    logs = np.where(x > 0, x**2 * np.log(np.where(x > 0, x, 1.0)), 0.0)
    return MomentReport(
        mean=np.asarray(mean, dtype=float),
        covariance=cov,
        sigma2=sigma2,
        first_coord_log_moment=float(law.weights @ logs),
    )


def _parse_prob(value) -> Number:
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, int):
        return Fraction(value)
    return float(value)


def law_from_records(records: Iterable[dict], name: str = "law") -> WalkLaw:
    support, probs = [], []
    for rec in records:
        support.append((int(rec["dx"]), int(rec["dy"])))
        probs.append(_parse_prob(rec["p"]))
    return WalkLaw(tuple(support), tuple(probs), name)


def load_law(spec: str) -> WalkLaw:
    """Resolve a ``--walk`` argument: ``srw``, ``skew`` or a JSON file path.

    The file holds a list of ``{"dx": int, "dy": int, "p": number-or-"a/b"}``
    records, optionally wrapped as ``{"name": ..., "steps": [...]}``.
    """
    if spec == "srw":
        return make_simple_walk()
    if spec == "skew":
        return make_skew_walk()
    path = Path(spec)
    data = json.loads(path.read_text())
    if isinstance(data, dict):
        return law_from_records(data["steps"], data.get("name", path.stem))
    return law_from_records(data, path.stem)


def law_to_records(law: WalkLaw) -> list[dict]:
    out = []
    for (dx, dy), p in zip(law.support, law.probs):
        out.append({"dx": dx, "dy": dy, "p": str(p) if isinstance(p, Fraction) else p})
    return out
