"""Hitting of the real axis and of half-lines, via Fourier analysis on the axis.

Visits of the walk to the real axis form a one-dimensional walk whose step law
is ``H_0`` (first return to the axis after time 0).  With
``g_m(theta) = (1/2pi) int exp(i m t) / (1 - phi(theta, t)) dt`` (computed by
residues) the characteristic functions are

    E_0 exp(i theta X_tau)  = 1 - 1/g_0(theta)
    E_im exp(i theta X_tau) = g_m(theta) / g_0(theta)     (m != 0).

Both have a ``|theta|`` cusp at 0 which is removed analytically before the
FFT.  Half-line hitting then reduces to a first-passage problem for the axis
walk, solved exactly by a cepstral Wiener-Hopf factorization.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np
from scipy.signal import fftconvolve

from .spectral import clog1p, slice_residues
from .walk_model import WalkLaw, validate

_CHUNK = 1 << 17
_TINY_THETA = 1e-9


def _cusp(n: int) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(n) / n
    return 2.0 * np.abs(np.sin(0.5 * theta))


def _fft_index(n: int) -> np.ndarray:
    j = np.arange(n)
    return np.where(j < n // 2, j, j - n)


def coefficients_with_cusp(values: np.ndarray, c: float) -> np.ndarray:
    """Fourier coefficients of a grid function behaving like ``1 - c|theta|`` at 0.

    Returns ``out[s mod N] = (1/2pi) int f(theta) exp(-i s theta) dtheta``.
    """
    n = values.size
    rem = values - 1.0 + c * _cusp(n)
    out = np.fft.fft(rem).real / n
    s = _fft_index(n).astype(float)
    out += 4.0 * c / (np.pi * (4.0 * s * s - 1.0))
    out[0] += 1.0
    return out


class AxisSpectrum:
    """Frequency-domain description of axis hitting for one law.

    Parameters
    ----------
    law : WalkLaw
    n_fft : int
        Grid size (power of two).  Hitting tables are reliable on windows up
        to about ``n_fft / 8``.
    """

    def __init__(self, law: WalkLaw, n_fft: int = 1 << 16):
        self.moments = validate(law)
        self.law = law
        self.n_fft = int(n_fft)
        self.sigma2 = self.moments.sigma2
        self._g = {}

    @cached_property
    def theta(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_fft) / self.n_fft

    def _slices(self, m: int):
        law = self.law if m >= 0 else self.law.reflected_y()
        return law, abs(m)

    def _g_half(self, law: WalkLaw, m: int, t: np.ndarray) -> np.ndarray:
        out = np.empty(t.size, dtype=complex)
        for start in range(0, t.size, _CHUNK):
            tt = t[start:start + _CHUNK]
            u, rho, inside = slice_residues(law, tt, axis=1)
            if m == 0:
                out[start:start + _CHUNK] = rho.sum(axis=1)
            else:
                lw = np.where(inside, clog1p(u), 0.0)
                out[start:start + _CHUNK] = (rho * np.exp(m * lw)).sum(axis=1)
        return out

    def g(self, m: int) -> np.ndarray:
        """``g_m`` on the grid; entry 0 (theta = 0) is ``inf``."""
        if m not in self._g:
            law, mm = self._slices(m)
            n = self.n_fft
            half = self.theta[1:n // 2 + 1]
            vals = self._g_half(law, mm, half)
            full = np.empty(n, dtype=complex)
            full[0] = np.inf
            full[1:n // 2 + 1] = vals
            full[n // 2 + 1:] = np.conj(vals[:-1][::-1])
            self._g[m] = full
        return self._g[m]

    def cusp_coefficient(self, m: int) -> float:
        """``c_m`` with ``E_im exp(i theta X) = 1 - c_m |theta| + i b theta + ...``."""
        if m == 0:
            return self.sigma2
        law, mm = self._slices(m)
        t = np.array([_TINY_THETA])
        u, rho, inside = slice_residues(law, t, axis=1)
        lw = np.where(inside, clog1p(u), 0.0)
        diff = (rho * -np.expm1(mm * lw)).sum(axis=1)
        return float(self.sigma2 * diff.real[0])

    def char_fn(self, m: int = 0) -> np.ndarray:
        g0 = self.g(0)
        with np.errstate(divide="ignore", invalid="ignore"):
            if m == 0:
                out = 1.0 - 1.0 / g0
            else:
                out = self.g(m) / g0
        out[0] = 1.0
        return out

    def coefficients(self, m: int = 0) -> np.ndarray:
        return coefficients_with_cusp(self.char_fn(m), self.cusp_coefficient(m))

    def hitting(self, z, window: int) -> tuple[np.ndarray, np.ndarray]:
        """First axis visit (after time 0) from lattice point ``z``.

        Returns ``(s, prob)`` for ``s`` in ``[-window, window]``.
        """
        x0, m = int(z[0]), int(z[1])
        if window > self.n_fft // 4:
            raise ValueError("window too large for the FFT grid")
        coef = self.coefficients(m)
        s = np.arange(-window, window + 1)
        return s, coef[(s - x0) % self.n_fft]


class Ladder:
    """Wiener-Hopf factors of the axis walk ``1 - h(theta)``.

    ``1 - h = (1 - chi_minus_strict)(1 - chi_plus_weak)``.  Exposes
      ``R[d]``  P_0(first entry into (-inf, -1] is at -d),  d >= 1,
      ``v[j]``  renewal measure of strict descending ladder heights,
      ``V[j]``  ``sum_{i<=j} v[i]``, harmonic for the axis walk killed on
                entering the negatives.
    """

    def __init__(self, char_fn: np.ndarray, sigma2: float, length: int | None = None):
        n = char_fn.size
        self.n_fft = n
        self.sigma2 = sigma2
        self.length = int(length or n // 4)
        cusp = _cusp(n)
        with np.errstate(divide="ignore", invalid="ignore"):
            logg = np.log((1.0 - char_fn) / (sigma2 * cusp))
        logg[0] = 0.0
        c = np.fft.fft(logg) / n
        self.c0 = c[0].real
        lm = np.zeros(n, dtype=complex)
        lm[1:n // 2] = c[n - 1:n // 2:-1]
        grid = np.fft.fft(lm)
        self.log_e1 = float(lm.sum().real)
        e = np.fft.ifft(np.exp(grid))
        einv = np.fft.ifft(np.exp(-grid))
        k = self.length + 1
        half = _binom_series(0.5, k)
        mhalf = _binom_series(-0.5, k)
        desc = fftconvolve(half, e[:k].real)[:k]
        self.R = np.concatenate([[0.0], -desc[1:]])
        self.v = fftconvolve(mhalf, einv[:k].real)[:k]
        self.V = np.cumsum(self.v)
        self.weak_zero = 1.0 - sigma2 * np.exp(self.c0)

    @property
    def V_slope(self) -> float:
        """``V(x) ~ V_slope * sqrt(x)``."""
        return 2.0 / (np.sqrt(np.pi) * np.exp(self.log_e1))

    def halfline_row(self, x: int, depth: int) -> np.ndarray:
        """``P_x(first entry into (-inf,-1] at -d)`` for ``d = 1..depth``, ``x >= 0``."""
        if x < 0:
            raise ValueError("start must be >= 0")
        need = x + depth + 1
        if need > self.length + 1:
            raise ValueError("ladder tables too short; increase n_fft")
        conv = fftconvolve(self.v[:x + 1], self.R[:need])
        return conv[x + 1:x + depth + 1]

    def halfline_table(self, xmax: int, depth: int) -> np.ndarray:
        """Rows ``x = 0..xmax`` of :meth:`halfline_row`."""
        need = xmax + depth + 1
        if need > self.length + 1:
            raise ValueError("ladder tables too short; increase n_fft")
        if xmax > 4 * depth:
            # tall table: one truncated convolution per column
            cols = [fftconvolve(self.v[:xmax + 1], self.R[d:d + xmax + 1])[:xmax + 1]
                    for d in range(1, depth + 1)]
            return np.stack(cols, axis=1)
        out = np.zeros((xmax + 1, depth))
        acc = np.zeros(need)
        d = np.arange(1, depth + 1)
        for x in range(xmax + 1):
            acc[x:] += self.v[x] * self.R[:need - x]
            out[x] = acc[x + d]
        return out


def _binom_series(alpha: float, k: int) -> np.ndarray:
    """Coefficients of ``(1 - z)**alpha``."""
    out = np.empty(k)
    out[0] = 1.0
    j = np.arange(1, k)
    out[1:] = np.cumprod((j - 1.0 - alpha) / j)
    return out
