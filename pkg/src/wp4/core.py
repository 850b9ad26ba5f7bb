"""Signals, spline windows, wavelet atoms and the dense FFT-based CWT.

Conventions
-----------
Signals live in the frequency domain on a uniform positive grid
``omega_n = omega0 + n * r`` (``n = 0..N``).  A wavelet atom at the phase-space
point ``(g1, g2)`` (time, log-scale) is

    atom(omega) = exp(-2 pi i g1 omega) * exp(g2 / 2) * fhat(exp(g2) * omega)

so that ``g1`` is the time position of the atom and ``exp(g2)`` is the slope
``omega' / omega`` at which the window is read.  The wavelet coefficient is
``<s, atom> = r * sum_n s_n * conj(atom_n)``.  With the Haar measure
``exp(-g2) dg1 dg2`` the transform is an isometry up to the Duflo-Moore
norm of the window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from wp4._pl import segment_l2, segment_weighted_l2


class NumericalError(RuntimeError):
    """A computation hit a numerically degenerate state."""


@dataclass(frozen=True)
class FrequencyGrid:
    omega0: float
    r: float
    N: int

    def __post_init__(self):
        if not (self.omega0 > 0 and self.r > 0):
            raise ValueError("grid needs omega0 > 0 and r > 0")
        if self.N < 1:
            raise ValueError("grid needs N >= 1")

    @property
    def omegas(self) -> np.ndarray:
        return self.omega0 + self.r * np.arange(self.N + 1)

    @property
    def omega_max(self) -> float:
        return self.omega0 + self.r * self.N

    @property
    def period(self) -> float:
        """Time period of the sampled spectrum, ``1 / r``."""
        return 1.0 / self.r


@dataclass(frozen=True, eq=False)
class FrequencySignal:
    """Positive-frequency samples of a signal's Fourier transform.

    ``low_band`` optionally holds the discarded samples below ``omega0``
    (on the same spacing, starting at frequency 0) so that time-domain
    round trips are exact.
    """

    omega0: float
    r: float
    samples: np.ndarray
    low_band: np.ndarray | None = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size < 2:
            raise ValueError("need at least two frequency samples")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        if self.low_band is not None:
            object.__setattr__(self, "low_band", np.asarray(self.low_band, dtype=complex))
        # validates omega0, r
        FrequencyGrid(self.omega0, self.r, samples.size - 1)

    @property
    def N(self) -> int:
        return self.samples.size - 1

    @property
    def grid(self) -> FrequencyGrid:
        return FrequencyGrid(self.omega0, self.r, self.N)

    @property
    def omegas(self) -> np.ndarray:
        return self.grid.omegas

    def norm(self) -> float:
        """Riemann-sum norm ``sqrt(r * sum |s_n|^2)``."""
        return math.sqrt(self.r * float(np.sum(np.abs(self.samples) ** 2)))

    def with_samples(self, samples) -> "FrequencySignal":
        return FrequencySignal(self.omega0, self.r, samples, self.low_band)

    def padded(self, n_extra: int) -> "FrequencySignal":
        """Append ``n_extra`` zero samples above ``omega_N``."""
        if n_extra <= 0:
            return self
        return self.with_samples(np.concatenate([self.samples, np.zeros(n_extra, complex)]))

    # -- time-domain boundary -------------------------------------------------

    @classmethod
    def from_time(cls, x, sample_rate: float, low_bins: int = 4) -> "FrequencySignal":
        """Real time samples -> positive-frequency samples of the continuous FT.

        ``s(k r) = rfft(x)[k] / sample_rate`` with ``r = sample_rate / len(x)``;
        the first ``low_bins`` bins are kept aside in ``low_band``.
        """
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size < 2 * (low_bins + 2):
            raise ValueError("time signal too short")
        if low_bins < 1:
            raise ValueError("low_bins must be >= 1 (omega0 > 0)")
        spec = np.fft.rfft(x) / sample_rate
        r = sample_rate / x.size
        return cls(low_bins * r, r, spec[low_bins:], spec[:low_bins])

    def to_time(self, sample_rate: float) -> np.ndarray:
        """Inverse of :meth:`from_time` (frequencies must sit on multiples of ``r``)."""
        q = int(round(self.omega0 / self.r))
        if abs(q * self.r - self.omega0) > 1e-9 * self.r:
            raise ValueError("omega0 is not a multiple of r")
        low = self.low_band if self.low_band is not None else np.zeros(q, complex)
        if low.size != q:
            raise ValueError("low band length does not match omega0 / r")
        spec = np.concatenate([low, self.samples])
        n_time = int(round(sample_rate / self.r))
        if spec.size != n_time // 2 + 1:
            raise ValueError("spectrum does not cover 0..Nyquist for this sample rate")
        return np.fft.irfft(spec * sample_rate, n=n_time)


def _grid_of(grid) -> FrequencyGrid:
    return grid.grid if isinstance(grid, FrequencySignal) else grid


@dataclass(frozen=True, eq=False)
class SplineWindow:
    """Piecewise-linear, compactly supported, nonnegative frequency window."""

    abscissae: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.abscissae, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "abscissae", x)
        object.__setattr__(self, "values", v)
        if x.ndim != 1 or x.shape != v.shape or x.size < 3:
            raise ValueError("a window needs at least 3 nodes")
        if not (x[0] > 0 and np.all(np.diff(x) > 0)):
            raise ValueError("window abscissae must be positive and strictly increasing")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("window values must be finite and nonnegative")
        if v[0] != 0 or v[-1] != 0:
            raise ValueError("window must vanish at its first and last node")

    @classmethod
    def from_nodes(cls, nodes) -> "SplineWindow":
        nodes = np.asarray(nodes, dtype=float)
        return cls(nodes[:, 0], nodes[:, 1])

    @classmethod
    def triangle(cls, lo: float = 0.5, peak: float = 1.0, hi: float = 1.5) -> "SplineWindow":
        return cls([lo, peak, hi], [0.0, 1.0, 0.0])

    @property
    def K(self) -> int:
        return self.abscissae.size

    @property
    def peak(self) -> float:
        """Abscissa of the largest node value (first one on ties)."""
        return float(self.abscissae[np.argmax(self.values)])

    def nodes(self) -> list[list[float]]:
        return [[float(x), float(v)] for x, v in zip(self.abscissae, self.values)]

    def __call__(self, omega):
        return np.interp(omega, self.abscissae, self.values, left=0.0, right=0.0)

    def scaled(self, factor: float) -> "SplineWindow":
        return SplineWindow(self.abscissae, self.values * factor)

    def dilated(self, g2: float) -> "SplineWindow":
        """Window of ``exp(g2/2) fhat(exp(g2) omega)``."""
        return SplineWindow(self.abscissae * math.exp(-g2), self.values * math.exp(g2 / 2))

    def normalized(self) -> "SplineWindow":
        norm = window_norm_signal(self)
        if norm == 0:
            raise ValueError("cannot normalize the zero window")
        return self.scaled(1.0 / norm)


def window_norm_signal(f: SplineWindow) -> float:
    """Signal-space norm ``sqrt(int |fhat|^2 domega)``, exact per segment."""
    x, v = f.abscissae, f.values
    return math.sqrt(float(np.sum(segment_l2(x[:-1], x[1:], v[:-1], v[1:]))))


def duflo_norm(f: SplineWindow) -> float:
    """Window-space norm ``sqrt(int |fhat|^2 / omega domega)``."""
    x, v = f.abscissae, f.values
    return math.sqrt(float(np.sum(segment_weighted_l2(x[:-1], x[1:], v[:-1], v[1:]))))


@dataclass(frozen=True)
class PhasePoint:
    g1: float
    g2: float

    def __post_init__(self):
        if not (math.isfinite(self.g1) and math.isfinite(self.g2)):
            raise ValueError("phase point must be finite")

    @property
    def scale(self) -> float:
        return math.exp(self.g2)

    def frequency(self, f: SplineWindow) -> float:
        """Centre frequency ``kappa = omega'_peak * exp(-g2)`` read through window ``f``."""
        return f.peak * math.exp(-self.g2)


@dataclass(frozen=True)
class Atom:
    point: PhasePoint
    coeff: complex

    def __post_init__(self):
        if not np.isfinite(self.coeff):
            raise ValueError("atom coefficient must be finite")


def atom_sample(f: SplineWindow, g: PhasePoint, grid) -> np.ndarray:
    """Sample ``pi(g) f`` on the grid of a signal."""
    omegas = _grid_of(grid).omegas
    scale = math.exp(g.g2)
    return np.exp(-2j * np.pi * g.g1 * omegas) * math.sqrt(scale) * f(scale * omegas)


def unit_atom(f: SplineWindow, g: PhasePoint, grid) -> np.ndarray:
    """:func:`atom_sample` rescaled to unit discrete norm on ``grid``."""
    grid = _grid_of(grid)
    a = atom_sample(f, g, grid)
    norm = math.sqrt(grid.r * float(np.sum(np.abs(a) ** 2)))
    if norm == 0:
        raise NumericalError(f"atom at {g} has no support on the signal grid")
    return a / norm


def inner_product(s: FrequencySignal, v: np.ndarray) -> complex:
    """``r * sum s_n conj(v_n)``: linear in ``s``, conjugate-linear in ``v``."""
    v = np.asarray(v)
    if v.shape != s.samples.shape:
        raise ValueError(f"length mismatch: {s.samples.shape} vs {v.shape}")
    return complex(s.r * np.vdot(v, s.samples))


def synthesize(atoms, f: SplineWindow, grid, normalize: bool = True) -> FrequencySignal:
    """Sum of ``coeff * atom`` on the grid.

    With ``normalize`` each sampled atom is scaled to unit discrete norm, the
    convention used by the pursuit routines for their coefficients.
    """
    grid = _grid_of(grid)
    out = np.zeros(grid.N + 1, complex)
    sample = unit_atom if normalize else atom_sample
    for atom in atoms:
        out += atom.coeff * sample(f, atom.point, grid)
    return FrequencySignal(grid.omega0, grid.r, out)


# -- dense baseline -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DenseCWT:
    """Wavelet transform sampled on a (log-scale x time) grid.

    ``values[m, k]`` is ``V_f[s](times[k], scales[m])``.  ``weights[m]``
    already contains the ``exp(-g2)`` Haar factor; ``dt`` is the time step.
    """

    times: np.ndarray
    scales: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    dt: float

    def __post_init__(self):
        if self.values.shape != (self.scales.size, self.times.size):
            raise ValueError("values do not match the grids")

    def energy(self) -> float:
        """Weighted grid approximation of ``||V||^2`` over the Haar measure."""
        per_scale = np.sum(np.abs(self.values) ** 2, axis=1) * self.dt
        return float(np.dot(self.weights, per_scale))

    def norm(self) -> float:
        return math.sqrt(self.energy())


def trapezoid_weights(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, float)
    if x.size == 1:
        return np.ones(1)
    w = np.zeros_like(x)
    dx = np.diff(x)
    w[:-1] += dx / 2
    w[1:] += dx / 2
    return w


def scale_weights(g2: np.ndarray) -> np.ndarray:
    """Trapezoid weights on the log-scale axis times the ``exp(-g2)`` Haar factor."""
    return trapezoid_weights(g2) * np.exp(-np.asarray(g2, float))


def slope_range(f: SplineWindow, grid) -> tuple[float, float]:
    """Slopes ``omega'/omega`` touched by ``f`` over the whole grid."""
    grid = _grid_of(grid)
    return f.abscissae[0] / grid.omega_max, f.abscissae[-1] / grid.omega0


def exponential_scale_grid(f: SplineWindow, grid, num: int) -> np.ndarray:
    """Uniform ``g2`` grid covering every slope at which ``f`` meets the grid."""
    lo, hi = slope_range(f, grid)
    return np.linspace(math.log(lo), math.log(hi), num)


def linear_frequency_grid(f: SplineWindow, grid, num: int | None = None) -> np.ndarray:
    """Scales whose centre frequency ``kappa_m`` is uniform over the signal band.

    Returned as increasing ``g2 = log(omega'_peak / kappa_m)``.
    """
    grid = _grid_of(grid)
    num = grid.N + 1 if num is None else num
    kappa = np.linspace(grid.omega0, grid.omega_max, num)
    return np.sort(np.log(f.peak / kappa))


def frame_sum(f: SplineWindow, g2: np.ndarray, omegas: np.ndarray) -> np.ndarray:
    """``sum_m W_m |pi_2(g2_m) fhat(omega)|^2`` per frequency (about 1 for a good grid)."""
    g2 = np.asarray(g2, float)
    w = scale_weights(g2)
    scale = np.exp(g2)[:, None]
    mags = scale * f(scale * np.asarray(omegas)[None, :]) ** 2
    return w @ mags


def _scale_rows(s: FrequencySignal, f: SplineWindow, g2: np.ndarray, normalize: bool = False) -> np.ndarray:
    omegas = s.omegas
    scale = np.exp(g2)[:, None]
    win = np.sqrt(scale) * f(scale * omegas[None, :])
    if normalize:
        # unit discrete atom norm per scale (the norm does not depend on g1)
        norms = np.sqrt(s.r * np.sum(win**2, axis=1, keepdims=True))
        win = np.divide(win, norms, out=np.zeros_like(win), where=norms > 0)
    return s.samples[None, :] * win


def _rows_to_time(rows: np.ndarray, s: FrequencySignal, n_times: int) -> np.ndarray:
    # V(k / (M r)) = r e^{2 pi i g1 omega0} sum_n a_n e^{2 pi i k n / M}; folding n mod M is exact
    n_rows, n_freq = rows.shape
    n_fold = -(-n_freq // n_times)
    padded = np.zeros((n_rows, n_fold * n_times), complex)
    padded[:, :n_freq] = rows
    folded = padded.reshape(n_rows, n_fold, n_times).sum(axis=1)
    vals = np.fft.ifft(folded, axis=1) * n_times
    times = np.arange(n_times) / (n_times * s.r)
    return s.r * vals * np.exp(2j * np.pi * s.omega0 * times)[None, :]


def dense_cwt(
    s: FrequencySignal,
    f: SplineWindow,
    scale_grid,
    times_per_scale: int | None = None,
    chunk: int = 256,
    normalize: bool = False,
) -> DenseCWT:
    """Wavelet transform on ``scale_grid`` (log-scales) x a uniform time grid.

    Per scale the signal is multiplied by the dilated window and inverse
    FFT'd over the frequency axis.  Time samples ``k / (M r)``, ``k < M``,
    cover one period ``1/r``.  Window mass falling outside the signal grid at
    some scale is silently lost.  ``normalize`` measures against unit-norm
    discrete atoms, the pursuit convention.
    """
    g2 = np.asarray(scale_grid, dtype=float)
    if g2.size == 0:
        raise ValueError("empty scale grid")
    if g2.size > 1 and not (np.all(np.diff(g2) > 0) or np.all(np.diff(g2) < 0)):
        raise ValueError("scale grid must be strictly monotone")
    if g2.size > 1 and g2[1] < g2[0]:
        g2 = g2[::-1]
    n_times = s.N + 1 if times_per_scale is None else int(times_per_scale)
    if n_times < 1:
        raise ValueError("empty time grid")
    values = np.empty((g2.size, n_times), complex)
    for start in range(0, g2.size, chunk):
        rows = _scale_rows(s, f, g2[start : start + chunk], normalize)
        values[start : start + chunk] = _rows_to_time(rows, s, n_times)
    times = np.arange(n_times) / (n_times * s.r)
    return DenseCWT(times, g2, values, scale_weights(g2), 1.0 / (n_times * s.r))


def dense_argmax(d: DenseCWT) -> tuple[PhasePoint, float]:
    """Grid point of largest modulus; ties go to the lowest (scale, time) index."""
    mod = np.abs(d.values)
    m, k = np.unravel_index(int(np.argmax(mod)), mod.shape)
    return PhasePoint(float(d.times[k]), float(d.scales[m])), float(mod[m, k])


def dense_search(
    s: FrequencySignal,
    f: SplineWindow,
    scale_grid=None,
    times_per_scale: int | None = None,
    chunk: int = 256,
    normalize: bool = False,
) -> tuple[PhasePoint, float]:
    """Streaming version of ``dense_argmax(dense_cwt(...))``.

    Defaults to the N x N time-frequency grid (linear in frequency, ``N + 1``
    time samples per scale) without materializing the whole matrix.
    """
    g2 = linear_frequency_grid(f, s) if scale_grid is None else np.sort(np.asarray(scale_grid, float))
    n_times = s.N + 1 if times_per_scale is None else int(times_per_scale)
    best, best_point = -1.0, None
    times = np.arange(n_times) / (n_times * s.r)
    for start in range(0, g2.size, chunk):
        block = g2[start : start + chunk]
        mod = np.abs(_rows_to_time(_scale_rows(s, f, block, normalize), s, n_times))
        m, k = np.unravel_index(int(np.argmax(mod)), mod.shape)
        if mod[m, k] > best:
            best, best_point = float(mod[m, k]), PhasePoint(float(times[k]), float(block[m]))
    return best_point, best
