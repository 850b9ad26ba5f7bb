"""Independent reference computations used by the tests.

Nothing here calls the spline-sequence code: energies come from the dense
FFT transform with explicit quadrature, or from direct numerical integration.
"""

import math

import numpy as np
from scipy import integrate

from wp4.core import FrequencySignal, SplineWindow, dense_cwt, scale_weights


def quad_window_norms(f: SplineWindow) -> tuple[float, float]:
    """(signal norm, Duflo-Moore norm) of ``f`` by adaptive quadrature per segment."""
    s2 = w2 = 0.0
    for x0, x1 in zip(f.abscissae[:-1], f.abscissae[1:]):
        s2 += integrate.quad(lambda x: f(x) ** 2, x0, x1, epsabs=1e-14, epsrel=1e-13)[0]
        w2 += integrate.quad(lambda x: f(x) ** 2 / x, x0, x1, epsabs=1e-14, epsrel=1e-13)[0]
    return math.sqrt(s2), math.sqrt(w2)


def random_window(rng, k_min=3, k_max=6) -> SplineWindow:
    K = int(rng.integers(k_min, k_max + 1))
    x = np.sort(rng.uniform(0.3, 3.0, K))
    while np.any(np.diff(x) < 1e-3):
        x = np.sort(rng.uniform(0.3, 3.0, K))
    v = rng.uniform(0.1, 1.0, K)
    v[0] = v[-1] = 0.0
    return SplineWindow(x, v)


def log_grid(lo: float, hi: float, num: int, kinks=()) -> np.ndarray:
    """Uniform grid in ``log z`` on ``[lo, hi]`` with extra points at ``kinks``."""
    g = np.linspace(math.log(lo), math.log(hi), num)
    extra = [math.log(k) for k in kinks if lo < k < hi]
    return np.unique(np.concatenate([g, extra]))


def filtered_dense_energy(
    s: FrequencySignal,
    f: SplineWindow,
    band: tuple[float, float] | None,
    time_filters,
    n_scales: int = 1500,
    n_times: int = 4096,
) -> float:
    """``int |P(g1) V_f[s](g1, g2)|^2 exp(-g2) dg1 dg2`` with ``g2`` restricted to ``log band``.

    ``P`` is the product of the callables in ``time_filters`` evaluated at
    ``2 pi r g1``.  Time integration is exact for ``n_times`` above the
    frequency span of ``P V``; the log-scale integral is a trapezoid rule.
    """
    lo_all = f.abscissae[0] / s.grid.omega_max
    hi_all = f.abscissae[-1] / s.omega0
    lo, hi = (lo_all, hi_all) if band is None else (max(band[0], lo_all), min(band[1], hi_all))
    if lo >= hi:
        return 0.0
    g2 = log_grid(lo, hi, n_scales)
    d = dense_cwt(s, f, g2, times_per_scale=n_times)
    P = np.ones(d.times.size, complex)
    for filt in time_filters:
        P *= filt(2 * np.pi * s.r * d.times)
    per_scale = np.sum(np.abs(d.values * P[None, :]) ** 2, axis=1) * d.dt
    return float(np.dot(scale_weights(d.scales), per_scale))
