"""Closed-form integrals of piecewise-linear functions.

All routines act on arrays of segments: each segment is given by its end
abscissae ``x0 < x1`` and complex end values ``v0, v1``, the function being
the linear interpolant in between.
"""

import numpy as np

# below this relative segment length the log-based closed forms cancel badly
_SERIES_RHO = 0.1
_SERIES_TERMS = 24


def segment_l2(x0, x1, v0, v1):
    """Integral of ``|h|^2`` over each segment."""
    x0, x1 = np.asarray(x0, float), np.asarray(x1, float)
    v0, v1 = np.asarray(v0, complex), np.asarray(v1, complex)
    quad = np.abs(v0) ** 2 + np.real(v0 * np.conj(v1)) + np.abs(v1) ** 2
    return (x1 - x0) * quad / 3.0


def _log_moments(rho):
    """Return I_k = int_0^1 t^k rho/(1 + rho t) dt for k = 0, 1, 2."""
    rho = np.asarray(rho, float)
    small = rho < _SERIES_RHO
    i0 = np.log1p(rho)
    i1 = np.empty_like(rho)
    i2 = np.empty_like(rho)

    big = ~small
    rb = rho[big]
    lb = i0[big]
    i1[big] = 1.0 - lb / rb
    i2[big] = 0.5 - 1.0 / rb + lb / rb**2

    rs = rho[small]
    s1 = np.zeros_like(rs)
    s2 = np.zeros_like(rs)
    power = np.ones_like(rs)
    sign = 1.0
    top = float(rs.max()) if rs.size else 0.0
    # terms needed for rho_max^m below double precision
    terms = _SERIES_TERMS if top <= 0 else min(_SERIES_TERMS, max(2, int(np.ceil(-37.0 / np.log(top)))))
    for m in range(1, terms + 1):
        power = power * rs
        s1 += sign * power / (m + 1)
        s2 += sign * power / (m + 2)
        sign = -sign
    i1[small] = s1
    i2[small] = s2
    return i0, i1, i2


def segment_weighted_l2(x0, x1, v0, v1):
    """Integral of ``|h(x)|^2 / x`` over each segment (requires ``x0 > 0``).

    The substitution ``x = x0 (1 + rho t)`` with ``rho = (x1 - x0)/x0`` turns
    the integrand into a quadratic in ``t`` against ``rho/(1 + rho t)``; the
    three resulting moments are evaluated in closed form, or by their power
    series when the segment is short relative to its position.
    """
    x0, x1 = np.asarray(x0, float), np.asarray(x1, float)
    v0, v1 = np.asarray(v0, complex), np.asarray(v1, complex)
    rho = (x1 - x0) / x0
    dv = v1 - v0
    a = np.abs(v0) ** 2
    b = 2.0 * np.real(v0 * np.conj(dv))
    c = np.abs(dv) ** 2
    i0, i1, i2 = _log_moments(rho)
    return a * i0 + b * i1 + c * i2
