"""Compiled inner loops for spline-sequence time passes and norms.

Layout: nodes sorted by (n, z); ``offsets[n]:offsets[n+1]`` is cross-section
``n``.  ``q`` holds the quantized slopes used for merging.
"""

import numpy as np
from numba import njit

_SERIES_RHO = 0.1


@njit(cache=True)
def _merge_shifted(offsets, q, shifts, active, N, n, heads, ends, runs):
    # collect the source runs feeding output cross-section n, in ascending copy order
    nr = 0
    for l in range(shifts.size):
        if not active[l]:
            continue
        src = n - shifts[l]
        if src < 0 or src > N:
            continue
        if offsets[src] < offsets[src + 1]:
            runs[nr] = l
            heads[nr] = offsets[src]
            ends[nr] = offsets[src + 1]
            nr += 1
    return nr


@njit(cache=True)
def count_shifted(offsets, q, shifts, active, N):
    """Merged node count per output cross-section (before pruning)."""
    k = shifts.size
    heads = np.empty(k, np.int64)
    ends = np.empty(k, np.int64)
    runs = np.empty(k, np.int64)
    counts = np.zeros(N + 1, np.int64)
    for n in range(N + 1):
        nr = _merge_shifted(offsets, q, shifts, active, N, n, heads, ends, runs)
        c = 0
        while True:
            best = -1
            bq = 0
            for t in range(nr):
                if heads[t] < ends[t]:
                    qt = q[heads[t]]
                    if best < 0 or qt < bq:
                        bq = qt
                        best = t
            if best < 0:
                break
            for t in range(nr):
                while heads[t] < ends[t] and q[heads[t]] == bq:
                    heads[t] += 1
            c += 1
        counts[n] = c
    return counts


@njit(cache=True)
def fill_shifted(offsets, q, z, jump, delta, shifts, coeffs, N, out_offsets, out_z, out_v, keep):
    """Sum the shifted copies weighted by each row of ``coeffs`` and rebuild node values.

    Values are right limits, except the closing node of a cross-section,
    which gets its left limit.  Nodes whose merged jump and slope change are
    both exactly zero are marked dropped in ``keep``.
    """
    k = shifts.size
    B = coeffs.shape[0]
    heads = np.empty(k, np.int64)
    ends = np.empty(k, np.int64)
    runs = np.empty(k, np.int64)
    active = np.zeros(k, np.bool_)
    for l in range(k):
        for b in range(B):
            if coeffs[b, l] != 0:
                active[l] = True
    acc_j = np.empty(B, np.complex128)
    acc_d = np.empty(B, np.complex128)
    emitted = np.zeros(B, np.int64)
    zprev = np.empty(B)
    slope = np.empty(B, np.complex128)
    vplus = np.empty(B, np.complex128)
    last_pos = np.empty(B, np.int64)
    last_j = np.empty(B, np.complex128)
    for n in range(N + 1):
        nr = _merge_shifted(offsets, q, shifts, active, N, n, heads, ends, runs)
        pos = out_offsets[n]
        emitted[:] = 0
        while True:
            best = -1
            bq = 0
            for t in range(nr):
                if heads[t] < ends[t]:
                    qt = q[heads[t]]
                    if best < 0 or qt < bq:
                        bq = qt
                        best = t
            if best < 0:
                break
            zg = z[heads[best]]
            acc_j[:] = 0
            acc_d[:] = 0
            for t in range(nr):
                l = runs[t]
                while heads[t] < ends[t] and q[heads[t]] == bq:
                    h = heads[t]
                    for b in range(B):
                        c = coeffs[b, l]
                        if c != 0:
                            acc_j[b] += c * jump[h]
                            acc_d[b] += c * delta[h]
                    heads[t] += 1
            out_z[pos] = zg
            for b in range(B):
                if acc_j[b] == 0 and acc_d[b] == 0:
                    keep[b, pos] = False
                    continue
                keep[b, pos] = True
                if emitted[b] == 0:
                    v = acc_j[b]
                    slope[b] = acc_d[b]
                else:
                    v = vplus[b] + slope[b] * (zg - zprev[b]) + acc_j[b]
                    slope[b] += acc_d[b]
                vplus[b] = v
                out_v[b, pos] = v
                zprev[b] = zg
                last_pos[b] = pos
                last_j[b] = acc_j[b]
                emitted[b] += 1
            pos += 1
        for b in range(B):
            if emitted[b] > 1:
                out_v[b, last_pos[b]] -= last_j[b]


@njit(cache=True)
def _log_moments(rho):
    i0 = np.log1p(rho)
    if rho >= _SERIES_RHO:
        return i0, 1.0 - i0 / rho, 0.5 - 1.0 / rho + i0 / (rho * rho)
    s1 = 0.0
    s2 = 0.0
    power = 1.0
    sign = 1.0
    for m in range(1, 25):
        power *= rho
        s1 += sign * power / (m + 1)
        s2 += sign * power / (m + 2)
        sign = -sign
        if power < 1e-18:
            break
    return i0, s1, s2


@njit(cache=True)
def weighted_l2_sum(n, z, v):
    """Sum over segments of ``int |h|^2 / z dz`` (same formulas as ``_pl.segment_weighted_l2``)."""
    total = 0.0
    for i in range(n.size - 1):
        if n[i + 1] != n[i]:
            continue
        z0 = z[i]
        rho = (z[i + 1] - z0) / z0
        v0 = v[i]
        dv = v[i + 1] - v0
        a = v0.real * v0.real + v0.imag * v0.imag
        b = 2.0 * (v0.real * dv.real + v0.imag * dv.imag)
        c = dv.real * dv.real + dv.imag * dv.imag
        i0, i1, i2 = _log_moments(rho)
        total += a * i0 + b * i1 + c * i2
    return total
