"""Spline sequences: the discretized window-signal space.

A spline sequence holds, for each signal frequency ``omega_n``, a
piecewise-linear cross-section ``h_n(omega')`` of a window-signal function.
Nodes are stored flat and sorted by ``(n, z)`` where ``z = omega' / omega_n``
is the node's slope.  Slopes are what every search operation preserves:

* a perfect scale-pass keeps the part of each cross-section whose slope lies
  in a band;
* a time exponent moves cross-section ``n`` to ``n + m`` along slope rays,
  which leaves every node slope unchanged (the abscissa is rescaled by
  ``omega_{n+m} / omega_n``).

Cross-sections vanish outside ``[first node, last node]`` and may jump there;
sums are formed through a jump / slope-change representation so that adding
many shifted copies costs one sort.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from wp4._kernels import count_shifted, fill_shifted, weighted_l2_sum
from wp4.core import FrequencyGrid, FrequencySignal, PhasePoint, SplineWindow

# node slopes equal to ~2**-40 relative are merged (mantissa bits dropped from the key)
_QSHIFT = 12
MERGE_RTOL = 2.0**-40


@dataclass(frozen=True)
class SlopeBand:
    a: float
    b: float

    def __post_init__(self):
        if not (0 < self.a < self.b and math.isfinite(self.b)):
            raise ValueError(f"invalid slope band [{self.a}, {self.b}]")

    @property
    def log_width(self) -> float:
        return math.log(self.b / self.a)

    def split(self) -> tuple["SlopeBand", "SlopeBand"]:
        c = slope_bisect(self)
        return SlopeBand(self.a, c), SlopeBand(c, self.b)

    def __contains__(self, z) -> bool:
        return self.a <= z <= self.b


def slope_bisect(band: SlopeBand) -> float:
    """Harmonic mean of the band edges.

    Splitting at ``c = 2 / (1/a + 1/b)`` halves the band in ``1/z``, which
    is uniform in frequency and splits every node line evenly.
    """
    return 2.0 / (1.0 / band.a + 1.0 / band.b)


def indicator_coeffs(order: int) -> np.ndarray:
    """Fourier coefficients ``c_l``, ``l = -L..L``, of the indicator of ``[-pi, 0]``."""
    if order < 1:
        raise ValueError("order must be >= 1")
    l = np.arange(-order, order + 1)
    c = np.zeros(l.size, complex)
    odd = l % 2 == 1
    c[odd] = 1j / (np.pi * l[odd])
    c[order] = 0.5
    return c


@dataclass(frozen=True, eq=False)
class TrigFilter:
    """Periodic time-pass ``sum_l c_l exp(i 2^level l x)``.

    ``bit = 1`` selects the complement ``1 - R``.  In the search, ``x`` is the
    normalized time ``2 pi r g1``.
    """

    order: int
    coeffs: np.ndarray
    level: int = 0
    bit: int = 0

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, complex)
        object.__setattr__(self, "coeffs", coeffs)
        if self.order < 1 or coeffs.shape != (2 * self.order + 1,):
            raise ValueError("need 2L+1 coefficients with L >= 1")
        if self.level < 0 or self.bit not in (0, 1):
            raise ValueError("level must be >= 0 and bit in {0, 1}")

    @classmethod
    def half_period(cls, order: int, level: int = 0, bit: int = 0) -> "TrigFilter":
        return cls(order, indicator_coeffs(order), level, bit)

    def with_bit(self, bit: int) -> "TrigFilter":
        return TrigFilter(self.order, self.coeffs, self.level, bit)

    def effective_coeffs(self) -> np.ndarray:
        if self.bit == 0:
            return self.coeffs
        c = -self.coeffs
        c[self.order] += 1.0
        return c

    def shifts(self) -> np.ndarray:
        """Grid steps of each exponent: ``2^level * l``."""
        return (2**self.level) * np.arange(-self.order, self.order + 1)

    def __call__(self, x):
        x = np.asarray(x, float)
        phases = np.exp(1j * np.multiply.outer(x, self.shifts()))
        return phases @ self.effective_coeffs()


# -- sequences --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SplineSequence:
    grid: FrequencyGrid
    n: np.ndarray
    z: np.ndarray
    v: np.ndarray
    dropped: int = field(default=0, compare=False)

    @classmethod
    def empty(cls, grid: FrequencyGrid) -> "SplineSequence":
        return cls(grid, np.zeros(0, np.int64), np.zeros(0), np.zeros(0, complex))

    @classmethod
    def from_cross_sections(cls, grid: FrequencyGrid, sections) -> "SplineSequence":
        """Build from ``{n: (abscissae, values)}``."""
        ns, zs, vs = [], [], []
        omegas = grid.omegas
        for idx in sorted(sections):
            x, val = sections[idx]
            x = np.asarray(x, float)
            val = np.asarray(val, complex)
            if not 0 <= idx <= grid.N:
                raise ValueError(f"cross-section index {idx} outside grid")
            if x.shape != val.shape or x.ndim != 1:
                raise ValueError("abscissae and values must be 1-D of equal length")
            if x.size == 0:
                continue
            if not (x[0] > 0 and np.all(np.diff(x) > 0)):
                raise ValueError("abscissae must be positive and strictly increasing")
            ns.append(np.full(x.size, idx, np.int64))
            zs.append(x / omegas[idx])
            vs.append(val)
        if not ns:
            return cls.empty(grid)
        return cls(grid, np.concatenate(ns), np.concatenate(zs), np.concatenate(vs))

    @property
    def node_count(self) -> int:
        return int(self.n.size)

    @property
    def abscissae(self) -> np.ndarray:
        return self.z * self.grid.omegas[self.n]

    def indices(self) -> np.ndarray:
        return np.unique(self.n)

    def cross_section(self, idx: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = np.searchsorted(self.n, [idx, idx + 1])
        return self.abscissae[lo:hi], self.v[lo:hi]

    def slopes(self) -> np.ndarray:
        return self.z


def _check_same_grid(F: SplineSequence, G: SplineSequence):
    if F.grid != G.grid:
        raise ValueError(f"grid mismatch: {F.grid} vs {G.grid}")


def _sort_order(n: np.ndarray, z: np.ndarray):
    """Stable order by (n, quantized z); also returns the quantized slopes."""
    q = _quantized(z)
    qbits = 63 - int(n.max()).bit_length()
    if int(q.max()) < (1 << qbits):
        order = np.argsort((n << qbits) | q, kind="stable")
    else:
        order = np.lexsort((q, n))
    return order, q


def _segments(n: np.ndarray):
    """Boolean masks: node has a successor / predecessor in its cross-section."""
    same_next = np.zeros(n.size, bool)
    same_next[:-1] = n[1:] == n[:-1]
    same_prev = np.zeros(n.size, bool)
    same_prev[1:] = same_next[:-1]
    return same_next, same_prev


def _to_breaks(F: SplineSequence):
    """Jumps and slope changes (in ``z``) at every node."""
    n, z, v = F.n, F.z, F.v
    same_next, same_prev = _segments(n)
    slope = np.zeros(n.size, complex)
    i = np.nonzero(same_next)[0]
    slope[i] = (v[i + 1] - v[i]) / (z[i + 1] - z[i])
    left = np.zeros(n.size, complex)
    left[1:] = slope[:-1]
    left[~same_prev] = 0
    jump = np.where(same_prev, 0, v) - np.where(same_next, 0, v)
    return n, z, jump, slope - left


def _segmented_cumsum(x: np.ndarray, first: np.ndarray) -> np.ndarray:
    c = np.cumsum(x)
    starts = np.nonzero(first)[0]
    before = np.zeros(starts.size, c.dtype)
    before[starts > 0] = c[starts[starts > 0] - 1]
    seg = np.cumsum(first) - 1
    return c - before[seg]


def _merge_plan(n: np.ndarray, z: np.ndarray):
    """Sort order, group starts and the merged ``(n, z)`` of a node multiset."""
    order, q = _sort_order(n, z)
    n, q = n[order], q[order]
    new = np.ones(n.size, bool)
    new[1:] = (n[1:] != n[:-1]) | (q[1:] != q[:-1])
    starts = np.nonzero(new)[0]
    return order, starts, n[starts], z[order[starts]]


def _reconstruct(grid, n, z, jump, delta, dropped=0) -> SplineSequence:
    """Node values from merged jumps / slope changes (zero-contribution nodes pruned)."""
    keep = (jump != 0) | (delta != 0)
    n, z, jump, delta = n[keep], z[keep], jump[keep], delta[keep]
    if n.size == 0:
        return SplineSequence(grid, n, z, np.zeros(0, complex), dropped)
    first = np.ones(n.size, bool)
    first[1:] = n[1:] != n[:-1]
    last = np.ones(n.size, bool)
    last[:-1] = first[1:]
    running_slope = _segmented_cumsum(delta, first)
    prev_slope = np.zeros(n.size, complex)
    prev_slope[1:] = running_slope[:-1]
    prev_slope[first] = 0
    dz = np.zeros(n.size)
    dz[1:] = z[1:] - z[:-1]
    dz[first] = 0
    right = _segmented_cumsum(prev_slope * dz + jump, first)
    # right limits everywhere except at the closing node of a cross-section
    values = np.where(last & ~first, right - jump, right)
    return SplineSequence(grid, n, z, values, dropped)


def _from_breaks(grid, n, z, jump, delta, dropped=0) -> SplineSequence:
    if n.size == 0:
        return SplineSequence(grid, np.zeros(0, np.int64), np.zeros(0), np.zeros(0, complex), dropped)
    order, starts, n_u, z_u = _merge_plan(n, z)
    jump = np.add.reduceat(jump[order], starts)
    delta = np.add.reduceat(delta[order], starts)
    return _reconstruct(grid, n_u, z_u, jump, delta, dropped)


def tensor_init(f: SplineWindow, s: FrequencySignal) -> SplineSequence:
    """Spline sequence of ``f (x) s``: cross-section ``n`` is ``s_n * fhat``."""
    grid = s.grid
    nz = np.nonzero(s.samples)[0]
    if nz.size == 0:
        return SplineSequence.empty(grid)
    K = f.K
    n = np.repeat(nz.astype(np.int64), K)
    z = (f.abscissae[None, :] / grid.omegas[nz][:, None]).ravel()
    v = (s.samples[nz][:, None] * f.values[None, :]).ravel()
    return SplineSequence(grid, n, z, v)


def seq_norm(F: SplineSequence) -> float:
    """``sqrt(r * sum_n int |h_n(omega')|^2 / omega' domega')``, exact per segment."""
    if F.node_count == 0:
        return 0.0
    # omega'/omega_n = z, so the 1/omega' measure is dz/z on each cross-section
    total = weighted_l2_sum(F.n, np.ascontiguousarray(F.z), np.ascontiguousarray(F.v))
    return math.sqrt(F.grid.r * max(float(total), 0.0))


def seq_add(F: SplineSequence, G: SplineSequence) -> SplineSequence:
    _check_same_grid(F, G)
    parts = [_to_breaks(F), _to_breaks(G)]
    cols = (np.concatenate(col) for col in zip(*parts))
    return _from_breaks(F.grid, *cols, dropped=F.dropped + G.dropped)


def seq_scale(F: SplineSequence, lam: complex) -> SplineSequence:
    if lam == 0:
        return SplineSequence.empty(F.grid)
    return SplineSequence(F.grid, F.n, F.z, F.v * lam, F.dropped)


def time_shift(F: SplineSequence, steps: int) -> SplineSequence:
    """Transport every cross-section ``steps`` grid points along its slope rays.

    Cross-sections leaving ``[0, N]`` are dropped; the number of dropped
    nodes is recorded in ``dropped``.
    """
    if steps == 0:
        return F
    n = F.n + int(steps)
    ok = (n >= 0) & (n <= F.grid.N)
    return SplineSequence(F.grid, n[ok], F.z[ok], F.v[ok], int(np.count_nonzero(~ok)))


def _quantized(z: np.ndarray) -> np.ndarray:
    bits = np.ascontiguousarray(z, dtype=np.float64).view(np.int64)
    return (bits - bits.min()) >> _QSHIFT


def _time_pass_rows(F: SplineSequence, shifts: np.ndarray, rows: np.ndarray) -> list:
    """``sum_l rows[b, l] time_shift(F, shifts[l])`` for every row ``b``."""
    grid, N = F.grid, F.grid.N
    rows = np.ascontiguousarray(rows, dtype=complex)
    shifts = np.ascontiguousarray(shifts, dtype=np.int64)
    if F.node_count == 0:
        return [F] * rows.shape[0]
    n, z, jump, delta = _to_breaks(F)
    offsets = np.searchsorted(n, np.arange(N + 2)).astype(np.int64)
    q = _quantized(z)
    active = np.any(rows != 0, axis=0)
    counts = count_shifted(offsets, q, shifts, active, N)
    out_offsets = np.zeros(N + 2, np.int64)
    np.cumsum(counts, out=out_offsets[1:])
    total = int(out_offsets[-1])
    out_z = np.empty(total)
    out_v = np.empty((rows.shape[0], total), complex)
    keep = np.zeros((rows.shape[0], total), bool)
    fill_shifted(offsets, q, z, jump, delta, shifts, rows, N, out_offsets, out_z, out_v, keep)
    out_n = np.repeat(np.arange(N + 1, dtype=np.int64), counts)

    per_section = np.diff(offsets)
    dropped = 0
    for m in shifts[active]:
        lo, hi = max(0, -m), min(N, N - m)
        dropped += F.node_count - (int(per_section[lo : hi + 1].sum()) if lo <= hi else 0)
    return [
        SplineSequence(grid, out_n[k], out_z[k], out_v[b][k], dropped)
        for b, k in enumerate(keep)
    ]


def time_pass(F: SplineSequence, filt: TrigFilter) -> SplineSequence:
    """``sum_l c_l time_shift(F, 2^level l)`` for the filter's effective coefficients.

    The shifted copies are merged per output cross-section, summing equal
    slopes in ascending ``l``, so results are reproducible bit for bit.
    """
    return _time_pass_rows(F, filt.shifts(), filt.effective_coeffs()[None, :])[0]


def time_pass_pair(F: SplineSequence, filt: TrigFilter) -> tuple[SplineSequence, SplineSequence]:
    """``(R^0 F, R^1 F)`` at the filter's level, from one merge."""
    rows = np.stack([filt.with_bit(0).effective_coeffs(), filt.with_bit(1).effective_coeffs()])
    lo, hi = _time_pass_rows(F, filt.shifts(), rows)
    return lo, hi


def time_pass_reference(F: SplineSequence, filt: TrigFilter) -> SplineSequence:
    """Left fold of ``seq_add`` over ``c_l time_shift(F, 2^level l)``, ascending ``l``."""
    out = SplineSequence.empty(F.grid)
    for c, m in zip(filt.effective_coeffs(), filt.shifts()):
        if c != 0:
            out = seq_add(out, seq_scale(time_shift(F, int(m)), c))
    return out


def scale_pass(F: SplineSequence, band: SlopeBand) -> SplineSequence:
    """Restrict cross-section ``n`` to ``omega'`` in ``[a omega_n, b omega_n]``.

    New nodes are inserted at the band edges by linear interpolation.
    Cross-sections reduced to a single point carry no mass and are removed.
    """
    if F.node_count == 0:
        return F
    a, b = band.a, band.b
    n, z, v = F.n, F.z, F.v
    same_next, _ = _segments(n)
    i = np.nonzero(same_next)[0]
    z0, z1 = z[i], z[i + 1]
    cut_a = i[(z0 < a) & (z1 > a)]
    cut_b = i[(z0 < b) & (z1 > b)]

    def interp(idx, t):
        w = (t - z[idx]) / (z[idx + 1] - z[idx])
        return v[idx] + w * (v[idx + 1] - v[idx])

    keep = np.nonzero((z >= a) & (z <= b))[0]
    pos = np.concatenate([keep.astype(float), cut_a + 0.25, cut_b + 0.5])
    order = np.argsort(pos, kind="stable")
    nn = np.concatenate([n[keep], n[cut_a], n[cut_b]])[order]
    zz = np.concatenate([z[keep], np.full(cut_a.size, a), np.full(cut_b.size, b)])[order]
    vv = np.concatenate([v[keep], interp(cut_a, a), interp(cut_b, b)])[order]

    # drop isolated points
    same_next, same_prev = _segments(nn)
    alive = same_next | same_prev
    return SplineSequence(F.grid, nn[alive], zz[alive], vv[alive])


def eval_cross_sections(F: SplineSequence, zq: float) -> tuple[np.ndarray, np.ndarray]:
    """Value of every cross-section at slope ``zq``; returns ``(indices, values)``."""
    n, z, v = F.n, F.z, F.v
    same_next, same_prev = _segments(n)
    i = np.nonzero(same_next & (z <= zq))[0]
    i = i[z[i + 1] > zq]
    w = (zq - z[i]) / (z[i + 1] - z[i])
    vals = v[i] + w * (v[i + 1] - v[i])
    # a query sitting exactly on a cross-section's last node
    j = np.nonzero(same_prev & ~same_next & (z == zq))[0]
    return np.concatenate([n[i], n[j]]), np.concatenate([vals, v[j]])


def eval_wavelet_coeff(F: SplineSequence, g: PhasePoint) -> complex:
    """Wavelet-Plancherel transform of ``F`` at ``g``.

    ``r * sum_n exp(2 pi i g1 omega_n) exp(g2/2) h_n(exp(g2) omega_n)``.
    """
    if F.node_count == 0:
        return 0j
    idx, vals = eval_cross_sections(F, math.exp(g.g2))
    omegas = F.grid.omegas[idx]
    phase = np.exp(2j * np.pi * g.g1 * omegas)
    return complex(F.grid.r * math.exp(g.g2 / 2) * np.sum(phase * vals))
