"""Bisection coefficient search in the window-signal space.

Each step quarters the current phase-space rectangle: the time axis is
halved by a level-``j`` trigonometric filter (bit 0 or 1) and the slope band
is split at its harmonic mean.  Filters act on the running filtered sequence,
so the product of all previous filters accumulates; the child with the
largest norm is kept.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from wp4.core import (
    Atom,
    FrequencySignal,
    NumericalError,
    PhasePoint,
    SplineWindow,
    inner_product,
    unit_atom,
)
from wp4.spline_seq import (
    SlopeBand,
    SplineSequence,
    TrigFilter,
    indicator_coeffs,
    scale_pass,
    seq_norm,
    slope_bisect,
    tensor_init,
    time_pass_pair,
)

DEAD_BRANCH_RTOL = 1e-14
# hard cap on zero padding requested by initial_band
MAX_PAD_SAMPLES = 1 << 24


@dataclass(frozen=True)
class SearchConfig:
    fourier_order: int = 9
    max_depth: int | None = None  # None: floor(log2 N)
    refine_radius: int = 1
    coeffs: tuple | None = None  # None: indicator_coeffs(fourier_order)

    def __post_init__(self):
        if self.fourier_order < 1:
            raise ValueError("fourier_order must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.refine_radius < 0:
            raise ValueError("refine_radius must be >= 0")
        if self.coeffs is not None and len(self.coeffs) != 2 * self.fourier_order + 1:
            raise ValueError("need 2L+1 filter coefficients")

    def filter_coeffs(self) -> np.ndarray:
        if self.coeffs is None:
            return indicator_coeffs(self.fourier_order)
        return np.asarray(self.coeffs, complex)

    def depth_for(self, N: int) -> int:
        return self.max_depth if self.max_depth is not None else max(1, int(math.floor(math.log2(N))))


@dataclass(frozen=True)
class SearchStep:
    depth: int
    time_bit: int
    upper_band: bool
    child_norms: list
    band: tuple
    bits: list
    node_count: int
    peak_nodes: int
    dropped: int


@dataclass
class SearchTrace:
    steps: list = field(default_factory=list)
    initial_nodes: int = 0
    initial_norm: float = 0.0
    time_step: float = 0.0
    final_band: tuple | None = None

    @property
    def bits(self) -> list:
        return self.steps[-1].bits if self.steps else []

    @property
    def peak_nodes(self) -> int:
        return max([self.initial_nodes] + [s.node_count for s in self.steps])

    @property
    def peak_intermediate_nodes(self) -> int:
        return max([self.initial_nodes] + [s.peak_nodes for s in self.steps])

    def to_jsonl(self) -> str:
        return "".join(json.dumps(asdict(s)) + "\n" for s in self.steps)


def pad_for_band(s: FrequencySignal, f: SplineWindow) -> FrequencySignal:
    """Zero-pad ``s`` above ``omega_N`` until ``omega'_K / omega_N < omega'_1 / omega_0``."""
    lo, hi = f.abscissae[0], f.abscissae[-1]
    need = s.omega0 * hi / lo  # omega_N must exceed this
    n_min = int(math.floor((need - s.omega0) / s.r)) + 1
    extra = n_min - s.N
    if extra <= 0:
        return s
    if extra > MAX_PAD_SAMPLES:
        raise NumericalError(f"window too wide for this grid: {extra} padding samples needed")
    return s.padded(extra)


def initial_band(f: SplineWindow, s: FrequencySignal) -> SlopeBand:
    """``[omega'_K / omega_N, omega'_1 / omega_0]``: slopes at which every node line is present.

    ``s`` must already satisfy the precondition (see :func:`pad_for_band`).
    """
    a = f.abscissae[-1] / s.grid.omega_max
    b = f.abscissae[0] / s.omega0
    if not a < b:
        raise ValueError("band is empty; zero-pad the signal first (pad_for_band)")
    return SlopeBand(a, b)


def _scale_saturated(band: SlopeBand, r: float, omega_prime_max: float) -> bool:
    # node slopes of one node line are spaced r / omega' apart in 1/z
    return (1.0 / band.a - 1.0 / band.b) <= r / omega_prime_max


def search_coefficient(
    F0: SplineSequence,
    cfg: SearchConfig = SearchConfig(),
    band: SlopeBand | None = None,
) -> tuple[PhasePoint, SearchTrace]:
    """Greedy bisection for the largest wavelet coefficient of ``F0``.

    Returns the centre of the final phase-space rectangle and the trace.
    """
    if F0.node_count == 0:
        raise NumericalError("search on a zero sequence")
    norm0 = seq_norm(F0)
    if norm0 == 0:
        raise NumericalError("search on a zero sequence")
    grid = F0.grid
    if band is None:
        band = SlopeBand(float(F0.z.min()), float(F0.z.max()))
    omega_prime_max = float(F0.abscissae.max())
    depth = cfg.depth_for(grid.N)
    coeffs = cfg.filter_coeffs()
    L = cfg.fourier_order

    F = scale_pass(F0, band)
    trace = SearchTrace(initial_nodes=F.node_count, initial_norm=norm0)
    bits: list[int] = []
    for j in range(depth):
        if _scale_saturated(band, grid.r, omega_prime_max):
            halves = (band,)
        else:
            halves = band.split()
        banded = [scale_pass(F, h) for h in halves]
        filt = TrigFilter(L, coeffs, level=j)
        pairs = [time_pass_pair(G, filt) for G in banded]
        # order: (bit 0, lower), (bit 0, upper), (bit 1, lower), (bit 1, upper)
        children = [(bit, h, pair[bit]) for bit in (0, 1) for h, pair in zip(halves, pairs)]
        norms = [seq_norm(c[2]) for c in children]
        k = int(np.argmax(norms))
        if norms[k] < DEAD_BRANCH_RTOL * norm0:
            raise NumericalError(f"all children vanished at depth {j + 1}")
        bit, band, F = children[k]
        bits.append(bit)
        trace.steps.append(
            SearchStep(
                depth=j + 1,
                time_bit=bit,
                upper_band=len(halves) == 2 and k % 2 == 1,
                child_norms=[float(x) for x in norms],
                band=(band.a, band.b),
                bits=list(bits),
                node_count=F.node_count,
                peak_nodes=max(c[2].node_count for c in children),
                dropped=F.dropped,
            )
        )

    T = grid.period
    # bit 0 keeps the half-period where the level-j phase lies in [pi, 2 pi): binary digit 1
    frac = sum((1 - b) * 2.0 ** -(j + 1) for j, b in enumerate(bits)) + 2.0 ** -(depth + 1)
    trace.time_step = T * 2.0**-depth
    trace.final_band = (band.a, band.b)
    return PhasePoint(T * frac, math.log(slope_bisect(band))), trace


def refine(
    s: FrequencySignal,
    f: SplineWindow,
    g: PhasePoint,
    radius: int = 1,
    dt: float | None = None,
    dg2: float | None = None,
) -> Atom:
    """Exact coefficients against unit atoms on a ``(2 radius + 1)^2`` grid around ``g``.

    Returns the point of largest modulus (first one in (time, scale) order).
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    dt = s.grid.period / (s.N + 1) if dt is None else dt
    dg2 = 1.0 / (s.N + 1) if dg2 is None else dg2
    best: Atom | None = None
    for i in range(-radius, radius + 1):
        for k in range(-radius, radius + 1):
            p = PhasePoint(g.g1 + i * dt, g.g2 + k * dg2)
            try:
                c = inner_product(s, unit_atom(f, p, s))
            except NumericalError:
                continue
            if best is None or abs(c) > abs(best.coeff):
                best = Atom(p, c)
    if best is None:
        raise NumericalError(f"no atom near {g} meets the signal grid")
    return best


def find_atom(
    s: FrequencySignal,
    f: SplineWindow,
    cfg: SearchConfig = SearchConfig(),
) -> tuple[Atom, SearchTrace]:
    """Search + refine for one signal (``s`` must satisfy the band precondition)."""
    F0 = tensor_init(f, s)
    g, trace = search_coefficient(F0, cfg, initial_band(f, s))
    lo, hi = trace.final_band
    atom = refine(s, f, g, cfg.refine_radius, trace.time_step, math.log(hi / lo))
    return atom, trace
