"""Per-search timing of the bisection search against the dense N x N grid search."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass

import numpy as np

from wp4.core import FrequencyGrid, FrequencySignal, PhasePoint, SplineWindow, dense_search, unit_atom
from wp4.search import SearchConfig, find_atom, pad_for_band

CSV_HEADER = ["N", "method", "median_ms", "nodes_peak"]
DEFAULT_SIZES = tuple(2**e for e in range(12, 18))
DEFAULT_DENSE_SIZES = tuple(2**e for e in range(9, 13))


@dataclass(frozen=True)
class BenchRow:
    N: int
    method: str
    median_ms: float
    nodes_peak: int


def multitone_signal(N: int, f: SplineWindow, n_tones: int = 5, seed: int = 0, snr_db: float = 20.0) -> FrequencySignal:
    """Sum of unit atoms at random times and frequencies plus white noise, on ``(4, 1, N)``."""
    rng = np.random.default_rng(seed)
    grid = FrequencyGrid(4.0, 1.0, N)
    x = np.zeros(N + 1, complex)
    lo, hi = 4.0 * f.abscissae[-1] / f.peak, N * f.abscissae[0] / f.peak
    for _ in range(n_tones):
        kappa = math.exp(rng.uniform(math.log(lo), math.log(hi)))
        g = PhasePoint(rng.uniform(0.0, 1.0), math.log(f.peak / kappa))
        x += rng.uniform(0.5, 1.5) * np.exp(2j * np.pi * rng.uniform()) * unit_atom(f, g, grid)
    noise = rng.standard_normal(N + 1) + 1j * rng.standard_normal(N + 1)
    noise *= np.linalg.norm(x) / np.linalg.norm(noise) * 10 ** (-snr_db / 20)
    return FrequencySignal(grid.omega0, grid.r, x + noise)


def time_wp4(s: FrequencySignal, f: SplineWindow, cfg: SearchConfig) -> tuple[float, int]:
    t0 = time.perf_counter()
    _, trace = find_atom(s, f, cfg)
    return time.perf_counter() - t0, trace.peak_intermediate_nodes


def time_dense(s: FrequencySignal, f: SplineWindow) -> tuple[float, int]:
    t0 = time.perf_counter()
    dense_search(s, f, normalize=True)
    # phase-space samples evaluated (streamed, never held at once)
    return time.perf_counter() - t0, (s.N + 1) ** 2


def run_bench(
    sizes=DEFAULT_SIZES,
    dense_sizes=DEFAULT_DENSE_SIZES,
    repeats: int = 3,
    f: SplineWindow | None = None,
    cfg: SearchConfig = SearchConfig(),
    seed: int = 0,
    log=None,
) -> list[BenchRow]:
    f = (f or SplineWindow.triangle()).normalized()
    rows = []
    plan = [("wp4", N) for N in sizes] + [("dense", N) for N in dense_sizes]
    for method, N in plan:
        times, peaks = [], []
        for k in range(repeats):
            s = pad_for_band(multitone_signal(N, f, seed=seed + k), f)
            dt, peak = (time_wp4(s, f, cfg) if method == "wp4" else time_dense(s, f))
            times.append(dt)
            peaks.append(peak)
        row = BenchRow(N, method, 1e3 * float(np.median(times)), int(max(peaks)))
        if log:
            log(row)
        rows.append(row)
    return rows


def write_csv(path, rows: list[BenchRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([r.N, r.method, f"{r.median_ms:.3f}", r.nodes_peak])


def read_csv(path) -> list[BenchRow]:
    with open(path, newline="") as fh:
        return [
            BenchRow(int(d["N"]), d["method"], float(d["median_ms"]), int(d["nodes_peak"]))
            for d in csv.DictReader(fh)
        ]


def loglog_slope(rows: list[BenchRow], method: str) -> float:
    """Least-squares slope of log(median time) against log(N)."""
    pts = [(r.N, r.median_ms) for r in rows if r.method == method]
    if len(pts) < 2:
        raise ValueError(f"need at least two sizes for {method}")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0])
