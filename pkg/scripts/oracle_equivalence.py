"""Filtered spline-sequence energy against the identically filtered dense transform."""

from dataclasses import dataclass

import numpy as np

from _config import parse
from wp4.core import FrequencySignal, SplineWindow
from wp4.search import initial_band, pad_for_band
from wp4.spline_seq import TrigFilter, indicator_coeffs, scale_pass, seq_norm, tensor_init, time_pass

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from oracles import filtered_dense_energy  # noqa: E402


@dataclass
class Config:
    """Random compositions of scale halvings and time filters; margin is the zero band at each end."""

    N: int = 1024
    compositions: int = 50
    max_depth: int = 6
    order: int = 9
    margin_fraction: float = 0.125
    seed: int = 2


def main(cfg: Config) -> None:
    f = SplineWindow.triangle().normalized()
    rng = np.random.default_rng(cfg.seed)
    lo = int(cfg.N * cfg.margin_fraction)
    hi = cfg.N + 1 - lo
    print("depth,relative_deviation,dropped")
    for _ in range(cfg.compositions):
        x = np.zeros(cfg.N + 1, complex)
        x[lo:hi] = rng.standard_normal(hi - lo) + 1j * rng.standard_normal(hi - lo)
        s = pad_for_band(FrequencySignal(4.0, 1.0, x), f)
        band = initial_band(f, s)
        F = scale_pass(tensor_init(f, s), band)
        filters = []
        depth = int(rng.integers(1, cfg.max_depth + 1))
        for j in range(depth):
            if rng.random() < 0.5:
                band = band.split()[int(rng.integers(2))]
                F = scale_pass(F, band)
            filt = TrigFilter(cfg.order, indicator_coeffs(cfg.order), level=j, bit=int(rng.integers(2)))
            F = time_pass(F, filt)
            filters.append(filt)
        ref = filtered_dense_energy(s, f, (band.a, band.b), filters)
        dev = seq_norm(F) ** 2 / ref - 1 if ref > 0 else float("nan")
        print(f"{depth},{dev:.5f},{F.dropped}")


if __name__ == "__main__":
    main(parse(Config))
