"""Planted-atom recovery: coefficient ratio against the dense maximum and localization error."""

import math
from dataclasses import dataclass

import numpy as np

from _config import parse
from wp4.core import FrequencySignal, PhasePoint, SplineWindow, dense_search, unit_atom
from wp4.search import SearchConfig, find_atom, initial_band, pad_for_band


@dataclass
class Config:
    """Random unit atoms plus white noise, searched by bisection and by the dense grid."""

    N: int = 1024
    trials: int = 100
    snr_db: float = 20.0
    refine_radius: int = 1
    seed: int = 0


def main(cfg: Config) -> None:
    f = SplineWindow.triangle().normalized()
    rng = np.random.default_rng(cfg.seed)
    base = pad_for_band(FrequencySignal(4.0, 1.0, np.zeros(cfg.N + 1)), f)
    band = initial_band(f, base)
    search = SearchConfig(refine_radius=cfg.refine_radius)
    rows = []
    for _ in range(cfg.trials):
        g = PhasePoint(
            rng.uniform(0, base.grid.period), rng.uniform(math.log(band.a), math.log(band.b))
        )
        atom = unit_atom(f, g, base)
        x = atom
        if math.isfinite(cfg.snr_db):
            noise = rng.standard_normal(atom.size) + 1j * rng.standard_normal(atom.size)
            x = atom + noise * np.linalg.norm(atom) / np.linalg.norm(noise) * 10 ** (-cfg.snr_db / 20)
        s = base.with_samples(x)
        found, _ = find_atom(s, f, search)
        gd, vd = dense_search(s, f, normalize=True)
        cells = base.N + 1
        dt = abs(((found.point.g1 - gd.g1) / base.grid.period + 0.5) % 1 - 0.5) * cells
        dk = abs(f.peak / math.exp(found.point.g2) - f.peak / math.exp(gd.g2)) / base.r
        width = (f.abscissae[-1] - f.abscissae[0]) / math.exp(g.g2) / base.r
        rows.append((abs(found.coeff) / vd, dt, dk, dt * width / cells))
    r = np.array(rows)
    print(f"ratio >= 0.9: {int(np.sum(r[:, 0] >= 0.9))}/{cfg.trials}, min ratio {r[:, 0].min():.3f}")
    print(f"within 2 time and 2 frequency cells of the dense argmax: {int(np.sum((r[:, 1] <= 2) & (r[:, 2] <= 2)))}/{cfg.trials}")
    print(f"time error in cells: median {np.median(r[:, 1]):.2f}, 90% {np.percentile(r[:, 1], 90):.2f}")
    print(f"time error in atom durations: median {np.median(r[:, 3]):.3f}, max {r[:, 3].max():.3f}")


if __name__ == "__main__":
    main(parse(Config))
