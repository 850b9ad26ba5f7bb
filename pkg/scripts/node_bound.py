"""Peak node counts of the bisection search relative to N K L, per depth."""

from dataclasses import dataclass

import numpy as np

from _config import parse
from wp4.core import FrequencySignal, SplineWindow
from wp4.search import SearchConfig, initial_band, pad_for_band, search_coefficient
from wp4.spline_seq import tensor_init


@dataclass
class Config:
    """Node-count sweep over signal sizes."""

    exponents: list = (10, 11, 12, 13, 14)
    trials: int = 5
    order: int = 9
    omega0: float = 4.0
    seed: int = 0


def main(cfg: Config) -> None:
    f = SplineWindow.triangle().normalized()
    rng = np.random.default_rng(cfg.seed)
    print("N,trial,depth,retained_over_NKL,children_peak_over_NKL")
    for e in cfg.exponents:
        N = 2**e
        nkl = N * f.K * cfg.order
        for trial in range(cfg.trials):
            x = rng.standard_normal(N + 1) + 1j * rng.standard_normal(N + 1)
            s = pad_for_band(FrequencySignal(cfg.omega0, 1.0, x), f)
            F0 = tensor_init(f, s)
            _, trace = search_coefficient(F0, SearchConfig(fourier_order=cfg.order), initial_band(f, s))
            print(f"{N},{trial},0,{trace.initial_nodes / nkl:.4f},{trace.initial_nodes / nkl:.4f}")
            for step in trace.steps:
                print(f"{N},{trial},{step.depth},{step.node_count / nkl:.4f},{step.peak_nodes / nkl:.4f}")


if __name__ == "__main__":
    main(parse(Config))
