"""Two-tone time stretch: writes input and output WAVs and prints per-tone envelope widths."""

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from _config import parse
from wp4.core import FrequencySignal, SplineWindow
from wp4.io import write_signal
from wp4.pursuit import VocoderConfig, mp, vocoder_stretch


@dataclass
class Config:
    """Gaussian tone bursts at (frequency Hz, centre s) pairs."""

    tones: list = ((300.0, 0.5), (900.0, 0.5))
    sigma: float = 0.04
    rate: int = 4096
    seconds: float = 1.0
    stretch: int = 2
    atoms: int = 20
    out_dir: str = "vocoder_out"


def envelope_sd(x, rate, lo, hi):
    spec = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(x.size, 1 / rate)
    spec[(freqs < lo) | (freqs > hi)] = 0
    full = np.zeros(x.size, complex)
    full[: spec.size] = 2 * spec
    e = np.abs(np.fft.ifft(full)) ** 2
    t = np.arange(x.size) / rate
    m = np.sum(t * e) / np.sum(e)
    return math.sqrt(np.sum((t - m) ** 2 * e) / np.sum(e)), freqs[np.argmax(np.abs(spec))]


def main(cfg: Config) -> None:
    window = SplineWindow.from_nodes([(0.8, 0), (1, 1), (1.2, 0)])
    t = np.arange(int(cfg.rate * cfg.seconds)) / cfg.rate
    x = sum(np.exp(-0.5 * ((t - c) / cfg.sigma) ** 2) * np.cos(2 * np.pi * k * t) for k, c in cfg.tones)
    s = FrequencySignal.from_time(x, cfg.rate)
    vc = VocoderConfig(cfg.stretch, cfg.atoms, window)
    dec = mp(s, vc.family()[0], cfg.atoms)
    y = vocoder_stretch(s, vc, decomposition=dec).to_time(cfg.rate)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    peak = max(np.abs(x).max(), np.abs(y).max())
    write_signal(out / "input.wav", x / peak, cfg.rate)
    write_signal(out / f"stretched_x{cfg.stretch}.wav", y / peak, cfg.rate)
    print(f"residual after {cfg.atoms} atoms: {dec.residual_norms[-1] / dec.residual_norms[0]:.3f}")
    for k, _ in cfg.tones:
        sd_in, _ = envelope_sd(x, cfg.rate, k - 150, k + 150)
        sd_out, f_out = envelope_sd(y, cfg.rate, k - 150, k + 150)
        print(f"{k:.0f} Hz: output peak {f_out:.1f} Hz, envelope sd {sd_in:.4f} s -> {sd_out:.4f} s (x{sd_out / sd_in:.3f})")


if __name__ == "__main__":
    main(parse(Config))
