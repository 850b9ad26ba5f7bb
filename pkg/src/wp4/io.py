"""File formats: mono WAV, raw float64 with a JSON sidecar, window node files."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from wp4.core import SplineWindow


class InputError(OSError):
    """Unreadable, malformed or unsupported input file."""


def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def read_signal(path) -> tuple[np.ndarray, float]:
    """Return ``(samples, sample_rate)``.

    ``.wav``: PCM16 (scaled to [-1, 1)) or float32, mono only.  Anything else
    is read as little-endian float64 with the rate in ``<path>.json``
    (``{"sample_rate": ...}``).
    """
    path = Path(path)
    try:
        if path.suffix.lower() == ".wav":
            rate, data = wavfile.read(path)
            if data.ndim != 1:
                raise InputError(f"{path}: only mono audio is supported (got {data.shape[1]} channels)")
            if data.dtype == np.int16:
                x = data.astype(np.float64) / 32768.0
            elif data.dtype == np.float32:
                x = data.astype(np.float64)
            else:
                raise InputError(f"{path}: unsupported sample format {data.dtype}")
            rate = float(rate)
        else:
            x = np.fromfile(path, dtype="<f8")
            meta = json.loads(_sidecar(path).read_text())
            rate = float(meta["sample_rate"])
    except InputError:
        raise
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if x.size == 0:
        raise InputError(f"{path}: empty signal")
    if not np.all(np.isfinite(x)):
        raise InputError(f"{path}: non-finite samples")
    if not rate > 0:
        raise InputError(f"{path}: invalid sample rate {rate}")
    return x, rate


def write_signal(path, x: np.ndarray, sample_rate: float) -> list[Path]:
    """Write ``.wav`` as float32, anything else as raw float64 + sidecar; returns files written."""
    path = Path(path)
    x = np.asarray(x, dtype=np.float64)
    if path.suffix.lower() == ".wav":
        rate = int(round(sample_rate))
        if abs(rate - sample_rate) > 1e-9:
            raise ValueError("WAV needs an integer sample rate")
        wavfile.write(path, rate, x.astype(np.float32))
        return [path]
    x.astype("<f8").tofile(path)
    _sidecar(path).write_text(json.dumps({"sample_rate": sample_rate}) + "\n")
    return [path, _sidecar(path)]


def read_window(path) -> SplineWindow:
    """JSON list of ``[abscissa_hz, value]`` pairs."""
    path = Path(path)
    try:
        nodes = json.loads(path.read_text())
        if not isinstance(nodes, list) or not all(
            isinstance(p, list) and len(p) == 2 for p in nodes
        ):
            raise ValueError("expected a list of [abscissa_hz, value] pairs")
        return SplineWindow.from_nodes(nodes)
    except (OSError, ValueError, TypeError) as exc:
        raise InputError(f"bad window file {path}: {exc}") from exc


def write_window(path, f: SplineWindow) -> None:
    Path(path).write_text(json.dumps(f.nodes()) + "\n")
