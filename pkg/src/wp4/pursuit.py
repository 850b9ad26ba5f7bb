"""Greedy sparse decompositions (MP, OMP) and the sparse wavelet phase vocoder."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from wp4.core import (
    Atom,
    FrequencyGrid,
    FrequencySignal,
    NumericalError,
    PhasePoint,
    SplineWindow,
    inner_product,
    synthesize,
    unit_atom,
)
from wp4.search import SearchConfig, find_atom, pad_for_band

DEAD_RESIDUAL_RTOL = 1e-12
GRAM_RIDGE = 1e-10


@dataclass(eq=False)
class Decomposition:
    """Atoms found by a pursuit, with the residual norm before and after each step.

    ``grid`` is the grid the pursuit ran on (the input grid, possibly
    zero-padded); ``signal_N`` is the input's own ``N``.  Coefficients refer to
    unit-norm atoms on ``grid``.
    """

    atoms: list
    residual_norms: list
    window: SplineWindow
    grid: FrequencyGrid
    signal_N: int
    method: str = "mp"
    low_band: np.ndarray | None = None
    meta: dict = field(default_factory=dict)
    residual: FrequencySignal | None = None

    def reconstruct(self) -> FrequencySignal:
        full = synthesize(self.atoms, self.window, self.grid)
        return FrequencySignal(
            self.grid.omega0, self.grid.r, full.samples[: self.signal_N + 1], self.low_band
        )

    def header(self) -> dict:
        low = self.low_band
        return {
            "type": "header",
            "method": self.method,
            "window": self.window.nodes(),
            "grid": {"omega0": self.grid.omega0, "r": self.grid.r, "N": self.grid.N},
            "signal_N": self.signal_N,
            "low_band": None if low is None else [[float(c.real), float(c.imag)] for c in low],
            "residual_norms": [float(x) for x in self.residual_norms],
            **self.meta,
        }

    def to_jsonl(self) -> str:
        lines = [json.dumps(self.header())]
        for a in self.atoms:
            c = complex(a.coeff)
            lines.append(
                json.dumps(
                    {
                        "g1_seconds": a.point.g1,
                        "g2_logscale": a.point.g2,
                        "coeff_re": c.real,
                        "coeff_im": c.imag,
                    }
                )
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "Decomposition":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty decomposition file")
        head = json.loads(lines[0])
        if head.get("type") != "header":
            raise ValueError("first line must be the header object")
        g = head["grid"]
        low = head.get("low_band")
        atoms = []
        for ln in lines[1:]:
            rec = json.loads(ln)
            atoms.append(
                Atom(
                    PhasePoint(float(rec["g1_seconds"]), float(rec["g2_logscale"])),
                    complex(rec["coeff_re"], rec["coeff_im"]),
                )
            )
        known = {"type", "method", "window", "grid", "signal_N", "low_band", "residual_norms"}
        return cls(
            atoms=atoms,
            residual_norms=list(head.get("residual_norms", [])),
            window=SplineWindow.from_nodes(head["window"]),
            grid=FrequencyGrid(float(g["omega0"]), float(g["r"]), int(g["N"])),
            signal_N=int(head["signal_N"]),
            method=head.get("method", "mp"),
            low_band=None if low is None else np.array([complex(a, b) for a, b in low]),
            meta={k: v for k, v in head.items() if k not in known},
        )


def _pursuit(s: FrequencySignal, f: SplineWindow, n_atoms: int, cfg: SearchConfig, method: str):
    if n_atoms < 0:
        raise ValueError("n_atoms must be >= 0")
    f = f.normalized()
    work = pad_for_band(s, f)
    grid = work.grid
    target = work.samples
    residual = target.copy()
    norm0 = work.norm()
    norms = [norm0]
    atoms: list[Atom] = []
    units: list[np.ndarray] = []
    for _ in range(n_atoms):
        if norms[-1] <= DEAD_RESIDUAL_RTOL * norm0 or norms[-1] == 0:
            break
        R = work.with_samples(residual)
        found, _trace = find_atom(R, f, cfg)
        u = unit_atom(f, found.point, grid)
        if method == "mp":
            residual = residual - found.coeff * u
            atoms.append(found)
        else:
            units.append(u)
            coeffs = _project(work, units)
            residual = target - np.stack(units, axis=1) @ coeffs
            atoms = [Atom(a.point, c) for a, c in zip(atoms + [found], coeffs)]
        norms.append(work.with_samples(residual).norm())
    return Decomposition(
        atoms=atoms,
        residual_norms=norms,
        window=f,
        grid=grid,
        signal_N=s.N,
        method=method,
        low_band=s.low_band,
        residual=work.with_samples(residual),
    )


def _project(s: FrequencySignal, units: list) -> np.ndarray:
    """Least-squares coefficients of ``s`` on the span of ``units`` (normal equations)."""
    U = np.stack(units, axis=1)
    gram = s.r * (U.conj().T @ U) + GRAM_RIDGE * np.eye(U.shape[1])
    rhs = s.r * (U.conj().T @ s.samples)
    return np.linalg.solve(gram, rhs)


def mp(s: FrequencySignal, f: SplineWindow, n_atoms: int, cfg: SearchConfig = SearchConfig()) -> Decomposition:
    """Matching pursuit: subtract ``<r, u> u`` for the searched unit atom ``u`` each step."""
    return _pursuit(s, f, n_atoms, cfg, "mp")


def omp(s: FrequencySignal, f: SplineWindow, n_atoms: int, cfg: SearchConfig = SearchConfig()) -> Decomposition:
    """Orthogonal matching pursuit: re-project ``s`` on all atoms found so far."""
    return _pursuit(s, f, n_atoms, cfg, "omp")


# -- vocoder ----------------------------------------------------------------------


def _contract(f: SplineWindow, factor: float) -> SplineWindow:
    c = f.peak
    return SplineWindow(c + (f.abscissae - c) * factor, f.values).normalized()


def make_window_family(f1: SplineWindow, T: int) -> tuple[SplineWindow, SplineWindow]:
    """Windows with supports ``1/2`` and ``1/(2T)`` of ``f1``'s, same peak, unit norm."""
    if T < 1:
        raise ValueError("stretch must be >= 1")
    return _contract(f1, 0.5), _contract(f1, 0.5 / T)


@dataclass(frozen=True, eq=False)
class VocoderConfig:
    stretch: int
    n_atoms: int
    window: SplineWindow = field(default_factory=SplineWindow.triangle)

    def __post_init__(self):
        if int(self.stretch) != self.stretch or self.stretch < 1:
            raise ValueError("stretch must be an integer >= 1")
        if self.n_atoms < 0:
            raise ValueError("n_atoms must be >= 0")

    def family(self) -> tuple[SplineWindow, SplineWindow, SplineWindow]:
        f1 = self.window.normalized()
        return (f1, *make_window_family(f1, self.stretch))


def stretch_low_band(low: np.ndarray | None, T: int) -> np.ndarray | None:
    """Naive resampling of the set-aside band: ``T * low`` on a ``T`` times finer grid."""
    if low is None:
        return None
    out = np.zeros(low.size * T, complex)
    out[: low.size] = T * low
    return out


def vocoder_stretch(
    s: FrequencySignal,
    cfg: VocoderConfig,
    search_cfg: SearchConfig = SearchConfig(),
    decomposition: Decomposition | None = None,
) -> FrequencySignal:
    """Stretch ``s`` in time by the integer ``cfg.stretch`` keeping its frequencies.

    Atom positions come from MP with ``f1``; amplitudes and phases are
    re-measured with ``f2`` and resynthesized with ``f3`` at ``T * g1``, phase
    advanced to ``T * theta``.  The output grid has spacing ``r / T``.
    """
    T = int(cfg.stretch)
    f1, f2, f3 = cfg.family()
    out_grid = FrequencyGrid(s.omega0, s.r / T, s.N * T)
    out = np.zeros(out_grid.N + 1, complex)
    if cfg.n_atoms > 0 and s.norm() > 0:
        dec = decomposition if decomposition is not None else mp(s, f1, cfg.n_atoms, search_cfg)
        work = s.padded(dec.grid.N - s.N)
        for atom in dec.atoms:
            try:
                c = inner_product(work, unit_atom(f2, atom.point, work))
                u = unit_atom(f3, PhasePoint(T * atom.point.g1, atom.point.g2), out_grid)
            except NumericalError:
                continue
            theta = math.atan2(c.imag, c.real)
            out += np.exp(1j * T * theta) * abs(c) * u
    return FrequencySignal(out_grid.omega0, out_grid.r, out, stretch_low_band(s.low_band, T))
