"""Sparse continuous-wavelet approximation by bisection search in a window-signal space."""

from wp4.core import (
    Atom,
    DenseCWT,
    FrequencyGrid,
    FrequencySignal,
    NumericalError,
    PhasePoint,
    SplineWindow,
    atom_sample,
    dense_argmax,
    dense_cwt,
    dense_search,
    duflo_norm,
    inner_product,
    synthesize,
    unit_atom,
    window_norm_signal,
)

__version__ = "0.1.0"

__all__ = [
    "Atom",
    "DenseCWT",
    "FrequencyGrid",
    "FrequencySignal",
    "NumericalError",
    "PhasePoint",
    "SplineWindow",
    "atom_sample",
    "dense_argmax",
    "dense_cwt",
    "dense_search",
    "duflo_norm",
    "inner_product",
    "synthesize",
    "unit_atom",
    "window_norm_signal",
]
