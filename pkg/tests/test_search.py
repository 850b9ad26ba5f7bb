import json
import math

import numpy as np
import pytest

from wp4.bench import multitone_signal

from wp4.core import FrequencySignal, NumericalError, PhasePoint, SplineWindow, dense_search, inner_product, unit_atom
from wp4.spline_seq import TrigFilter, indicator_coeffs, scale_pass, seq_norm, tensor_init, time_pass_pair
from wp4.search import (
    SearchConfig,
    find_atom,
    initial_band,
    pad_for_band,
    refine,
    search_coefficient,
)

TRI = SplineWindow.triangle().normalized()


def _planted(N, g1_frac, kappa_frac, amp=1.0, f=TRI):
    s = pad_for_band(FrequencySignal(4.0, 1.0, np.zeros(N + 1)), f)
    band = initial_band(f, s)
    z = math.exp(math.log(band.a) + kappa_frac * (math.log(band.b) - math.log(band.a)))
    g = PhasePoint(g1_frac * s.grid.period, math.log(z))
    return s.with_samples(amp * unit_atom(f, g, s)), g


def test_initial_band_example():
    f = SplineWindow.from_nodes([(1, 0), (1.5, 1), (2, 0)])
    s = FrequencySignal(10.0, 1.0, np.ones(91))
    band = initial_band(f, s)
    assert band.a == pytest.approx(0.02) and band.b == pytest.approx(0.1)


def test_initial_band_needs_padding():
    f = SplineWindow.from_nodes([(1, 0), (1.5, 1), (2, 0)])
    s = FrequencySignal(10.0, 1.0, np.ones(6))  # omega_N = 15 < 20
    with pytest.raises(ValueError):
        initial_band(f, s)
    p = pad_for_band(s, f)
    assert p.grid.omega_max > 20 and p.N > s.N
    np.testing.assert_array_equal(p.samples[:6], s.samples)
    band = initial_band(f, p)
    assert band.a < band.b
    assert pad_for_band(p, f) is p


def test_every_node_line_spans_the_initial_band(rng):
    s = pad_for_band(FrequencySignal(4.0, 1.0, rng.standard_normal(129) + 0j), TRI)
    band = initial_band(TRI, s)
    F = scale_pass(tensor_init(TRI, s), band)
    for w in TRI.abscissae:
        z = F.z[np.isclose(F.abscissae, w)]
        # within one grid step of both band edges
        assert z.min() <= band.a * s.grid.omega_max / (s.grid.omega_max - s.r) * (1 + 1e-12)
        assert z.max() >= band.b * s.omega0 / (s.omega0 + s.r) * (1 - 1e-12)


def test_search_on_zero_signal_raises():
    s = pad_for_band(FrequencySignal(4.0, 1.0, np.zeros(257)), TRI)
    with pytest.raises(NumericalError):
        search_coefficient(tensor_init(TRI, s), SearchConfig(), initial_band(TRI, s))
    with pytest.raises(NumericalError):
        find_atom(s, TRI)


def test_scale_children_partition_the_band(rng):
    s = pad_for_band(FrequencySignal(4.0, 1.0, rng.standard_normal(257) + 1j * rng.standard_normal(257)), TRI)
    band = initial_band(TRI, s)
    F = scale_pass(tensor_init(TRI, s), band)
    lo, hi = band.split()
    assert lo.b == hi.a
    total = seq_norm(F) ** 2
    parts = seq_norm(scale_pass(F, lo)) ** 2 + seq_norm(scale_pass(F, hi)) ** 2
    assert parts == pytest.approx(total, rel=0.02)


def test_time_children_energy_split(rng):
    s = pad_for_band(FrequencySignal(4.0, 1.0, rng.standard_normal(257) + 1j * rng.standard_normal(257)), TRI)
    F = scale_pass(tensor_init(TRI, s), initial_band(TRI, s))
    for level in range(3):
        a, b = time_pass_pair(F, TrigFilter(9, indicator_coeffs(9), level=level))
        ratio = (seq_norm(a) ** 2 + seq_norm(b) ** 2) / seq_norm(F) ** 2
        assert 0.7 <= ratio <= 1.3


def test_planted_atom_recovered_within_its_resolution(rng):
    N = 512
    for _ in range(12):
        s, g = _planted(N, rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9))
        atom, _ = find_atom(s, TRI)
        g_dense, v_dense = dense_search(s, TRI, normalize=True)
        assert abs(atom.coeff) >= 0.85 * v_dense
        # time error measured in units of the atom's own duration (inverse bandwidth)
        width_bins = (TRI.abscissae[-1] - TRI.abscissae[0]) / math.exp(g.g2) / s.r
        dt = abs(((atom.point.g1 - g.g1) / s.grid.period + 0.5) % 1 - 0.5)
        assert dt * width_bins <= 0.6
        assert abs(TRI.peak / math.exp(atom.point.g2) - TRI.peak / math.exp(g.g2)) <= 0.1 * width_bins + 2


@pytest.mark.xfail(strict=False, reason="greedy bisection can miss narrow-band atoms by more than 2 dense cells; see notes")
def test_planted_atom_within_two_dense_cells():
    rng = np.random.default_rng(7)
    N = 512
    for _ in range(12):
        s, _ = _planted(N, rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9))
        atom, _ = find_atom(s, TRI)
        g_dense, _ = dense_search(s, TRI, normalize=True)
        dt = abs(((atom.point.g1 - g_dense.g1) / s.grid.period + 0.5) % 1 - 0.5) * (s.N + 1)
        dk = abs(TRI.peak / math.exp(atom.point.g2) - TRI.peak / math.exp(g_dense.g2)) / s.r
        assert dt <= 2 and dk <= 2


def test_two_atoms_finds_the_larger():
    N = 512
    big, g_big = _planted(N, 0.3, 0.3, 1.0)
    small, _ = _planted(N, 0.7, 0.7, 0.3)
    s = big.with_samples(big.samples + small.samples)
    atom, _ = find_atom(s, TRI)
    assert abs(atom.coeff) > 0.8
    assert abs(atom.point.g2 - g_big.g2) < 0.1


def test_search_is_deterministic(rng):
    s = pad_for_band(FrequencySignal(4.0, 1.0, rng.standard_normal(257) + 1j * rng.standard_normal(257)), TRI)
    a1, t1 = find_atom(s, TRI)
    a2, t2 = find_atom(s, TRI)
    assert a1 == a2
    assert t1.to_jsonl() == t2.to_jsonl()


def test_trace_jsonl_and_depth():
    s, _ = _planted(256, 0.4, 0.5)
    cfg = SearchConfig(max_depth=6)
    _, trace = find_atom(s, TRI, cfg)
    lines = [json.loads(x) for x in trace.to_jsonl().splitlines()]
    assert [d["depth"] for d in lines] == list(range(1, 7))
    assert all(len(d["child_norms"]) == 4 or len(d["child_norms"]) == 2 for d in lines)
    assert lines[-1]["bits"] == trace.bits and len(trace.bits) == 6
    assert trace.time_step == pytest.approx(s.grid.period / 64)
    assert trace.peak_intermediate_nodes >= trace.peak_nodes > 0


def test_refine_radius_zero_evaluates_the_point():
    s, g = _planted(256, 0.4, 0.5)
    p = PhasePoint(g.g1 + 0.01, g.g2 + 0.02)
    a = refine(s, TRI, p, radius=0)
    assert a.point == p
    assert a.coeff == pytest.approx(inner_product(s, unit_atom(TRI, p, s)))
    with pytest.raises(ValueError):
        refine(s, TRI, p, radius=-1)


def test_refine_is_idempotent_at_the_planted_point():
    s, g = _planted(256, 0.4, 0.5)
    a = refine(s, TRI, g, radius=1)
    assert a.point == g and abs(a.coeff) == pytest.approx(1.0, abs=1e-12)


def test_radius_one_reaches_most_of_the_dense_maximum():
    hits = 0
    for seed in range(10):
        s = pad_for_band(multitone_signal(512, TRI, seed=seed), TRI)
        atom, _ = find_atom(s, TRI)
        _, v = dense_search(s, TRI, normalize=True)
        hits += abs(atom.coeff) >= 0.8 * v
    assert hits >= 7


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(fourier_order=0)
    with pytest.raises(ValueError):
        SearchConfig(max_depth=0)
    with pytest.raises(ValueError):
        SearchConfig(coeffs=(1, 2))
    assert SearchConfig().depth_for(1000) == 9
