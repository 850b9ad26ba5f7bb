import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from oracles import filtered_dense_energy
from wp4.core import (
    FrequencyGrid,
    FrequencySignal,
    PhasePoint,
    SplineWindow,
    atom_sample,
    duflo_norm,
    inner_product,
)
from wp4.spline_seq import (
    SlopeBand,
    SplineSequence,
    TrigFilter,
    eval_wavelet_coeff,
    indicator_coeffs,
    scale_pass,
    seq_add,
    seq_norm,
    seq_scale,
    slope_bisect,
    tensor_init,
    time_pass,
    time_pass_pair,
    time_pass_reference,
    time_shift,
)

TRI = SplineWindow.triangle()


def random_signal(rng, N=200, omega0=4.0, r=1.0, support=None):
    x = rng.standard_normal(N + 1) + 1j * rng.standard_normal(N + 1)
    if support is not None:
        mask = np.zeros(N + 1, bool)
        mask[support[0] : support[1] + 1] = True
        x[~mask] = 0
    return FrequencySignal(omega0, r, x)


def assert_same_sequence(F, G, atol=1e-12):
    """Same function: compare values of each cross-section on the union of both node sets."""
    assert F.grid == G.grid
    D = seq_add(F, seq_scale(G, -1))
    scale = max(1.0, float(np.abs(F.v).max(initial=0)), float(np.abs(G.v).max(initial=0)))
    assert np.all(np.abs(D.v) <= atol * scale)


# -- filters ---------------------------------------------------------------------


def test_indicator_coeffs_order_one():
    c = indicator_coeffs(1)
    np.testing.assert_allclose(c, [-1j / np.pi, 0.5, 1j / np.pi], atol=1e-15)


def test_indicator_coeffs_match_direct_integration():
    L = 9
    c = indicator_coeffs(L)
    for l in range(-L, L + 1):
        re = integrate.quad(lambda x: np.cos(l * x), -np.pi, 0)[0] / (2 * np.pi)
        im = integrate.quad(lambda x: -np.sin(l * x), -np.pi, 0)[0] / (2 * np.pi)
        assert c[l + L] == pytest.approx(complex(re, im), abs=1e-12)


def test_indicator_converges_inside_interval():
    assert TrigFilter.half_period(201)(-np.pi / 2) == pytest.approx(1, abs=0.01)
    assert TrigFilter.half_period(201)(np.pi / 2) == pytest.approx(0, abs=0.01)


def test_complementary_coefficients_sum_to_delta():
    f0 = TrigFilter.half_period(5, level=2, bit=0)
    f1 = f0.with_bit(1)
    delta = np.zeros(11)
    delta[5] = 1
    np.testing.assert_allclose(f0.effective_coeffs() + f1.effective_coeffs(), delta, atol=1e-15)
    x = np.linspace(-4, 4, 50)
    np.testing.assert_allclose(f0(x) + f1(x), 1, atol=1e-14)


def test_filter_validation():
    with pytest.raises(ValueError):
        indicator_coeffs(0)
    with pytest.raises(ValueError):
        TrigFilter(2, np.ones(3))
    with pytest.raises(ValueError):
        TrigFilter(1, np.ones(3), level=0, bit=2)


# -- tensor products and norms ---------------------------------------------------


def test_tensor_init_constant_signal_gives_window_sections():
    s = FrequencySignal(2.0, 1.0, np.ones(6))
    F = tensor_init(TRI, s)
    assert F.node_count == 6 * 3
    for n in range(6):
        x, v = F.cross_section(n)
        np.testing.assert_allclose(x, TRI.abscissae)
        np.testing.assert_allclose(v, TRI.values)


def test_tensor_init_zero_signal_is_empty():
    F = tensor_init(TRI, FrequencySignal(2.0, 1.0, np.zeros(6)))
    assert F.node_count == 0 and seq_norm(F) == 0


def test_tensor_init_counts_only_nonzero_samples():
    x = np.zeros(10, complex)
    x[[1, 4, 7]] = 1
    assert tensor_init(TRI, FrequencySignal(2.0, 1.0, x)).node_count == 9


def test_norm_factorizes(rng):
    for _ in range(10):
        s = random_signal(rng, N=int(rng.integers(10, 500)), omega0=rng.uniform(0.5, 20), r=rng.uniform(0.1, 2))
        F = tensor_init(TRI, s)
        assert seq_norm(F) ** 2 == pytest.approx(duflo_norm(TRI) ** 2 * s.norm() ** 2, rel=1e-10)


@given(st.complex_numbers(min_magnitude=1e-6, max_magnitude=1e3, allow_nan=False, allow_infinity=False))
def test_norm_homogeneity(lam):
    rng = np.random.default_rng(7)
    F = tensor_init(TRI, random_signal(rng, N=30))
    assert seq_norm(seq_scale(F, lam)) == pytest.approx(abs(lam) * seq_norm(F), rel=1e-12, abs=1e-300)


def test_add_negation_and_zero(rng):
    F = tensor_init(TRI, random_signal(rng, N=40))
    zero = seq_add(F, seq_scale(F, -1))
    assert zero.node_count == 0 and seq_norm(zero) == 0
    same = seq_add(F, SplineSequence.empty(F.grid))
    np.testing.assert_array_equal(same.n, F.n)
    np.testing.assert_allclose(same.v, F.v, rtol=0, atol=1e-13)


def test_add_rejects_grid_mismatch(rng):
    F = tensor_init(TRI, random_signal(rng, N=10))
    G = tensor_init(TRI, random_signal(rng, N=11))
    with pytest.raises(ValueError):
        seq_add(F, G)


@given(st.integers(0, 10_000))
def test_triangle_inequality(seed):
    rng = np.random.default_rng(seed)
    F = tensor_init(TRI, random_signal(rng, N=30))
    G = time_shift(tensor_init(SplineWindow.triangle(0.7, 1.1, 2.0), random_signal(rng, N=30)), 3)
    assert seq_norm(seq_add(F, G)) <= seq_norm(F) + seq_norm(G) + 1e-12


def test_add_merges_nearby_abscissae():
    grid = FrequencyGrid(1.0, 1.0, 3)
    F = SplineSequence.from_cross_sections(grid, {1: ([1.0, 2.0, 3.0], [0, 1, 0])})
    G = SplineSequence.from_cross_sections(grid, {1: ([1.0, 2.0 * (1 + 1e-14), 3.0], [0, 1, 0])})
    H = seq_add(F, G)
    assert H.node_count == 3
    np.testing.assert_allclose(H.v, [0, 2, 0], atol=1e-12)


def test_add_interpolates_between_nodes():
    grid = FrequencyGrid(1.0, 1.0, 3)
    F = SplineSequence.from_cross_sections(grid, {2: ([1.0, 2.0, 3.0], [0.0, 2.0, 0.0])})
    G = SplineSequence.from_cross_sections(grid, {2: ([1.5, 2.5, 4.0], [0.0, 4.0, 0.0])})
    x, v = seq_add(F, G).cross_section(2)
    np.testing.assert_allclose(x, [1, 1.5, 2, 2.5, 3, 4])
    np.testing.assert_allclose(v, [0, 1, 4, 5, 8 / 3, 0], atol=1e-12)


def test_add_jump_inside_a_section_keeps_right_limit():
    # one value per node: an interior discontinuity is stored by its right limit
    grid = FrequencyGrid(1.0, 1.0, 3)
    F = SplineSequence.from_cross_sections(grid, {2: ([1.0, 3.0], [1.0, 3.0])})
    G = SplineSequence.from_cross_sections(grid, {2: ([2.0, 4.0], [10.0, 10.0])})
    x, v = seq_add(F, G).cross_section(2)
    np.testing.assert_allclose(x, [1, 2, 3, 4])
    np.testing.assert_allclose(v, [1, 12, 10, 10])


# -- slope bands -----------------------------------------------------------------


def test_slope_bisect_values():
    assert slope_bisect(SlopeBand(1, 3)) == pytest.approx(1.5)
    assert slope_bisect(SlopeBand(0.5, 1)) == pytest.approx(2 / 3)
    with pytest.raises(ValueError):
        SlopeBand(2, 1)
    with pytest.raises(ValueError):
        SlopeBand(0, 1)


def test_bisection_splits_node_slopes_evenly():
    # node lines omega'_k / omega_n, many n: slopes uniform in 1/z
    omegas = 100.0 + np.arange(5000)
    K = 3
    abscissae = np.array([0.5, 1.0, 1.5])
    z = (abscissae[None, :] / omegas[:, None]).ravel()
    band = SlopeBand(1.5 / omegas[-1], 0.5 / omegas[0])
    c = slope_bisect(band)
    inside = z[(z >= band.a) & (z <= band.b)]
    lower = np.count_nonzero(inside < c)
    upper = np.count_nonzero(inside >= c)
    # the brute-force counts differ by at most K plus edge effects of the node lines
    per_line = [np.count_nonzero((z[k::K] >= band.a) & (z[k::K] <= band.b)) for k in range(K)]
    for k in range(K):
        zk = z[k::K]
        lo = np.count_nonzero((zk >= band.a) & (zk < c))
        hi = np.count_nonzero((zk >= c) & (zk <= band.b))
        assert abs(lo - hi) <= 1, (k, lo, hi, per_line)
    assert abs(lower - upper) <= K


def test_scale_pass_identity_and_disjoint(rng):
    F = tensor_init(TRI, random_signal(rng, N=50))
    all_slopes = SlopeBand(F.z.min() * 0.5, F.z.max() * 2)
    G = scale_pass(F, all_slopes)
    assert seq_norm(G) == seq_norm(F)
    assert scale_pass(F, SlopeBand(F.z.max() * 2, F.z.max() * 3)).node_count == 0


def test_scale_pass_inserts_at_most_two_nodes_per_section(rng):
    F = tensor_init(TRI, random_signal(rng, N=80))
    band = SlopeBand(0.9 / 60, 1.1 / 40)
    G = scale_pass(F, band)
    for n in G.indices():
        assert np.count_nonzero(G.n == n) <= np.count_nonzero(F.n == n) + 2
    assert np.all((G.z >= band.a) & (G.z <= band.b))


def test_scale_pass_interpolates_boundary_values():
    grid = FrequencyGrid(1.0, 1.0, 2)
    F = SplineSequence.from_cross_sections(grid, {0: ([1.0, 3.0], [0.0, 2.0 + 2j])})
    x, v = scale_pass(F, SlopeBand(1.5, 2.5)).cross_section(0)
    np.testing.assert_allclose(x, [1.5, 2.5])
    np.testing.assert_allclose(v, [0.5 + 0.5j, 1.5 + 1.5j])


def test_scale_pass_energy_matches_dense_mask(rng):
    s = random_signal(rng, N=1024, support=(300, 700))
    F = tensor_init(TRI, s)
    for _ in range(3):
        a = math.exp(rng.uniform(math.log(0.5 / 1028), math.log(1.5 / 4)))
        b = a * math.exp(rng.uniform(0.1, 1.5))
        band = SlopeBand(a, b)
        got = seq_norm(scale_pass(F, band)) ** 2
        ref = filtered_dense_energy(s, TRI, (a, b), [])
        assert got == pytest.approx(ref, rel=0.03, abs=1e-9 * seq_norm(F) ** 2)


# -- time shifts and passes ------------------------------------------------------


def test_time_shift_identity_and_ray_transport():
    grid = FrequencyGrid(10.0, 1.0, 30)
    F = SplineSequence.from_cross_sections(grid, {0: ([1.0, 2.0, 3.0], [0, 1, 0])})
    assert time_shift(F, 0) is F
    G = time_shift(F, 10)
    x, v = G.cross_section(10)
    assert x[1] == pytest.approx(4.0)  # node (2, omega=10) -> (4, omega=20)
    np.testing.assert_array_equal(G.z, F.z)
    np.testing.assert_array_equal(v, F.v)


def test_time_shift_preserves_norm_exactly_without_drops(rng):
    s = random_signal(rng, N=100, support=(20, 80))
    F = tensor_init(TRI, s)
    for m in (-20, -3, 5, 20):
        G = time_shift(F, m)
        assert G.dropped == 0
        assert seq_norm(G) == seq_norm(F)


def test_time_shift_drops_are_counted_and_norm_decreases(rng):
    F = tensor_init(TRI, random_signal(rng, N=50))
    G = time_shift(F, 7)
    assert G.dropped == 7 * 3
    assert seq_norm(G) <= seq_norm(F)


def test_scale_pass_commutes_with_time_shift(rng):
    F = tensor_init(TRI, random_signal(rng, N=100, support=(20, 80)))
    band = SlopeBand(0.8 / 60, 1.3 / 45)
    A = scale_pass(time_shift(F, 9), band)
    B = time_shift(scale_pass(F, band), 9)
    np.testing.assert_array_equal(A.n, B.n)
    np.testing.assert_array_equal(A.z, B.z)
    np.testing.assert_allclose(A.v, B.v, rtol=1e-14)


def test_time_shift_multiplies_transform_by_exponential(rng):
    s = random_signal(rng, N=100, support=(20, 80))
    F = tensor_init(TRI, s)
    g = PhasePoint(0.123, math.log(1.0 / 60))
    m = 7
    lhs = eval_wavelet_coeff(time_shift(F, m), g)
    rhs = np.exp(2j * np.pi * s.r * g.g1 * m) * eval_wavelet_coeff(F, g)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_identity_filter_is_identity(rng):
    F = tensor_init(TRI, random_signal(rng, N=60))
    c = np.zeros(7, complex)
    c[3] = 1
    G = time_pass(F, TrigFilter(3, c, level=2))
    np.testing.assert_array_equal(G.n, F.n)
    np.testing.assert_allclose(G.v, F.v, rtol=0, atol=1e-13)


@pytest.mark.parametrize("level", [0, 1, 3, 5])
def test_complementary_passes_sum_to_input(rng, level):
    F = scale_pass(tensor_init(TRI, random_signal(rng, N=400)), SlopeBand(1.5 / 404, 0.5 / 4))
    F = time_pass(F, TrigFilter.half_period(9, level=1))  # generic input
    lo, hi = time_pass_pair(F, TrigFilter.half_period(9, level=level))
    # the sum is F minus what the shifts pushed off the grid; compare away from the edges
    total = seq_add(lo, hi)
    span = 9 * 2**level
    keep_f = (F.n >= span) & (F.n <= F.grid.N - span)
    keep_t = (total.n >= span) & (total.n <= F.grid.N - span)
    Fi = SplineSequence(F.grid, F.n[keep_f], F.z[keep_f], F.v[keep_f])
    Ti = SplineSequence(F.grid, total.n[keep_t], total.z[keep_t], total.v[keep_t])
    assert_same_sequence(Fi, Ti, atol=1e-12)


def test_kernel_matches_reference_fold(rng):
    F = scale_pass(tensor_init(TRI, random_signal(rng, N=300)), SlopeBand(1.5 / 304, 0.5 / 4))
    for level in (0, 2, 4):
        for bit in (0, 1):
            filt = TrigFilter.half_period(9, level=level, bit=bit)
            A = time_pass(F, filt)
            B = time_pass_reference(F, filt)
            assert A.node_count == B.node_count
            assert A.dropped == B.dropped
            np.testing.assert_array_equal(A.n, B.n)
            np.testing.assert_allclose(A.z, B.z, rtol=0)
            np.testing.assert_allclose(A.v, B.v, atol=1e-12 * np.abs(F.v).max())


def test_time_pass_node_count_bound(rng):
    F = tensor_init(TRI, random_signal(rng, N=200))
    for level in (0, 3):
        G = time_pass(F, TrigFilter.half_period(9, level=level))
        assert G.node_count <= 19 * F.node_count


def test_time_pass_energy_split_is_near_unit(rng):
    for _ in range(5):
        F = tensor_init(TRI, random_signal(rng, N=600, support=(200, 400)))
        lo, hi = time_pass_pair(F, TrigFilter.half_period(9, level=int(rng.integers(0, 4))))
        ratio = (seq_norm(lo) ** 2 + seq_norm(hi) ** 2) / seq_norm(F) ** 2
        assert 0.7 <= ratio <= 1.3


def test_time_pass_multiplies_transform_by_filter(rng):
    s = random_signal(rng, N=300, support=(100, 200))
    F = tensor_init(TRI, s)
    filt = TrigFilter.half_period(9, level=2, bit=1)
    G = time_pass(F, filt)
    assert G.dropped == 0
    for g1 in (0.01, 0.3, 0.77):
        g = PhasePoint(g1, math.log(1.0 / 150))
        expect = filt(2 * np.pi * s.r * g1) * eval_wavelet_coeff(F, g)
        assert eval_wavelet_coeff(G, g) == pytest.approx(expect, rel=1e-10)


def test_time_pass_is_deterministic(rng):
    F = tensor_init(TRI, random_signal(rng, N=300))
    filt = TrigFilter.half_period(9, level=3)
    A, B = time_pass(F, filt), time_pass(F, filt)
    assert A.v.tobytes() == B.v.tobytes() and A.z.tobytes() == B.z.tobytes()


# -- wavelet coefficients --------------------------------------------------------


def test_eval_matches_inner_product(rng):
    s = random_signal(rng, N=300)
    F = tensor_init(TRI, s)
    for _ in range(10):
        g = PhasePoint(rng.uniform(-1, 1), math.log(rng.uniform(0.5 / 304, 1.5 / 4)))
        assert eval_wavelet_coeff(F, g) == pytest.approx(inner_product(s, atom_sample(TRI, g, s)), abs=1e-10)


def test_eval_zero_and_linearity(rng):
    grid = FrequencyGrid(4.0, 1.0, 40)
    assert eval_wavelet_coeff(SplineSequence.empty(grid), PhasePoint(0, -3)) == 0
    F = tensor_init(TRI, random_signal(rng, N=40))
    G = time_shift(tensor_init(TRI, random_signal(rng, N=40)), 2)
    for _ in range(5):
        g = PhasePoint(rng.uniform(0, 1), math.log(rng.uniform(0.02, 0.2)))
        total = eval_wavelet_coeff(seq_add(F, G), g)
        assert total == pytest.approx(eval_wavelet_coeff(F, g) + eval_wavelet_coeff(G, g), abs=1e-10)


def test_eval_at_closing_node():
    grid = FrequencyGrid(1.0, 1.0, 1)
    F = SplineSequence.from_cross_sections(grid, {0: ([1.0, 2.0], [1.0, 3.0])})
    assert eval_wavelet_coeff(F, PhasePoint(0, math.log(2.0))) == pytest.approx(math.sqrt(2) * 3)


def test_from_cross_sections_validation():
    grid = FrequencyGrid(1.0, 1.0, 3)
    with pytest.raises(ValueError):
        SplineSequence.from_cross_sections(grid, {5: ([1.0], [1.0])})
    with pytest.raises(ValueError):
        SplineSequence.from_cross_sections(grid, {0: ([2.0, 1.0], [1.0, 1.0])})
