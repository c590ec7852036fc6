import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from phrtest.errors import InputError
from phrtest.spectral import (
    CumulantGrid,
    FramePlan,
    average_estimates,
    default_frame_length,
    dft_direct,
    dft_frame,
    estimate_cumulant_grid,
    frame_cumulant,
    frame_spectrum,
    pair_count,
    partition_frames,
    principal_domain,
)
from phrtest.timeseries import TimeSeries


def brute_force_domain(L):
    """Scan a generous integer box and keep pairs satisfying the inequalities."""
    keep = []
    for k1 in range(-L, L + 1):
        for k2 in range(-L, L + 1):
            if 0 < k1 <= L / 2 and -k1 < k2 <= k1 and (k1 + k2) % L != 0:
                keep.append((k1, k2))
    return sorted(keep)


class TestPartition:
    @pytest.mark.parametrize("T, P, used", [(1000, 50, 1000), (1005, 50, 1000), (40, 2, 40)])
    def test_floor_rule(self, T, P, used):
        plan, frames = partition_frames(TimeSeries(np.arange(T, dtype=float)), 20)
        assert (plan.frame_count, plan.total_used) == (P, used)
        assert frames.shape == (P, 20)
        assert_array_equal(frames[1], np.arange(20, 40))

    @pytest.mark.parametrize("T, L", [(30, 20), (100, 7), (100, 2)])
    def test_errors(self, T, L):
        with pytest.raises(InputError):
            partition_frames(np.zeros(T), L)

    @pytest.mark.parametrize("T, L", [(100, 10), (1000, 32), (5000, 70), (250, 16), (19656, 140)])
    def test_default_frame_length(self, T, L):
        assert default_frame_length(T) == L


class TestDft:
    def test_constant(self):
        X = dft_frame(np.full(8, 2.5), 8)
        assert X[0] == pytest.approx(20.0)
        assert_allclose(X[1:], 0, atol=1e-9 * 8 * 2.5)

    def test_impulse(self):
        x = np.zeros(10)
        x[0] = 1
        assert_allclose(dft_frame(x, 10), np.ones(10), atol=1e-15)

    def test_cosine(self):
        assert_allclose(dft_frame(np.array([1.0, 0, -1, 0]), 4), [0, 2, 0, 2], atol=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            dft_frame(np.zeros(5), 4)

    @settings(max_examples=40)
    @given(st.integers(2, 40).map(lambda h: 2 * h), st.integers(0, 2**32 - 1))
    def test_fast_matches_direct(self, L, seed):
        x = np.random.default_rng(seed).standard_normal(L)
        assert_allclose(dft_frame(x, L), dft_direct(x), atol=1e-10 * np.sqrt(L) * np.abs(x).sum())

    @settings(max_examples=40)
    @given(st.integers(2, 40).map(lambda h: 2 * h), st.integers(0, 2**32 - 1))
    def test_parseval_and_conjugate_symmetry(self, L, seed):
        x = np.random.default_rng(seed).standard_normal(L)
        X = dft_frame(x, L)
        energy = np.sum(x**2)
        assert np.sum(np.abs(X) ** 2) == pytest.approx(L * energy, rel=1e-9)
        k = np.arange(1, L)
        assert_allclose(X[L - k], np.conj(X[k]), atol=1e-12 * max(1.0, np.sqrt(L * energy)))

    @pytest.mark.parametrize("p", [0, 1, 7, 123])
    def test_global_time_phase_is_trivial(self, p):
        L = 16
        x = np.random.default_rng(p).standard_normal(L)
        local = dft_direct(x, offset=0)
        absolute = dft_direct(x, offset=p * L)
        assert_allclose(absolute, local, rtol=1e-9, atol=1e-12)


class TestPrincipalDomain:
    def test_L4(self):
        assert principal_domain(4) == ((1, 0), (1, 1), (2, -1), (2, 0), (2, 1))

    def test_L10_count(self):
        assert len(principal_domain(10)) == 29

    @pytest.mark.parametrize("L", [4, 6, 8, 10, 16])
    def test_matches_brute_force_and_count(self, L):
        pairs = [tuple(p) for p in principal_domain(L)]
        assert pairs == brute_force_domain(L)
        assert len(pairs) == L * L // 4 + L // 2 - 1 == pair_count(L)

    def test_excludes_aliased_corner(self):
        assert (5, 5) not in principal_domain(10)
        assert all(k2 != -k1 for k1, k2 in principal_domain(12))

    @pytest.mark.parametrize("L", [3, 2, 7])
    def test_errors(self, L):
        with pytest.raises(InputError):
            principal_domain(L)


class TestFrameEstimates:
    def test_impulse_spectrum_and_cumulant(self):
        L = 8
        x = np.zeros(L)
        x[0] = 1
        X = dft_frame(x, L)
        assert_allclose(frame_spectrum(X, L), np.full(L // 2 + 1, 1 / L))
        assert_allclose(frame_cumulant(X, principal_domain(L), L), 1 / L, atol=1e-15)

    def test_constant_spectrum(self):
        X = dft_frame(np.full(6, 3.0), 6)
        S = frame_spectrum(X, 6)
        assert S[0] == pytest.approx(6 * 9)
        assert_allclose(S[1:], 0, atol=1e-12)

    def test_cosine_frame(self):
        X = dft_frame(np.array([1.0, 0, -1, 0]), 4)
        assert frame_spectrum(X, 4)[1] == pytest.approx(1.0)
        assert frame_cumulant(X, [(1, 1)], 4)[0] == pytest.approx(1.0)

    def test_negative_k2_uses_conjugate(self):
        L = 10
        x = np.random.default_rng(3).standard_normal(L)
        X = dft_frame(x, L)
        got = frame_cumulant(X, [(3, -2)], L)[0]
        assert got == pytest.approx(X[3] * X[L - 2] / L, rel=1e-12)

    @pytest.mark.parametrize("pair", [(1, -1), (3, -3), (5, 5), (0, 0), (6, 1)])
    def test_pair_outside_domain(self, pair):
        with pytest.raises(InputError):
            frame_cumulant(np.zeros(10, complex), [pair], 10)

    def test_spectra_non_negative(self):
        grid = estimate_cumulant_grid(np.random.default_rng(4).standard_normal(500), 20)
        assert np.all(grid.s_hat >= 0)


class TestAveraging:
    def test_identical_frames(self):
        frame = np.random.default_rng(5).standard_normal(8)
        grid = estimate_cumulant_grid(np.tile(frame, 4), 8)
        X = dft_frame(frame, 8)
        assert_allclose(grid.k_hat, frame_cumulant(X, principal_domain(8), 8), atol=1e-14)
        assert_allclose(grid.s_hat, frame_spectrum(X, 8), atol=1e-14)

    def test_sign_flipped_frames(self):
        grid = estimate_cumulant_grid(np.array([1.0, 0, -1, 0, -1, 0, 1, 0]), 4)
        i = grid.pairs.index((1, 1))
        assert grid.k_hat[i] == pytest.approx(1.0)

    def test_vectorized_path_matches_per_frame_path(self):
        x = np.random.default_rng(6).standard_normal(203)
        L = 12
        plan, frames = partition_frames(x, L)
        dfts = [dft_direct(f) for f in frames]
        pairs = principal_domain(L)
        ref = average_estimates(
            np.array([frame_spectrum(X, L) for X in dfts]),
            np.array([frame_cumulant(X, pairs, L) for X in dfts]),
            plan,
        )
        fast = estimate_cumulant_grid(x, L, keep_frames=True)
        assert_allclose(fast.k_hat, ref.k_hat, rtol=1e-10, atol=1e-12)
        assert_allclose(fast.s_hat, ref.s_hat, rtol=1e-10)
        # retained frame DFTs reproduce K_hat
        half = fast.frame_dfts
        recomputed = np.mean([frame_cumulant(np.concatenate([h, np.conj(h[-2:0:-1])]), pairs, L) for h in half], axis=0)
        assert_allclose(recomputed, fast.k_hat, rtol=1e-12, atol=1e-14)

    def test_shape_check(self):
        with pytest.raises(InputError):
            average_estimates(np.zeros((3, 3)), np.zeros((3, 4)), FramePlan(4, 3))

    def test_white_noise_cumulant_variance(self):
        # variance of K_hat is S(k1) S(k2) / P for a stationary series
        x = np.random.default_rng(7).standard_normal(5000)
        grid = estimate_cumulant_grid(x, 70)
        k1 = np.array([p.k1 for p in grid.pairs])
        k2 = np.abs([p.k2 for p in grid.pairs])
        ratio = np.abs(grid.k_hat) ** 2 * grid.plan.frame_count / (grid.s_hat[k1] * grid.s_hat[k2])
        assert 0.5 <= ratio.mean() <= 2.0

    def test_json_round_trip(self):
        grid = estimate_cumulant_grid(np.random.default_rng(8).standard_normal(64), 8)
        d = grid.to_dict()
        assert set(d) == {"L", "P", "pairs", "k_hat_re", "k_hat_im", "s_hat"}
        back = CumulantGrid.from_dict(d)
        assert back.pairs == grid.pairs
        assert_array_equal(back.k_hat, grid.k_hat)
        assert back.to_dict() == d

    def test_deterministic(self):
        x = np.random.default_rng(9).standard_normal(1000)
        a, b = estimate_cumulant_grid(x, 30), estimate_cumulant_grid(x.copy(), 30)
        assert a.k_hat.tobytes() == b.k_hat.tobytes()
