import numpy as np
import pytest

from derainkit.filters import (
    FilterParams,
    aggregation_weights,
    box_mean,
    decompose,
    edge_aware_weight,
    gif,
    iwgif,
    residual_mse,
    solve_coefficients,
    wgif,
    window_stats,
)
from derainkit.rain import StreakParams, compose_rainy, synth_streaks

from oracles import (
    naive_box_mean,
    naive_edge_weight,
    naive_filter,
    naive_fit_residual,
    naive_window_stats,
)


def rand_img(rng, h, w, channels=1):
    shape = (h, w) if channels == 1 else (h, w, channels)
    return rng.uniform(0.0, 1.0, size=shape)


class TestBoxMean:
    def test_constant(self):
        img = np.full((10, 12), 0.7)
        for zeta in (1, 3, 5):
            assert np.allclose(box_mean(img, zeta), 0.7)

    def test_impulse_border_normalization(self):
        img = np.zeros((5, 5))
        img[2, 2] = 1.0
        out = box_mean(img, 1)
        expected = np.zeros((5, 5))
        expected[1:4, 1:4] = 1.0 / 9.0
        assert np.allclose(out, expected)

    def test_matches_bruteforce(self):
        rng = np.random.default_rng(0)
        img = rand_img(rng, 16, 16)
        assert np.max(np.abs(box_mean(img, 3) - naive_box_mean(img, 3))) < 1e-6

    def test_empty_image_rejected(self):
        with pytest.raises(ValueError, match="empty image"):
            box_mean(np.zeros((0, 5)), 1)


class TestWindowStats:
    def test_constant_pair(self):
        img = np.full((8, 8), 0.5)
        st = window_stats(img, img, 2)
        assert np.allclose(st.var_G, 0.0)
        assert np.allclose(st.var_I, 0.0)
        assert np.allclose(st.cov_IG, 0.0)
        assert np.allclose(st.mu_G, 0.5)
        assert np.allclose(st.mu_I, 0.5)

    def test_cov_of_self_is_var(self):
        rng = np.random.default_rng(1)
        g = rand_img(rng, 8, 8)
        st = window_stats(g, g, 2)
        assert np.max(np.abs(st.cov_IG - st.var_G)) < 1e-9

    def test_matches_bruteforce(self):
        rng = np.random.default_rng(2)
        i, g = rand_img(rng, 8, 8), rand_img(rng, 8, 8)
        st = window_stats(i, g, 2)
        ref = naive_window_stats(i, g, 2)
        for name in ("mu_G", "mu_I", "mu_GI", "var_G", "var_I", "cov_IG"):
            assert np.max(np.abs(getattr(st, name) - ref[name])) < 1e-6
        assert np.array_equal(st.window_count, ref["window_count"])

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="guidance/input shape mismatch"):
            window_stats(np.zeros((4, 4)), np.zeros((5, 5)), 1)


class TestEdgeAwareWeight:
    def test_constant_image_unit_weight(self):
        gamma = edge_aware_weight(np.full((9, 9), 0.3), 1e-4)
        assert np.allclose(gamma, 1.0)

    def test_boundary_column_exceeds_flat(self):
        img = np.zeros((16, 16))
        img[:, 8:] = 1.0
        gamma = edge_aware_weight(img, 1e-4)
        assert gamma[8, 8] > gamma[8, 3]
        assert gamma[8, 7] > gamma[8, 12]

    def test_matches_bruteforce(self):
        rng = np.random.default_rng(3)
        g = rand_img(rng, 8, 8)
        fast = edge_aware_weight(g, 1e-4)
        assert np.max(np.abs(fast - naive_edge_weight(g, 1e-4))) < 1e-6

    def test_positive_everywhere(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            assert np.all(edge_aware_weight(rand_img(rng, 12, 12), 1e-4) > 0)


class TestSolveCoefficients:
    def test_constant_inputs(self):
        img = np.full((8, 8), 0.4)
        st = window_stats(img, img, 2)
        a, b = solve_coefficients(st, np.ones((8, 8)), 1e-3)
        assert np.allclose(a, 0.0)
        assert np.allclose(b, 0.4)

    def test_exact_linear_relation(self):
        rng = np.random.default_rng(5)
        g = rand_img(rng, 12, 12) * 0.4
        i = 2.0 * g + 0.1
        st = window_stats(i, g, 2)
        a, b = solve_coefficients(st, edge_aware_weight(g, 1e-4), 1e-12)
        mask = st.var_G > 1e-6
        assert np.max(np.abs(a[mask] - 2.0)) < 1e-6
        assert np.max(np.abs(b[mask] - 0.1)) < 1e-6

    def test_ridge_oracle(self):
        # direct per-window minimization of the weighted ridge cost:
        # a = gamma*cov / (gamma*var + lam), derived independently from
        # the normal equations of sum gamma*(aG+b-I)^2 + lam*a^2 per window
        rng = np.random.default_rng(6)
        i, g = rand_img(rng, 8, 8), rand_img(rng, 8, 8)
        lam = 1e-4
        gamma = edge_aware_weight(g, 1e-4)
        st = window_stats(i, g, 2)
        a, b = solve_coefficients(st, gamma, lam)
        ref = naive_window_stats(i, g, 2)
        h, w = i.shape
        for y in range(h):
            for x in range(w):
                n = ref["window_count"][y, x]
                gm = gamma[y, x]
                # normal equations of the per-window cost; the penalty
                # term is summed over the window, so it contributes n*lam
                sg = ref["mu_G"][y, x] * n
                si = ref["mu_I"][y, x] * n
                sgg = (ref["var_G"][y, x] + ref["mu_G"][y, x] ** 2) * n
                sgi = ref["mu_GI"][y, x] * n
                mat = np.array([[gm * sgg + n * lam, gm * sg], [gm * sg, gm * n]])
                rhs = np.array([gm * sgi, gm * si])
                ab = np.linalg.solve(mat, rhs)
                assert abs(a[y, x] - ab[0]) < 1e-6
                assert abs(b[y, x] - ab[1]) < 1e-6


class TestResidualMse:
    def test_constant_zero(self):
        img = np.full((8, 8), 0.6)
        st = window_stats(img, img, 2)
        gamma = np.ones((8, 8))
        a, _ = solve_coefficients(st, gamma, 1e-3)
        assert np.allclose(residual_mse(st, a, gamma, 1e-3), 0.0)

    def test_exact_linear_zero(self):
        rng = np.random.default_rng(7)
        g = rand_img(rng, 10, 10) * 0.4
        i = 2.0 * g + 0.1
        st = window_stats(i, g, 2)
        gamma = np.ones((10, 10))
        a, _ = solve_coefficients(st, gamma, 1e-12)
        assert np.max(residual_mse(st, a, gamma, 1e-12)) <= 1e-8

    def test_closed_form_matches_explicit_sum(self):
        rng = np.random.default_rng(8)
        i, g = rand_img(rng, 8, 8), rand_img(rng, 8, 8)
        lam = 1e-3
        gamma = edge_aware_weight(g, 1e-4)
        st = window_stats(i, g, 2)
        a, b = solve_coefficients(st, gamma, lam)
        closed = residual_mse(st, a, gamma, lam)
        explicit = naive_fit_residual(i, g, a, b, 2)
        assert np.max(np.abs(closed - explicit)) < 1e-8


class TestAggregationWeights:
    def test_zero_residual(self):
        assert np.allclose(aggregation_weights(np.zeros((4, 4)), 0.05), 1.001)

    def test_large_residual_floor(self):
        eta = 0.05
        w = aggregation_weights(np.full((4, 4), 1e6 * eta), eta)
        assert np.max(np.abs(w - 0.001)) < 1e-9

    def test_half_life(self):
        eta = 0.05
        w = aggregation_weights(np.full((2, 2), eta * np.log(2.0)), eta)
        assert np.max(np.abs(w - 0.501)) < 1e-9


class TestIwgif:
    def test_constant_passthrough(self):
        img = np.full((16, 16), 0.42)
        out = iwgif(img, img, FilterParams())
        assert np.max(np.abs(out - 0.42)) < 1e-12

    def test_exact_linear_identity(self):
        rng = np.random.default_rng(9)
        g = rand_img(rng, 16, 16) * 0.4
        i = 2.0 * g + 0.1
        p = FilterParams(zeta=2, lam=1e-12, epsilon=1e-4, eta=0.05)
        out = iwgif(i, g, p, clamp=False)
        st = window_stats(i, g, 2)
        mask = st.var_G > 1e-6
        assert np.max(np.abs(out[mask] - i[mask])) < 1e-5

    def test_matches_naive_oracle_selfguided(self):
        rng = np.random.default_rng(10)
        img = rand_img(rng, 12, 12)
        p = FilterParams(zeta=2, lam=1e-4, epsilon=1e-4, eta=0.05)
        fast = iwgif(img, img, p, clamp=False)
        ref = naive_filter(img, img, 2, 1e-4, eps=1e-4, eta=0.05)
        assert np.max(np.abs(fast - ref)) < 1e-6

    def test_matches_naive_oracle_color(self):
        rng = np.random.default_rng(11)
        img = rand_img(rng, 10, 10, channels=3)
        p = FilterParams(zeta=2, lam=1e-3, epsilon=1e-4, eta=0.05)
        fast = iwgif(img, img, p, clamp=False)
        ref = naive_filter(img, img, 2, 1e-3, eps=1e-4, eta=0.05)
        assert np.max(np.abs(fast - ref)) < 1e-6

    def test_shape_mismatch_and_bad_params(self):
        with pytest.raises(ValueError, match="shape mismatch"):
            iwgif(np.zeros((4, 4)), np.zeros((5, 5)), FilterParams())
        with pytest.raises(ValueError):
            FilterParams(zeta=0)
        with pytest.raises(ValueError):
            FilterParams(lam=-1.0)

    def test_never_amplifies_variance_selfguided(self):
        rng = np.random.default_rng(12)
        p = FilterParams(zeta=3, lam=1e-3, epsilon=1e-4, eta=0.05)
        for _ in range(50):
            img = rand_img(rng, 14, 14)
            out = iwgif(img, img, p)
            assert np.var(out) <= np.var(img) + 1e-9


class TestGifWgif:
    def test_constant_passthrough(self):
        img = np.full((12, 12), 0.6)
        assert np.allclose(gif(img, img, 3, 1e-3), 0.6)
        assert np.allclose(wgif(img, img, 3, 1e-3, 1e-4), 0.6)

    def test_gif_large_lambda_is_double_mean(self):
        rng = np.random.default_rng(13)
        img = rand_img(rng, 12, 12)
        out = gif(img, img, 2, 1e6)
        ref = box_mean(box_mean(img, 2), 2)
        assert np.max(np.abs(out - ref)) < 1e-5

    def test_match_naive_oracles(self):
        rng = np.random.default_rng(14)
        img = rand_img(rng, 8, 8)
        fast_g = gif(img, img, 2, 1e-4)
        ref_g = np.clip(naive_filter(img, img, 2, 1e-4), 0.0, 1.0)
        assert np.max(np.abs(fast_g - ref_g)) < 1e-6
        fast_w = wgif(img, img, 2, 1e-4, 1e-4)
        ref_w = np.clip(naive_filter(img, img, 2, 1e-4, eps=1e-4), 0.0, 1.0)
        assert np.max(np.abs(fast_w - ref_w)) < 1e-6


class TestDecompose:
    def test_constant_zero_detail(self):
        img = np.full((16, 16), 0.5)
        _, detail = decompose(img, FilterParams())
        assert np.allclose(detail, 0.0)

    def test_exact_reconstruction(self):
        rng = np.random.default_rng(15)
        img = rand_img(rng, 20, 20, channels=3)
        base, detail = decompose(img, FilterParams(zeta=3))
        assert np.max(np.abs(base + detail - img)) < 1e-12

    def test_streaks_raise_detail_energy(self):
        rng = np.random.default_rng(16)
        # smooth clean image: heavily box-averaged noise
        clean = box_mean(rand_img(rng, 48, 48), 6)
        sp = StreakParams(count=40, intensity=0.5, seed=3)
        rainy = compose_rainy(clean, synth_streaks(48, 48, sp))
        p = FilterParams(zeta=3, lam=1e-2, epsilon=1e-4, eta=0.05)
        _, d_clean = decompose(clean, p)
        _, d_rainy = decompose(rainy, p)
        assert np.mean(np.abs(d_rainy)) > np.mean(np.abs(d_clean))


class TestBandedEvaluation:
    """Large images are filtered in cache-resident row bands; the result
    must match the whole-image evaluation exactly (same math, different
    traversal)."""

    @pytest.mark.parametrize("shape", [(300, 200), (250, 220, 3), (400, 130)])
    def test_matches_direct(self, shape, monkeypatch):
        import derainkit.filters as filters_mod

        rng = np.random.default_rng(17)
        img = rng.uniform(size=shape)
        params = FilterParams(zeta=5)
        assert shape[0] * shape[1] > filters_mod._BAND_PIXEL_LIMIT
        banded = iwgif(img, img, params, clamp=False)
        monkeypatch.setattr(filters_mod, "_BAND_PIXEL_LIMIT", 10**9)
        direct = iwgif(img, img, params, clamp=False)
        assert np.max(np.abs(banded - direct)) < 1e-12

    def test_separate_guidance(self, monkeypatch):
        import derainkit.filters as filters_mod

        rng = np.random.default_rng(18)
        img = rng.uniform(size=(280, 210))
        guide = rng.uniform(size=(280, 210))
        params = FilterParams(zeta=4)
        banded = iwgif(img, guide, params, clamp=False)
        monkeypatch.setattr(filters_mod, "_BAND_PIXEL_LIMIT", 10**9)
        direct = iwgif(img, guide, params, clamp=False)
        assert np.max(np.abs(banded - direct)) < 1e-12
