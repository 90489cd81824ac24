import math

import numpy as np
import pytest

from derainkit.metrics import MetricReport, psnr, ssim

from oracles import naive_ssim


class TestPsnr:
    def test_identical_is_inf(self):
        x = np.random.default_rng(0).uniform(size=(16, 16))
        assert math.isinf(psnr(x, x))

    def test_uniform_one_lsb(self):
        x = np.full((16, 16), 0.5)
        y = x + 1.0 / 255.0
        assert psnr(x, y) == pytest.approx(20 * math.log10(255), abs=1e-3)

    def test_matches_loop_mse(self):
        rng = np.random.default_rng(1)
        a, b = rng.uniform(size=(8, 8)), rng.uniform(size=(8, 8))
        mse = sum(
            (a.flat[i] - b.flat[i]) ** 2 for i in range(a.size)
        ) / a.size
        assert psnr(a, b) == pytest.approx(10 * math.log10(1 / mse), abs=1e-9)

    def test_symmetry(self):
        rng = np.random.default_rng(2)
        a, b = rng.uniform(size=(8, 8, 3)), rng.uniform(size=(8, 8, 3))
        assert psnr(a, b) == pytest.approx(psnr(b, a), abs=1e-9)

    def test_decreases_with_noise(self):
        rng = np.random.default_rng(3)
        x = rng.uniform(0.3, 0.7, size=(16, 16))
        noise = rng.uniform(-1, 1, size=(16, 16))
        values = [psnr(x, np.clip(x + amp * noise, 0, 1)) for amp in (0.01, 0.05, 0.2)]
        assert values[0] > values[1] > values[2]

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape mismatch"):
            psnr(np.zeros((4, 4)), np.zeros((5, 5)))


class TestSsim:
    def test_identical_is_one(self):
        x = np.random.default_rng(4).uniform(size=(16, 16))
        assert ssim(x, x) == pytest.approx(1.0, abs=1e-9)

    def test_constant_images_closed_form(self):
        a = np.full((16, 16), 0.5)
        b = np.full((16, 16), 0.25)
        expected = (2 * 0.5 * 0.25 + 1e-4) / (0.5**2 + 0.25**2 + 1e-4)
        assert ssim(a, b) == pytest.approx(expected, abs=1e-3)

    def test_matches_sliding_window_oracle(self):
        rng = np.random.default_rng(5)
        a, b = rng.uniform(size=(14, 15)), rng.uniform(size=(14, 15))
        assert ssim(a, b) == pytest.approx(naive_ssim(a, b), abs=1e-6)

    def test_matches_oracle_color(self):
        rng = np.random.default_rng(6)
        a, b = rng.uniform(size=(13, 13, 3)), rng.uniform(size=(13, 13, 3))
        assert ssim(a, b) == pytest.approx(naive_ssim(a, b), abs=1e-6)

    def test_symmetry(self):
        rng = np.random.default_rng(7)
        a, b = rng.uniform(size=(16, 16)), rng.uniform(size=(16, 16))
        assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-9)

    def test_self_is_maximum(self):
        rng = np.random.default_rng(8)
        x = rng.uniform(0.2, 0.8, size=(16, 16))
        for amp in (0.01, 0.1, 0.3):
            pert = np.clip(x + amp * rng.uniform(-1, 1, size=x.shape), 0, 1)
            assert ssim(x, pert) < 1.0

    def test_too_small(self):
        with pytest.raises(ValueError, match="too small"):
            ssim(np.zeros((8, 8)), np.zeros((8, 8)))


class TestMetricReport:
    def test_means_and_csv(self):
        r = MetricReport()
        r.add("a", 30.0, 0.9)
        r.add("b", 20.0, 0.7)
        assert r.mean_psnr_db == pytest.approx(25.0)
        assert r.mean_ssim == pytest.approx(0.8)
        lines = r.to_csv().strip().splitlines()
        assert lines[0] == "name,psnr_db,ssim"
        assert len(lines) == 4
        assert lines[-1].startswith("mean,")

    def test_inf_serialized(self):
        r = MetricReport()
        r.add("same", math.inf, 1.0)
        assert "inf" in r.to_csv().splitlines()[1]
