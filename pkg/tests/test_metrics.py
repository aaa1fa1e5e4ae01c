"""
Tests for image quality metrics against naive per-definition oracles
"""
import math

import numpy as np
import pytest

from core.metrics.image_metrics import (
    MetricReport, evaluate_pair, gaussian_window, mse_map, per_band_rmse, psnr, spectral_angles,
    spectral_metrics, ssim
)
from core.validation.error_handler import ShapeError


def naive_psnr(a, b, peak=1.0):
    total = 0.0
    for value in (a - b).ravel():
        total += value * value
    return 10.0 * math.log10(peak * peak / (total / a.size))


def naive_ssim(a, b, size=11, sigma=1.5, peak=1.0, k1=0.01, k2=0.03):
    w = gaussian_window(size, sigma)
    c1, c2 = (k1 * peak) ** 2, (k2 * peak) ** 2
    channel_scores = []
    for ca, cb in zip(a, b):
        scores = []
        for i in range(ca.shape[0] - size + 1):
            for j in range(ca.shape[1] - size + 1):
                pa = ca[i:i + size, j:j + size]
                pb = cb[i:i + size, j:j + size]
                mu_a, mu_b = np.sum(w * pa), np.sum(w * pb)
                var_a = np.sum(w * (pa - mu_a) ** 2)
                var_b = np.sum(w * (pb - mu_b) ** 2)
                cov = np.sum(w * (pa - mu_a) * (pb - mu_b))
                scores.append(((2 * mu_a * mu_b + c1) * (2 * cov + c2))
                              / ((mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)))
        channel_scores.append(np.mean(scores))
    return float(np.mean(channel_scores))


def naive_spectral(a, b, scale=1):
    channels, height, width = a.shape
    angles = []
    for i in range(height):
        for j in range(width):
            u, v = a[:, i, j], b[:, i, j]
            cosine = np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v))
            angles.append(math.acos(min(1.0, max(-1.0, cosine))))
    rmse = math.sqrt(np.mean((a - b) ** 2))
    ratios = [np.mean((a[c] - b[c]) ** 2) / np.mean(a[c]) ** 2 for c in range(channels)]
    ergas = 100.0 / scale * math.sqrt(np.mean(ratios))
    cc = np.mean([np.corrcoef(a[c].ravel(), b[c].ravel())[0, 1] for c in range(channels)])
    return float(np.mean(angles)), rmse, ergas, float(cc)


class TestPsnr:

    def test_known_value(self):
        a = np.zeros((1, 4, 4))
        b = np.full((1, 4, 4), 0.5)
        assert psnr(a, b, peak=1.0) == pytest.approx(6.0206, abs=1e-4)

    def test_identical_is_infinite(self, rng):
        a = rng.random((3, 8, 8))
        assert psnr(a, a.copy()) == math.inf

    def test_symmetric(self, rng):
        a, b = rng.random((2, 3, 8, 8))
        assert psnr(a, b) == psnr(b, a)

    def test_peak_scaling(self, rng):
        a, b = rng.random((2, 1, 6, 6))
        assert psnr(a, b, peak=2.0) == pytest.approx(psnr(a, b, peak=1.0) + 20 * math.log10(2.0))

    def test_invalid_inputs(self, rng):
        with pytest.raises(ShapeError):
            psnr(np.zeros((1, 4, 4)), np.zeros((1, 4, 5)))
        with pytest.raises(ShapeError):
            psnr(np.zeros((4, 4)), np.zeros((4, 4)))
        with pytest.raises(ValueError):
            psnr(np.zeros((1, 2, 2)), np.ones((1, 2, 2)), peak=0.0)


class TestSsim:

    def test_identical_is_one(self, rng):
        a = rng.random((3, 16, 16))
        assert ssim(a, a.copy()) == pytest.approx(1.0, abs=1e-12)

    def test_symmetric(self, rng):
        a, b = rng.random((2, 2, 16, 16))
        assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-14)

    def test_inverted_image_below_one(self, rng):
        a = rng.random((1, 16, 16))
        assert ssim(a, 1.0 - a) < 1.0

    def test_matches_windowed_formula(self, rng):
        for _ in range(3):
            a = rng.random((2, 14, 13))
            b = np.clip(a + 0.1 * rng.normal(size=a.shape), 0, 1)
            assert ssim(a, b) == pytest.approx(naive_ssim(a, b), abs=1e-6)

    def test_small_window_override(self, rng):
        a, b = rng.random((2, 1, 8, 8))
        assert ssim(a, b, window=3, sigma=1.0) == pytest.approx(naive_ssim(a, b, size=3, sigma=1.0), abs=1e-6)

    def test_image_smaller_than_window(self):
        with pytest.raises(ShapeError):
            ssim(np.zeros((1, 8, 8)), np.zeros((1, 8, 8)))


class TestSpectralMetrics:

    def test_orthogonal_spectra(self):
        a = np.zeros((2, 3, 3))
        b = np.zeros((2, 3, 3))
        a[0] = 1.0
        b[1] = 1.0
        np.testing.assert_allclose(spectral_angles(a, b), np.full(9, math.pi / 2), atol=1e-15)

    def test_identical_spectra_have_zero_angle(self, rng):
        a = rng.random((4, 5, 5))
        np.testing.assert_array_equal(spectral_angles(a, a.copy()), np.zeros(25))

    def test_sam_is_scale_invariant(self, rng):
        a, b = rng.random((2, 3, 6, 6)) + 0.1
        assert spectral_metrics(a, 3.5 * b).sam == pytest.approx(spectral_metrics(a, b).sam, abs=1e-12)

    def test_cc_is_affine_invariant(self, rng):
        a, b = rng.random((2, 3, 6, 6))
        assert spectral_metrics(a, 2.0 * b + 0.3).cc == pytest.approx(spectral_metrics(a, b).cc, abs=1e-12)

    def test_zero_spectra_skipped(self, rng):
        a = rng.random((3, 4, 4)) + 0.1
        b = a.copy()
        b[:, 0, 0] = 0.0
        result = spectral_metrics(a, b)
        assert result.sam_skipped == 1
        assert result.sam == pytest.approx(0.0, abs=1e-12)

    def test_constant_band_skipped_for_cc(self, rng):
        a = rng.random((2, 4, 4))
        b = a.copy()
        b[1] = 0.5
        result = spectral_metrics(a, b)
        assert result.cc_skipped == 1
        assert result.cc == pytest.approx(1.0)

    def test_ergas_scale(self, rng):
        a, b = rng.random((2, 3, 6, 6)) + 0.1
        assert spectral_metrics(a, b, scale=4).ergas == pytest.approx(spectral_metrics(a, b, scale=1).ergas / 4)
        with pytest.raises(ValueError):
            spectral_metrics(a, b, scale=0)


class TestOracles:

    def test_fifty_random_pairs(self, rng):
        for _ in range(50):
            a = rng.uniform(0.05, 1.0, size=(3, 16, 16))
            b = np.clip(a + 0.05 * rng.normal(size=a.shape), 0.01, 1.0)
            sam, rmse, ergas, cc = naive_spectral(a, b, scale=2)
            result = spectral_metrics(a, b, scale=2)
            assert psnr(a, b) == pytest.approx(naive_psnr(a, b), abs=1e-9)
            assert result.sam == pytest.approx(sam, abs=1e-6)
            assert result.rmse == pytest.approx(rmse, abs=1e-9)
            assert result.ergas == pytest.approx(ergas, abs=1e-6)
            assert result.cc == pytest.approx(cc, abs=1e-9)

    def test_ssim_oracle_sample(self, rng):
        for _ in range(5):
            a = rng.random((3, 16, 16))
            b = np.clip(a + 0.05 * rng.normal(size=a.shape), 0, 1)
            assert ssim(a, b) == pytest.approx(naive_ssim(a, b), abs=1e-6)


class TestErrorMaps:

    def test_band_and_pixel_maps(self, rng):
        a, b = rng.random((2, 3, 4, 5))
        squared = (a - b) ** 2
        np.testing.assert_allclose(mse_map(a, b, 'band'), [squared[c].mean() for c in range(3)])
        np.testing.assert_allclose(mse_map(a, b, 'pixel'), squared.mean(axis=0))
        np.testing.assert_allclose(per_band_rmse(a, b), np.sqrt(mse_map(a, b)))

    def test_unknown_axis(self, rng):
        a = rng.random((1, 2, 2))
        with pytest.raises(ValueError):
            mse_map(a, a, 'row')


class TestMetricReport:

    def test_row_for_identical_inputs(self, rng):
        a = rng.random((3, 16, 16)) + 0.1
        row = evaluate_pair(a, a.copy()).to_row()
        assert row['psnr'] == 'inf'
        assert row['ssim'] == pytest.approx(1.0)
        assert row['sam'] == pytest.approx(0.0, abs=1e-12)
        assert row['rmse'] == 0.0

    def test_row_finite_psnr_is_text(self):
        report = MetricReport(psnr=31.25, ssim=0.9, sam=0.1, rmse=0.02, ergas=1.5, cc=0.99)
        row = report.to_row()
        assert row['psnr'] == '31.25'
        assert float(row['psnr']) == 31.25

    def test_nan_becomes_null(self):
        report = MetricReport(psnr=20.0, ssim=0.5, sam=float('nan'), rmse=0.1, ergas=float('nan'), cc=0.3)
        row = report.to_row()
        assert row['sam'] is None and row['ergas'] is None
        assert row['cc'] == 0.3
