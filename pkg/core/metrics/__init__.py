"""Metrics module: PSNR, SSIM, SAM, RMSE, ERGAS, CC and error maps."""

from core.metrics.image_metrics import (
    MetricReport, SpectralMetrics, evaluate_pair, gaussian_window, mse_map, per_band_rmse, psnr,
    spectral_angles, spectral_metrics, ssim
)

__all__ = [
    'MetricReport', 'SpectralMetrics', 'evaluate_pair', 'gaussian_window', 'mse_map', 'per_band_rmse',
    'psnr', 'spectral_angles', 'spectral_metrics', 'ssim'
]
