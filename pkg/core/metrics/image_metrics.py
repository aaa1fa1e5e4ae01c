"""
Image Quality Metrics
PSNR, SSIM, the spectral metrics (SAM, RMSE, ERGAS, CC) and squared-error maps
"""
import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

import numpy as np
from scipy.signal import correlate2d

from core.config.config_manager import config
from core.validation.error_handler import ShapeError

logger = logging.getLogger(__name__)


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"Metric inputs differ in shape: {a.shape} vs {b.shape}")
    if a.ndim != 3:
        raise ShapeError(f"Metric inputs must be (C, H, W) cubes, got {a.shape}")


def psnr(a: np.ndarray, b: np.ndarray, peak: Optional[float] = None) -> float:
    """10 log10(peak^2 / MSE); +inf when the inputs are identical"""
    _check_pair(a, b)
    peak = float(peak if peak is not None else config.get('metrics.peak', 1.0))
    if peak <= 0:
        raise ValueError(f"Peak must be positive, got {peak}")
    mse = float(np.mean((np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)) ** 2))
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def gaussian_window(size: int, sigma: float) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-0.5 * (offsets / sigma) ** 2)
    window = np.outer(g, g)
    return window / window.sum()


def ssim(
    a: np.ndarray,
    b: np.ndarray,
    peak: Optional[float] = None,
    window: Optional[int] = None,
    sigma: Optional[float] = None,
    k1: Optional[float] = None,
    k2: Optional[float] = None
) -> float:
    """
    Mean SSIM over channels and all fully contained Gaussian windows.

    Defaults come from the metrics config section (11x11 window, sigma 1.5,
    K1 = 0.01, K2 = 0.03).
    """
    _check_pair(a, b)
    peak = float(peak if peak is not None else config.get('metrics.peak', 1.0))
    size = int(window if window is not None else config.get('metrics.ssim_window', 11))
    sigma = float(sigma if sigma is not None else config.get('metrics.ssim_sigma', 1.5))
    k1 = float(k1 if k1 is not None else config.get('metrics.ssim_k1', 0.01))
    k2 = float(k2 if k2 is not None else config.get('metrics.ssim_k2', 0.03))
    if min(a.shape[1:]) < size:
        raise ShapeError(f"SSIM needs spatial dims >= {size}, got {a.shape[1:]}")

    w = gaussian_window(size, sigma)
    c1 = (k1 * peak) ** 2
    c2 = (k2 * peak) ** 2
    scores = []
    for ca, cb in zip(np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)):
        mu_a = correlate2d(ca, w, mode='valid')
        mu_b = correlate2d(cb, w, mode='valid')
        sigma_a2 = correlate2d(ca * ca, w, mode='valid') - mu_a * mu_a
        sigma_b2 = correlate2d(cb * cb, w, mode='valid') - mu_b * mu_b
        sigma_ab = correlate2d(ca * cb, w, mode='valid') - mu_a * mu_b
        numerator = (2 * mu_a * mu_b + c1) * (2 * sigma_ab + c2)
        denominator = (mu_a * mu_a + mu_b * mu_b + c1) * (sigma_a2 + sigma_b2 + c2)
        scores.append(float(np.mean(numerator / denominator)))
    return float(np.mean(scores))


@dataclass
class SpectralMetrics:
    sam: float
    rmse: float
    ergas: float
    cc: float
    sam_skipped: int = 0
    ergas_skipped: int = 0
    cc_skipped: int = 0


def spectral_angles(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-pixel angle between spectra; NaN where either spectrum is all zero"""
    sa = a.reshape(a.shape[0], -1)
    sb = b.reshape(b.shape[0], -1)
    na = np.linalg.norm(sa, axis=0)
    nb = np.linalg.norm(sb, axis=0)
    valid = (na > 0) & (nb > 0)
    angles = np.full(sa.shape[1], np.nan)
    ua = sa[:, valid] / na[valid]
    ub = sb[:, valid] / nb[valid]
    # Half-angle form stays exact for identical spectra
    angles[valid] = 2.0 * np.arctan2(np.linalg.norm(ua - ub, axis=0), np.linalg.norm(ua + ub, axis=0))
    return angles


def spectral_metrics(reference: np.ndarray, test: np.ndarray, scale: int = 1) -> SpectralMetrics:
    """
    SAM (mean per-pixel spectral angle, radians), global RMSE, ERGAS and mean
    per-band Pearson CC. Degenerate pixels/bands are skipped and counted.
    """
    _check_pair(reference, test)
    if scale < 1:
        raise ValueError(f"Scale must be >= 1, got {scale}")
    a = np.asarray(reference, dtype=np.float64)
    b = np.asarray(test, dtype=np.float64)

    angles = spectral_angles(a, b)
    sam_skipped = int(np.isnan(angles).sum())
    if sam_skipped:
        logger.warning(f"SAM skipped {sam_skipped} pixels with all-zero spectra")
    sam = float(np.nanmean(angles)) if sam_skipped < angles.size else float('nan')

    rmse = float(np.sqrt(np.mean((a - b) ** 2)))

    band_rmse = np.sqrt(np.mean((a - b) ** 2, axis=(1, 2)))
    band_mean = np.mean(a, axis=(1, 2))
    usable = band_mean != 0
    ergas_skipped = int((~usable).sum())
    if ergas_skipped:
        logger.warning(f"ERGAS skipped {ergas_skipped} bands with zero mean")
    ratios = (band_rmse[usable] / band_mean[usable]) ** 2
    ergas = float(100.0 / scale * np.sqrt(np.mean(ratios))) if ratios.size else float('nan')

    da = a.reshape(a.shape[0], -1) - band_mean[:, None]
    db = b.reshape(b.shape[0], -1) - np.mean(b, axis=(1, 2))[:, None]
    norm = np.sqrt(np.sum(da * da, axis=1) * np.sum(db * db, axis=1))
    valid = norm > 0
    cc_skipped = int((~valid).sum())
    if cc_skipped:
        logger.warning(f"CC skipped {cc_skipped} constant bands")
    cc_values = np.sum(da * db, axis=1)[valid] / norm[valid]
    cc = float(np.mean(cc_values)) if cc_values.size else float('nan')

    return SpectralMetrics(sam, rmse, ergas, cc, sam_skipped, ergas_skipped, cc_skipped)


def mse_map(a: np.ndarray, b: np.ndarray, axis: str = 'band') -> np.ndarray:
    """
    Squared error reduced over the complementary axes.

    axis='band' -> (C,) per-band MSE; axis='pixel' -> (H, W) per-pixel MSE over bands
    """
    _check_pair(a, b)
    squared = (np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)) ** 2
    if axis == 'band':
        return squared.mean(axis=(1, 2))
    if axis == 'pixel':
        return squared.mean(axis=0)
    raise ValueError(f"axis must be 'band' or 'pixel', got {axis!r}")


def per_band_rmse(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sqrt(mse_map(a, b, 'band'))


@dataclass
class MetricReport:
    psnr: float
    ssim: float
    sam: float
    rmse: float
    ergas: float
    cc: float

    def to_row(self) -> Dict[str, Any]:
        """Flat CSV record: PSNR as text ("inf" for identical inputs), NaN as null"""
        row: Dict[str, Any] = {key: (None if isinstance(value, float) and math.isnan(value) else value)
                               for key, value in asdict(self).items()}
        row['psnr'] = 'inf' if math.isinf(self.psnr) else repr(float(self.psnr))
        return row


def evaluate_pair(reference: np.ndarray, test: np.ndarray, scale: int = 1,
                  peak: Optional[float] = None) -> MetricReport:
    spectral = spectral_metrics(reference, test, scale)
    return MetricReport(
        psnr=psnr(reference, test, peak),
        ssim=ssim(reference, test, peak),
        sam=spectral.sam,
        rmse=spectral.rmse,
        ergas=spectral.ergas,
        cc=spectral.cc,
    )
