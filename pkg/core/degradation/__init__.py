"""Degradation module: Gaussian kernels, blur/downsample operators, noise, resampling and presets."""

from core.degradation.operators import (
    conv_down, conv_up_transpose, fold_replicate, kernel_correlate, replicate_pad
)
from core.degradation.kernels import (
    delta_kernel, gaussian_kernel, gaussian_sep_init, is_simplex, kernel_mse, kernel_stats, validate_kernel
)
from core.degradation.noise import awgn
from core.degradation.resampling import bicubic_upsample, cubic_weight
from core.degradation.degrade import DegradationSpec, default_kernel_size, degrade
from core.degradation.presets import DegradationDistribution, PresetLibrary, sample_spec

__all__ = [
    'conv_down', 'conv_up_transpose', 'fold_replicate', 'kernel_correlate',
    'replicate_pad', 'delta_kernel', 'gaussian_kernel', 'gaussian_sep_init', 'is_simplex',
    'kernel_mse', 'kernel_stats', 'validate_kernel', 'awgn', 'bicubic_upsample', 'cubic_weight',
    'DegradationSpec', 'default_kernel_size', 'degrade', 'DegradationDistribution', 'PresetLibrary',
    'sample_spec'
]
