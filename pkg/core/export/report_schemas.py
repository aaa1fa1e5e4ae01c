"""
Report Schemas
pandera (polars backend) schemas for every CSV report the tools write
"""
import pandera.polars as pa
import polars as pl

_FINITE_OR_INF = r'^(inf|-?\d+(\.\d+)?([eE][-+]?\d+)?)$'

TRAINING_LOG_SCHEMA = pa.DataFrameSchema(
    {
        'step': pa.Column(pl.Int64, pa.Check.ge(1)),
        'loss': pa.Column(pl.Float64, pa.Check.ge(0)),
        'loss_K': pa.Column(pl.Float64, pa.Check.ge(0)),
        'loss_X': pa.Column(pl.Float64, pa.Check.ge(0)),
        'kernel_mse': pa.Column(pl.Float64, pa.Check.ge(0)),
        'lr': pa.Column(pl.Float64, pa.Check.gt(0)),
        'seconds': pa.Column(pl.Float64, pa.Check.ge(0)),
        'loss_ema': pa.Column(pl.Float64, pa.Check.ge(0)),
    },
    strict=True,
    name='training_log',
)

STAGE_DIAGNOSTICS_SCHEMA = pa.DataFrameSchema(
    {
        'stage': pa.Column(pl.Int64, pa.Check.ge(1)),
        'residual_rmse': pa.Column(pl.Float64, pa.Check.ge(0), nullable=True),
        'kernel_min': pa.Column(pl.Float64, pa.Check.ge(0)),
        'kernel_sum': pa.Column(pl.Float64, pa.Check.in_range(1 - 1e-9, 1 + 1e-9)),
        'mse_O': pa.Column(pl.Float64, pa.Check.ge(0), nullable=True),
        'mse_S': pa.Column(pl.Float64, pa.Check.ge(0), nullable=True),
        'mse_X': pa.Column(pl.Float64, pa.Check.ge(0), nullable=True),
        'kernel_mse': pa.Column(pl.Float64, pa.Check.ge(0), nullable=True),
    },
    strict=True,
    name='stage_diagnostics',
)

METRICS_SCHEMA = pa.DataFrameSchema(
    {
        'file': pa.Column(pl.Utf8),
        'psnr': pa.Column(pl.Utf8, pa.Check.str_matches(_FINITE_OR_INF)),
        'ssim': pa.Column(pl.Float64, pa.Check.le(1.0)),
        'sam': pa.Column(pl.Float64, pa.Check.in_range(0.0, 3.141592653589793), nullable=True),
        'rmse': pa.Column(pl.Float64, pa.Check.ge(0)),
        'ergas': pa.Column(pl.Float64, pa.Check.ge(0), nullable=True),
        'cc': pa.Column(pl.Float64, pa.Check.in_range(-1.0 - 1e-12, 1.0 + 1e-12), nullable=True),
    },
    strict=True,
    name='metrics',
)

PER_BAND_SCHEMA = pa.DataFrameSchema(
    {
        'file': pa.Column(pl.Utf8),
        'band': pa.Column(pl.Int64, pa.Check.ge(0)),
        'rmse': pa.Column(pl.Float64, pa.Check.ge(0)),
    },
    strict=True,
    name='per_band_rmse',
)

BACKBONE_CURVES_SCHEMA = pa.DataFrameSchema(
    {
        'step': pa.Column(pl.Int64, pa.Check.ge(1)),
        'kernel_mse_kan': pa.Column(pl.Float64, pa.Check.ge(0)),
        'kernel_mse_mlp': pa.Column(pl.Float64, pa.Check.ge(0)),
    },
    strict=True,
    name='backbone_curves',
)

SIGMA_SWEEP_SCHEMA = pa.DataFrameSchema(
    {
        'sigma': pa.Column(pl.Float64, pa.Check.gt(0)),
        'kernel_mse_kan': pa.Column(pl.Float64, pa.Check.ge(0)),
        'kernel_mse_mlp': pa.Column(pl.Float64, pa.Check.ge(0)),
    },
    strict=True,
    name='sigma_sweep',
)
