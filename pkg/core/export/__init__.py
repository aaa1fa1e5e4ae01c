"""Export module for cubes, images, kernels, checkpoints and CSV reports"""
from .atomic import atomic_path, atomic_write, dumps_json, write_json, read_json
from .cube_file import MAGIC, HEADER_DTYPE, read_cube, write_cube
from .png_io import read_png, write_png, to_uint8
from .kernel_csv import read_kernel_csv, write_kernel_csv
from .checkpoint import FORMAT_VERSION, save_checkpoint, load_checkpoint
from .csv_exporter import CSVExporter, polars_schema, to_frame, read_report
from .report_schemas import (
    TRAINING_LOG_SCHEMA,
    STAGE_DIAGNOSTICS_SCHEMA,
    METRICS_SCHEMA,
    PER_BAND_SCHEMA,
    BACKBONE_CURVES_SCHEMA,
    SIGMA_SWEEP_SCHEMA,
)

__all__ = [
    'atomic_path', 'atomic_write', 'dumps_json', 'write_json', 'read_json',
    'MAGIC', 'HEADER_DTYPE', 'read_cube', 'write_cube',
    'read_png', 'write_png', 'to_uint8',
    'read_kernel_csv', 'write_kernel_csv',
    'FORMAT_VERSION', 'save_checkpoint', 'load_checkpoint',
    'CSVExporter', 'polars_schema', 'to_frame', 'read_report',
    'TRAINING_LOG_SCHEMA', 'STAGE_DIAGNOSTICS_SCHEMA', 'METRICS_SCHEMA',
    'PER_BAND_SCHEMA', 'BACKBONE_CURVES_SCHEMA', 'SIGMA_SWEEP_SCHEMA',
]
