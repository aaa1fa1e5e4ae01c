"""
Inference Handlers
Handler for the infer command
"""
import logging
from typing import Any, Dict, Optional

from cli.command_schemas import COMMAND_SCHEMAS
from cli.file_utils import load_cube, require_file, save_cube
from core.degradation.kernels import kernel_stats
from core.export.checkpoint import load_checkpoint
from core.export.csv_exporter import CSVExporter
from core.export.kernel_csv import read_kernel_csv, write_kernel_csv
from core.export.report_schemas import STAGE_DIAGNOSTICS_SCHEMA
from core.unfolding.pipeline import run_unfolding, stage_diagnostics
from core.validation.error_handler import ShapeError

logger = logging.getLogger(__name__)


def register_inference_handlers(registry):
    """Register all inference handlers"""

    csv_exporter = CSVExporter()

    # infer
    def infer(
        model: str,
        in_path: str,
        out: str,
        scale: Optional[int] = None,
        kernel_out: Optional[str] = None,
        stages_out: Optional[str] = None,
        gt: Optional[str] = None,
        kernel_gt: Optional[str] = None
    ) -> Dict[str, Any]:
        """Run every unfolding stage on Y and write X_hat (plus kernel and diagnostics)"""
        net, meta = load_checkpoint(require_file(model))
        y = load_cube(in_path)
        scale = scale if scale is not None else net.scale

        stages = run_unfolding(y, net, scale)
        x_hat = stages[-1].X.value
        k_hat = stages[-1].K.value
        save_cube(out, x_hat)
        if kernel_out:
            write_kernel_csv(kernel_out, k_hat)

        if stages_out:
            x_gt = load_cube(gt) if gt else None
            if x_gt is not None and x_gt.shape != x_hat.shape:
                raise ShapeError(f"Ground truth {x_gt.shape} does not match the output {x_hat.shape}")
            k_gt = read_kernel_csv(require_file(kernel_gt)) if kernel_gt else None
            rows = stage_diagnostics(stages, x_gt=x_gt, k_gt=k_gt, y=y, scale=scale)
            export = csv_exporter.export(rows, stages_out, schema=STAGE_DIAGNOSTICS_SCHEMA)
            if not export['success']:
                return export

        logger.info(f"Super-resolved {y.shape} -> {x_hat.shape} with {net.num_stages} stages")
        return {
            'success': True,
            'output_path': out,
            'kernel_path': kernel_out,
            'stages_path': stages_out,
            'input_shape': list(y.shape),
            'output_shape': list(x_hat.shape),
            'stages': net.num_stages,
            'backbone': meta.get('backbone'),
            'kernel': kernel_stats(k_hat)
        }

    schema = COMMAND_SCHEMAS['infer']
    registry.register(
        'infer',
        infer,
        schema['category'],
        schema['description'],
        schema['parameters'],
        schema.get('required', [])
    )
