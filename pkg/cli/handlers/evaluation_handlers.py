"""
Evaluation Handlers
Handlers for the eval and inspect-kernel commands
"""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Tuple

from cli.command_schemas import COMMAND_SCHEMAS
from cli.file_utils import list_cube_files, load_cube, require_file
from core.config.config_manager import config
from core.degradation.kernels import is_simplex, kernel_mse, kernel_stats
from core.export.csv_exporter import CSVExporter
from core.export.kernel_csv import read_kernel_csv
from core.export.report_schemas import METRICS_SCHEMA, PER_BAND_SCHEMA
from core.metrics.image_metrics import evaluate_pair, per_band_rmse
from core.validation.error_handler import UsageError

logger = logging.getLogger(__name__)


def _pairs(ref: Optional[str], test: Optional[str], ref_dir: Optional[str],
           test_dir: Optional[str]) -> List[Tuple[str, str, str]]:
    """(name, reference path, test path) triples in file-name order"""
    single = ref is not None or test is not None
    batch = ref_dir is not None or test_dir is not None
    if single == batch:
        raise UsageError("Pass either --ref/--test or --ref-dir/--test-dir")
    if single:
        if ref is None or test is None:
            raise UsageError("--ref and --test must be given together")
        return [(os.path.basename(test), ref, test)]
    if ref_dir is None or test_dir is None:
        raise UsageError("--ref-dir and --test-dir must be given together")
    names = list_cube_files(ref_dir)
    if not names:
        raise UsageError(f"No cube files in {ref_dir}")
    return [(name, os.path.join(ref_dir, name), require_file(os.path.join(test_dir, name))) for name in names]


def register_evaluation_handlers(registry):
    """Register all evaluation handlers"""

    csv_exporter = CSVExporter()

    # eval
    def evaluate(
        ref: Optional[str] = None,
        test: Optional[str] = None,
        ref_dir: Optional[str] = None,
        test_dir: Optional[str] = None,
        scale: int = 1,
        peak: Optional[float] = None,
        out: Optional[str] = None,
        per_band_out: Optional[str] = None
    ) -> Dict[str, Any]:
        """All six metrics per pair; directory pairs are scored in parallel, rows stay in name order"""
        pairs = _pairs(ref, test, ref_dir, test_dir)

        def score(item: Tuple[str, str, str]) -> Tuple[Dict[str, Any], List[Dict[str, Any]]]:
            name, ref_path, test_path = item
            reference, candidate = load_cube(ref_path), load_cube(test_path)
            report = evaluate_pair(reference, candidate, scale, peak)
            bands = [{'file': name, 'band': band, 'rmse': float(value)}
                     for band, value in enumerate(per_band_rmse(reference, candidate))]
            return {'file': name, **report.to_row()}, bands

        workers = min(config.thread_count(), len(pairs))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                scored = list(pool.map(score, pairs))
        else:
            scored = [score(item) for item in pairs]
        rows = [row for row, _ in scored]
        band_rows = [band for _, bands in scored for band in bands]
        logger.info(f"Evaluated {len(rows)} pairs with {workers} workers")

        for path, data, schema in ((out, rows, METRICS_SCHEMA), (per_band_out, band_rows, PER_BAND_SCHEMA)):
            if path:
                export = csv_exporter.export(data, path, schema=schema)
                if not export['success']:
                    return export

        return {
            'success': True,
            'count': len(rows),
            'metrics_path': out,
            'per_band_path': per_band_out,
            'rows': rows
        }

    schema = COMMAND_SCHEMAS['eval']
    registry.register(
        'eval',
        evaluate,
        schema['category'],
        schema['description'],
        schema['parameters'],
        schema.get('required', [])
    )

    # inspect-kernel
    def inspect_kernel(kernel: str, ref: Optional[str] = None) -> Dict[str, Any]:
        """Statistics of a kernel CSV, plus its MSE to a reference kernel"""
        estimate = read_kernel_csv(require_file(kernel))
        result = {
            'success': True,
            'kernel_path': kernel,
            'is_simplex': is_simplex(estimate),
            'stats': kernel_stats(estimate)
        }
        if ref:
            reference = read_kernel_csv(require_file(ref))
            result['reference_path'] = ref
            result['kernel_mse'] = kernel_mse(estimate, reference)
            result['reference_stats'] = kernel_stats(reference)
        return result

    schema = COMMAND_SCHEMAS['inspect-kernel']
    registry.register(
        'inspect-kernel',
        inspect_kernel,
        schema['category'],
        schema['description'],
        schema['parameters'],
        schema.get('required', [])
    )
