"""
Training Handlers
Handlers for the train and compare-backbones commands
"""
import logging
import os
from typing import Any, Dict, Optional

from cli.command_schemas import COMMAND_SCHEMAS
from cli.file_utils import require_file
from core.config.config_manager import config
from core.config.config_schema import validate_config
from core.export.atomic import write_json
from core.export.checkpoint import load_checkpoint, save_checkpoint
from core.export.csv_exporter import CSVExporter
from core.export.report_schemas import BACKBONE_CURVES_SCHEMA, SIGMA_SWEEP_SCHEMA, TRAINING_LOG_SCHEMA
from core.training.trainer import TrainConfig, compare_backbones, evaluate_model, train
from core.validation.error_handler import TrainingAborted, UsageError

logger = logging.getLogger(__name__)

PARAM_MATCH_TOLERANCE = 0.10


def resolve_config(sections: Dict[str, Dict[str, Any]]) -> Dict[str, Any]:
    """Current config with the non-None command-line overrides merged in, validated"""
    override = {section: {key: value for key, value in values.items() if value is not None}
                for section, values in sections.items()}
    return validate_config(config.merged_with(override))


def register_training_handlers(registry):
    """Register all training handlers"""

    csv_exporter = CSVExporter()

    # train
    def train_model(
        out: str,
        log_out: Optional[str] = None,
        steps: Optional[int] = None,
        seed: Optional[int] = None,
        scale: Optional[int] = None,
        stages: Optional[int] = None,
        backbone: Optional[str] = None,
        preset: Optional[str] = None,
        resume: Optional[str] = None
    ) -> Dict[str, Any]:
        """Train (optionally continuing a checkpoint), then write the checkpoint and the training log"""
        cfg = resolve_config({
            'training': {'steps': steps, 'seed': seed, 'scale': scale, 'preset': preset},
            'model': {'stages': stages, 'backbone': backbone}
        })
        train_cfg = TrainConfig.from_config(cfg)

        model, rng_state = None, None
        if resume:
            model, meta = load_checkpoint(require_file(resume))
            if model.settings.scale != train_cfg.scale:
                raise UsageError(f"Checkpoint {resume} was trained at scale {model.settings.scale}, "
                                 f"training.scale is {train_cfg.scale}")
            rng_state = meta.get('rng_state')
            logger.info(f"Resuming from {resume}")

        try:
            result = train(cfg, model=model, rng_state=rng_state)
        except TrainingAborted as e:
            dump_path = f"{out}.abort.json"
            write_json(dump_path, {'message': str(e), 'step': e.step, 'stage': e.stage, 'dump': e.dump})
            logger.error(f"Training aborted at step {e.step}; diagnostic dump written to {dump_path}")
            return {
                'success': False,
                'error': {'type': 'TrainingAborted', 'message': str(e), 'step': e.step, 'stage': e.stage},
                'dump_path': dump_path
            }

        save_checkpoint(out, result.model, train_cfg.to_dict(), rng_state=result.rng_state)

        if log_out:
            export = csv_exporter.export(result.log, log_out, schema=TRAINING_LOG_SCHEMA)
            if not export['success']:
                return export

        evaluation = None
        if result.holdout:
            evaluation = {k: v for k, v in evaluate_model(result.model, result.holdout).items() if k != 'rows'}

        final = result.log[-1] if result.log else {}
        return {
            'success': True,
            'checkpoint_path': out,
            'log_path': log_out,
            'steps': len(result.log),
            'final_loss': final.get('loss'),
            'final_loss_ema': final.get('loss_ema'),
            'param_count': result.model.param_count(),
            'evaluation': evaluation
        }

    schema = COMMAND_SCHEMAS['train']
    registry.register(
        'train',
        train_model,
        schema['category'],
        schema['description'],
        schema['parameters'],
        schema.get('required', [])
    )

    # compare-backbones
    def compare(
        out_dir: str,
        steps: Optional[int] = None,
        seed: Optional[int] = None,
        sweep_preset: str = 'hyperspectral'
    ) -> Dict[str, Any]:
        """Paired KAN / MLP K-Net training with kernel-MSE curves and a sigma sweep"""
        cfg = resolve_config({'training': {'steps': steps, 'seed': seed}})
        comparison = compare_backbones(cfg, sweep_preset=sweep_preset)

        ratio = comparison['param_counts']['ratio']
        if abs(ratio - 1.0) > PARAM_MATCH_TOLERANCE:
            logger.warning(f"K-Net parameter counts differ by more than {PARAM_MATCH_TOLERANCE:.0%}: ratio {ratio:.3f}")

        os.makedirs(out_dir, exist_ok=True)
        exported = csv_exporter.export_multiple(
            {'curves': comparison['curves'], 'sigma_sweep': comparison['sigma_sweep']},
            out_dir,
            schemas={'curves': BACKBONE_CURVES_SCHEMA, 'sigma_sweep': SIGMA_SWEEP_SCHEMA}
        )
        if not exported['success']:
            return exported

        summary_path = os.path.join(out_dir, 'summary.json')
        write_json(summary_path, {
            'param_counts': comparison['param_counts'],
            'evaluation': comparison['evaluation'],
            'steps': len(comparison['curves']),
            'sweep_preset': sweep_preset
        })

        return {
            'success': True,
            'output_dir': out_dir,
            'files': [f['path'] for f in exported['files_exported']] + [summary_path],
            'param_counts': comparison['param_counts']
        }

    schema = COMMAND_SCHEMAS['compare-backbones']
    registry.register(
        'compare-backbones',
        compare,
        schema['category'],
        schema['description'],
        schema['parameters'],
        schema.get('required', [])
    )
