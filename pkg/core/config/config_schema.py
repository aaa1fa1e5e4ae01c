"""
Config Schema Module
Declarative schema for experiment configuration and its validator
"""
import logging
from typing import Any, Dict, List

from core.validation.error_handler import ConfigError

logger = logging.getLogger(__name__)

_NUMBER = ('integer', 'number')

CONFIG_SCHEMA: Dict[str, Any] = {
    'type': 'object',
    'properties': {
        'app': {
            'type': 'object',
            'properties': {
                'name': {'type': 'string'},
                'version': {'type': 'string'}
            }
        },
        'compute': {
            'type': 'object',
            'properties': {
                'dtype': {'type': 'string', 'enum': ['float64', 'float32']}
            }
        },
        'kan': {
            'type': 'object',
            'properties': {
                'grid_range': {'type': 'array', 'items': {'type': 'number'}, 'length': 2},
                'grid_size': {'type': 'integer', 'minimum': 1},
                'degree': {'type': 'integer', 'minimum': 1, 'maximum': 5},
                'coef_std': {'type': 'number', 'minimum': 0}
            }
        },
        'degradation': {
            'type': 'object',
            'properties': {
                'kernel_sizes': {'type': 'object', 'values': {'type': 'integer', 'minimum': 1, 'odd': True}},
                'sigma_range': {'type': 'array', 'items': {'type': 'number', 'exclusiveMinimum': 0}, 'length': 2},
                'theta_range': {'type': 'array', 'items': {'type': 'number'}, 'length': 2},
                'noise_max': {'type': 'number', 'minimum': 0},
                'presets_dir': {'type': 'string'},
                'default_preset': {'type': 'string'}
            }
        },
        'model': {
            'type': 'object',
            'properties': {
                'stages': {'type': 'integer', 'minimum': 1, 'maximum': 8},
                'step_size_init': {'type': 'number', 'exclusiveMinimum': 0},
                'backbone': {'type': 'string', 'enum': ['kan', 'mlp']},
                'knet_depth': {'type': 'integer', 'minimum': 1, 'maximum': 6},
                'onet_2d_sets': {'type': 'integer', 'minimum': 0, 'maximum': 8},
                'onet_channel_plan': {'type': 'string', 'enum': ['C', 'C-2C-C', 'C-2C-4C-2C-C']},
                'snet_enabled': {'type': 'boolean'},
                'snet_width_factor': {'type': 'integer', 'minimum': 1, 'maximum': 8}
            }
        },
        'training': {
            'type': 'object',
            'properties': {
                'channels': {'type': 'integer', 'minimum': 1},
                'image_size': {'type': 'integer', 'minimum': 4},
                'corpus_size': {'type': 'integer', 'minimum': 1},
                'patch_size': {'type': 'integer', 'minimum': 2},
                'batch_size': {'type': 'integer', 'minimum': 1},
                'steps': {'type': 'integer', 'minimum': 0},
                'learning_rate': {'type': 'number', 'exclusiveMinimum': 0},
                'beta1': {'type': 'number', 'minimum': 0, 'exclusiveMaximum': 1},
                'beta2': {'type': 'number', 'minimum': 0, 'exclusiveMaximum': 1},
                'eps': {'type': 'number', 'exclusiveMinimum': 0},
                'lr_milestones': {'type': 'array', 'items': {'type': 'number', 'minimum': 0, 'maximum': 1}},
                'lr_decay': {'type': 'number', 'exclusiveMinimum': 0, 'maximum': 1},
                'scale': {'type': 'integer', 'enum': [1, 2, 3, 4, 8]},
                'seed': {'type': 'integer', 'minimum': 0},
                'ema_decay': {'type': 'number', 'minimum': 0, 'exclusiveMaximum': 1},
                'holdout_size': {'type': 'integer', 'minimum': 0},
                'preset': {'type': 'string'},
                'loss_weights_k': {'type': 'array', 'items': {'type': 'number', 'minimum': 0}},
                'loss_weights_x': {'type': 'array', 'items': {'type': 'number', 'minimum': 0}}
            }
        },
        'metrics': {
            'type': 'object',
            'properties': {
                'peak': {'type': 'number', 'exclusiveMinimum': 0},
                'ssim_window': {'type': 'integer', 'minimum': 3, 'odd': True},
                'ssim_sigma': {'type': 'number', 'exclusiveMinimum': 0},
                'ssim_k1': {'type': 'number', 'exclusiveMinimum': 0},
                'ssim_k2': {'type': 'number', 'exclusiveMinimum': 0}
            }
        },
        'io': {
            'type': 'object',
            'properties': {
                'kernel_csv_precision': {'type': 'integer', 'minimum': 1, 'maximum': 17}
            }
        },
        'runtime': {
            'type': 'object',
            'properties': {
                'threads': {'type': 'integer', 'minimum': 0}
            }
        },
        'progress': {
            'type': 'object',
            'properties': {
                'enabled': {'type': 'boolean'}
            }
        },
        'logging': {
            'type': 'object',
            'properties': {
                'level': {'type': 'string', 'enum': ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']},
                'file': {'type': ['string', 'null']}
            }
        }
    }
}


def _type_ok(value: Any, expected: Any) -> bool:
    if isinstance(expected, list):
        return any(_type_ok(value, e) for e in expected)
    if expected == 'null':
        return value is None
    if expected == 'boolean':
        return isinstance(value, bool)
    if expected == 'integer':
        return isinstance(value, int) and not isinstance(value, bool)
    if expected == 'number':
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if expected == 'string':
        return isinstance(value, str)
    if expected == 'array':
        return isinstance(value, list)
    if expected == 'object':
        return isinstance(value, dict)
    return False


def _check(value: Any, schema: Dict[str, Any], path: str, errors: List[str]) -> None:
    expected = schema.get('type')
    if expected and not _type_ok(value, expected):
        errors.append(f"{path}: expected {expected}, got {type(value).__name__}")
        return

    if 'enum' in schema and value not in schema['enum']:
        errors.append(f"{path}: {value!r} not in {schema['enum']}")

    if _type_ok(value, 'number'):
        if 'minimum' in schema and value < schema['minimum']:
            errors.append(f"{path}: {value} < minimum {schema['minimum']}")
        if 'maximum' in schema and value > schema['maximum']:
            errors.append(f"{path}: {value} > maximum {schema['maximum']}")
        if 'exclusiveMinimum' in schema and value <= schema['exclusiveMinimum']:
            errors.append(f"{path}: {value} must be > {schema['exclusiveMinimum']}")
        if 'exclusiveMaximum' in schema and value >= schema['exclusiveMaximum']:
            errors.append(f"{path}: {value} must be < {schema['exclusiveMaximum']}")
        if schema.get('odd') and int(value) % 2 == 0:
            errors.append(f"{path}: {value} must be odd")

    if isinstance(value, list):
        if 'length' in schema and len(value) != schema['length']:
            errors.append(f"{path}: expected {schema['length']} items, got {len(value)}")
        item_schema = schema.get('items')
        if item_schema:
            for i, item in enumerate(value):
                _check(item, item_schema, f"{path}[{i}]", errors)

    if isinstance(value, dict):
        properties = schema.get('properties')
        if properties is not None:
            for key, item in value.items():
                if key not in properties:
                    errors.append(f"{path}.{key}: unknown key")
                    continue
                _check(item, properties[key], f"{path}.{key}", errors)
        value_schema = schema.get('values')
        if value_schema:
            for key, item in value.items():
                _check(item, value_schema, f"{path}.{key}", errors)


def validate_config(cfg: Dict[str, Any], schema: Dict[str, Any] = CONFIG_SCHEMA) -> Dict[str, Any]:
    """
    Validate a resolved configuration.

    Raises:
        ConfigError listing every violation

    Returns:
        The same configuration, for chaining
    """
    errors: List[str] = []
    _check(cfg, schema, 'config', errors)

    training = cfg.get('training', {})
    stages = cfg.get('model', {}).get('stages')
    for key in ('loss_weights_k', 'loss_weights_x'):
        weights = training.get(key)
        if weights is not None and stages is not None and len(weights) != stages:
            errors.append(f"config.training.{key}: expected {stages} weights, got {len(weights)}")
    scale = training.get('scale')
    patch = training.get('patch_size')
    if scale and patch and patch % scale:
        errors.append(f"config.training.patch_size: {patch} not divisible by scale {scale}")

    if errors:
        logger.debug(f"Config validation failed with {len(errors)} errors")
        raise ConfigError('; '.join(errors))
    return cfg
