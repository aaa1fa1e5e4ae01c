"""
Checkpoint Module
Model checkpoints: one .npz holding every parameter array plus a JSON metadata
record (format version, architecture, training config, step sizes, seed and the
patch-sampling generator state)
"""
import logging
from typing import Any, Dict, Optional, Tuple

import numpy as np
import orjson

from core.export.atomic import atomic_path
from core.unfolding.model import KanoModel, ModelSettings
from core.validation.error_handler import CheckpointError, ConfigError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
META_KEY = '__meta__'


def _encode_rng_state(state: Dict[str, Any]) -> Dict[str, Any]:
    # 128-bit PCG64 words do not fit a JSON integer
    return {**state, 'state': {key: str(value) for key, value in state['state'].items()}}


def _decode_rng_state(state: Dict[str, Any]) -> Dict[str, Any]:
    return {**state, 'state': {key: int(value) for key, value in state['state'].items()}}


def save_checkpoint(path: str, model: KanoModel, train_config: Optional[Dict[str, Any]] = None,
                    extra: Optional[Dict[str, Any]] = None,
                    rng_state: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    meta = {
        'format_version': FORMAT_VERSION,
        'settings': model.settings.to_dict(),
        'train_config': train_config or {},
        'step_sizes': model.step_values(),
        'frozen_step': model.frozen_step,
        'backbone': model.settings.backbone,
        'seed': model.settings.seed,
    }
    if rng_state is not None:
        meta['rng_state'] = _encode_rng_state(rng_state)
    if extra:
        meta['extra'] = extra
    arrays = model.state_dict()
    arrays[META_KEY] = np.frombuffer(orjson.dumps(meta, option=orjson.OPT_SORT_KEYS), dtype=np.uint8)
    with atomic_path(path) as tmp:
        with open(tmp, 'wb') as f:
            np.savez(f, **arrays)
    logger.info(f"Saved checkpoint with {len(arrays) - 1} parameter arrays to {path}")
    return meta


def load_checkpoint(path: str) -> Tuple[KanoModel, Dict[str, Any]]:
    """Rebuild the model from its stored settings and restore every parameter"""
    try:
        with np.load(path, allow_pickle=False) as archive:
            arrays = {name: archive[name] for name in archive.files}
    except (OSError, ValueError) as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e}") from e
    if META_KEY not in arrays:
        raise CheckpointError(f"{path} has no metadata record")
    meta = orjson.loads(arrays.pop(META_KEY).tobytes())
    if meta.get('format_version') != FORMAT_VERSION:
        raise CheckpointError(f"Unsupported checkpoint version {meta.get('format_version')}")
    try:
        model = KanoModel(ModelSettings(**meta['settings']))
        model.load_state_dict(arrays)
    except (ConfigError, TypeError) as e:
        raise CheckpointError(f"Checkpoint {path} does not match its architecture: {e}") from e
    if meta.get('rng_state') is not None:
        meta['rng_state'] = _decode_rng_state(meta['rng_state'])
    model.freeze_step_sizes(meta.get('frozen_step'))
    logger.info(f"Loaded checkpoint {path} ({model.settings.stages} stages, {model.settings.backbone})")
    return model, meta
