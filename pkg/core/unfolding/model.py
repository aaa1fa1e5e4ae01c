"""
KANO Model
Per-stage subnetworks and softplus-parameterized step sizes of the unfolded solver
"""
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from core.autodiff import ops
from core.autodiff.node import Node, constant, leaf
from core.config.config_manager import config
from core.spline_kan.kan_layer import grid_settings
from core.unfolding.subnets import BACKBONES, CHANNEL_PLANS, KNet, ONet, SNet
from core.validation.error_handler import ConfigError

logger = logging.getLogger(__name__)

STEP_NAMES = ('k', 'o', 's')


def inverse_softplus(value: float) -> float:
    return float(np.log(np.expm1(value)))


@dataclass
class ModelSettings:
    """Architecture of a KanoModel (echoed into checkpoints)"""
    channels: int = 3
    kernel_size: int = 11
    scale: int = 2
    stages: int = 4
    backbone: str = 'kan'
    knet_depth: int = 2
    onet_2d_sets: int = 4
    onet_channel_plan: str = 'C-2C-C'
    snet_enabled: bool = True
    snet_width_factor: int = 2
    step_size_init: float = 0.1
    seed: int = 0
    grid: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not 1 <= self.stages <= 8:
            raise ConfigError(f"Stage count must be in [1, 8], got {self.stages}")
        if self.backbone not in BACKBONES:
            raise ConfigError(f"Unknown backbone '{self.backbone}', expected one of {BACKBONES}")
        if self.onet_channel_plan not in CHANNEL_PLANS:
            raise ConfigError(f"Unknown channel plan '{self.onet_channel_plan}', expected one of {CHANNEL_PLANS}")
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ConfigError(f"Kernel size must be odd, got {self.kernel_size}")
        if self.snet_width_factor < 1:
            raise ConfigError(f"S-Net width factor must be at least 1, got {self.snet_width_factor}")
        if self.step_size_init <= 0:
            raise ConfigError(f"Initial step size must be positive, got {self.step_size_init}")
        self.grid = grid_settings(self.grid)
        self.grid['grid_range'] = list(self.grid['grid_range'])

    @classmethod
    def from_config(cls, cfg: Optional[Dict[str, Any]] = None, **overrides) -> 'ModelSettings':
        """Settings from a resolved config dict (model/training/kan sections)"""
        cfg = cfg if cfg is not None else config.all
        model = cfg.get('model', {})
        training = cfg.get('training', {})
        scale = int(overrides.pop('scale', training.get('scale', 2)))
        sizes = cfg.get('degradation', {}).get('kernel_sizes', {})
        values = dict(
            channels=int(training.get('channels', 3)),
            kernel_size=int(sizes.get(str(scale), 11)),
            scale=scale,
            stages=int(model.get('stages', 4)),
            backbone=model.get('backbone', 'kan'),
            knet_depth=int(model.get('knet_depth', 2)),
            onet_2d_sets=int(model.get('onet_2d_sets', 4)),
            onet_channel_plan=model.get('onet_channel_plan', 'C-2C-C'),
            snet_enabled=bool(model.get('snet_enabled', True)),
            snet_width_factor=int(model.get('snet_width_factor', 2)),
            step_size_init=float(model.get('step_size_init', 0.1)),
            seed=int(training.get('seed', 0)),
            grid=dict(cfg.get('kan', {})),
        )
        values.update(overrides)
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class Stage:
    """Subnetworks and step-size parameters of one unfolding stage"""

    def __init__(self, index: int, settings: ModelSettings, rng: np.random.Generator):
        prefix = f"stages.{index}"
        grid = settings.grid
        self.knet = KNet(settings.kernel_size, settings.backbone, settings.knet_depth, rng, grid,
                         name=f"{prefix}.knet")
        self.onet = ONet(settings.channels, settings.onet_2d_sets, settings.onet_channel_plan, rng, grid,
                         name=f"{prefix}.onet")
        self.snet = None
        if settings.snet_enabled:
            self.snet = SNet(settings.channels, rng, name=f"{prefix}.snet", width_factor=settings.snet_width_factor)
        rho = inverse_softplus(settings.step_size_init)
        self.rho = {step: leaf(rho, name=f"{prefix}.rho_{step}") for step in STEP_NAMES}

    def parameters(self) -> Dict[str, Node]:
        params = {f"rho_{step}": node for step, node in self.rho.items()}
        params.update({f"knet.{k}": v for k, v in self.knet.parameters().items()})
        params.update({f"onet.{k}": v for k, v in self.onet.parameters().items()})
        if self.snet is not None:
            params.update({f"snet.{k}": v for k, v in self.snet.parameters().items()})
        return params


class KanoModel:
    """T stages of (K-Net, O-Net, S-Net) with untied weights"""

    def __init__(self, settings: Optional[ModelSettings] = None, **overrides):
        self.settings = settings if settings is not None else ModelSettings.from_config(**overrides)
        rng = np.random.default_rng(self.settings.seed)
        self.stages: List[Stage] = [Stage(t, self.settings, rng) for t in range(self.settings.stages)]
        self.frozen_step: Optional[float] = None
        logger.info(f"Built KanoModel: {self.settings.stages} stages, backbone={self.settings.backbone}, "
                    f"k={self.settings.kernel_size}, {self.param_count()} parameters")

    @property
    def kernel_size(self) -> int:
        return self.settings.kernel_size

    @property
    def scale(self) -> int:
        return self.settings.scale

    @property
    def num_stages(self) -> int:
        return len(self.stages)

    def step_size(self, t: int, step: str) -> Node:
        """gamma = softplus(rho) for stage t and step in {'k', 'o', 's'}"""
        if self.frozen_step is not None:
            return constant(self.frozen_step)
        return ops.softplus(self.stages[t].rho[step])

    def step_values(self) -> Dict[str, float]:
        return {f"stages.{t}.gamma_{step}": float(self.step_size(t, step).value)
                for t in range(self.num_stages) for step in STEP_NAMES}

    def freeze_step_sizes(self, value: Optional[float]) -> None:
        """Replace every learned step size by a constant (None restores the learned ones)"""
        if value is not None and value < 0:
            raise ConfigError(f"Frozen step size must be non-negative, got {value}")
        self.frozen_step = value

    def parameters(self) -> Dict[str, Node]:
        params = {}
        for t, stage in enumerate(self.stages):
            params.update({f"stages.{t}.{k}": v for k, v in stage.parameters().items()})
        return params

    def param_count(self) -> int:
        return sum(node.value.size for node in self.parameters().values())

    def knet_param_count(self) -> int:
        return sum(stage.knet.param_count() for stage in self.stages)

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: node.value.copy() for name, node in self.parameters().items()}

    def load_state_dict(self, values: Dict[str, np.ndarray]) -> None:
        params = self.parameters()
        missing = sorted(set(params) - set(values))
        unexpected = sorted(set(values) - set(params))
        if missing or unexpected:
            raise ConfigError(f"Parameter mismatch: missing {missing[:5]}, unexpected {unexpected[:5]}")
        for name, node in params.items():
            value = np.asarray(values[name], dtype=node.value.dtype)
            if value.shape != node.shape:
                raise ConfigError(f"Parameter {name}: shape {value.shape} != {node.shape}")
            node.value[...] = value
