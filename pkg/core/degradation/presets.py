"""
Degradation Presets
Distributions over degradation parameters, loaded from YAML files in the presets
directory, and sampling of concrete DegradationSpec instances
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import yaml

from core.config.config_manager import config
from core.degradation.degrade import DegradationSpec, default_kernel_size
from core.validation.error_handler import DegradationError

logger = logging.getLogger(__name__)


@dataclass
class DegradationDistribution:
    """Sampling ranges for synthetic degradations"""
    name: str
    description: str = ''
    scales: List[int] = field(default_factory=lambda: [2, 3, 4])
    kernel_sizes: Dict[int, int] = field(default_factory=dict)
    sigma_range: Tuple[float, float] = (0.6, 5.0)
    theta_range: Tuple[float, float] = (-math.pi, math.pi)
    noise_max: float = 25.0 / 255.0
    isotropic: bool = False
    fixed_sigmas: List[float] = field(default_factory=list)
    sweep_sigmas: List[float] = field(default_factory=list)

    def __post_init__(self):
        if not self.scales:
            raise DegradationError(f"Preset '{self.name}' lists no scales")
        low, high = self.sigma_range
        if not 0 < low <= high:
            raise DegradationError(f"Preset '{self.name}' has invalid sigma range {self.sigma_range}")
        if self.noise_max < 0:
            raise DegradationError(f"Preset '{self.name}' has negative noise_max")

    def kernel_size(self, scale: int) -> int:
        if scale in self.kernel_sizes:
            return self.kernel_sizes[scale]
        return default_kernel_size(scale)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'DegradationDistribution':
        """Create from a preset mapping (YAML)"""
        return cls(
            name=data.get('name', 'custom'),
            description=data.get('description', ''),
            scales=[int(s) for s in data.get('scales', [2, 3, 4])],
            kernel_sizes={int(k): int(v) for k, v in (data.get('kernel_sizes') or {}).items()},
            sigma_range=tuple(data.get('sigma_range', (0.6, 5.0))),
            theta_range=tuple(data.get('theta_range', (-math.pi, math.pi))),
            noise_max=float(data.get('noise_max', 25.0 / 255.0)),
            isotropic=bool(data.get('isotropic', False)),
            fixed_sigmas=[float(s) for s in data.get('fixed_sigmas', [])],
            sweep_sigmas=[float(s) for s in data.get('sweep_sigmas', [])],
        )


class PresetLibrary:
    """Built-in distributions plus any YAML presets found on disk"""

    DEFAULT_PRESETS = {
        'natural_images': DegradationDistribution(
            name='natural_images',
            description='Anisotropic Gaussian blur, scales 2/3/4, noise up to 25/255',
            scales=[2, 3, 4],
            kernel_sizes={2: 11, 3: 15, 4: 21},
        ),
    }

    def __init__(self, presets_dir: Optional[str] = None):
        self.presets: Dict[str, DegradationDistribution] = dict(self.DEFAULT_PRESETS)
        presets_dir = presets_dir or config.resolve_path(config.get('degradation.presets_dir', 'config/degradation'))
        self._load_presets_from_dir(presets_dir)

    def _load_presets_from_dir(self, presets_dir: str):
        path = Path(presets_dir)
        if not path.exists():
            logger.debug(f"Presets directory {presets_dir} not found, using built-in presets")
            return

        for yaml_file in sorted(path.glob('*.yaml')):
            try:
                with open(yaml_file, 'r', encoding='utf-8') as f:
                    data = yaml.safe_load(f)
                if isinstance(data, dict):
                    data.setdefault('name', yaml_file.stem)
                    preset = DegradationDistribution.from_dict(data)
                    self.presets[preset.name] = preset
                    logger.debug(f"Loaded degradation preset '{preset.name}' from {yaml_file}")
            except (yaml.YAMLError, DegradationError, TypeError, ValueError) as e:
                logger.warning(f"Skipping invalid preset file {yaml_file}: {e}")

    def get(self, name: str) -> DegradationDistribution:
        if name not in self.presets:
            raise DegradationError(f"Unknown degradation preset '{name}'. Available: {sorted(self.presets)}")
        return self.presets[name]

    def list_presets(self) -> List[Dict[str, str]]:
        return [{'name': name, 'description': preset.description} for name, preset in self.presets.items()]


def sample_spec(
    distribution: DegradationDistribution,
    rng: np.random.Generator,
    scale: Optional[int] = None,
    noise: Optional[float] = None
) -> DegradationSpec:
    """
    Draw one DegradationSpec.

    Fixed sigma lists give isotropic kernels at one of the listed sigmas; otherwise
    sigmas and theta are uniform over their ranges (sigma_y = sigma_x when isotropic).
    """
    scale = int(scale if scale is not None else rng.choice(distribution.scales))
    if distribution.fixed_sigmas:
        sigma_x = sigma_y = float(rng.choice(distribution.fixed_sigmas))
        theta = 0.0
    else:
        low, high = distribution.sigma_range
        sigma_x = float(rng.uniform(low, high))
        sigma_y = sigma_x if distribution.isotropic else float(rng.uniform(low, high))
        theta = 0.0 if distribution.isotropic else float(rng.uniform(*distribution.theta_range))
    level = float(rng.uniform(0.0, distribution.noise_max)) if noise is None else float(noise)
    return DegradationSpec(
        scale=scale,
        sigma_x=sigma_x,
        sigma_y=sigma_y,
        theta=theta,
        noise=level,
        seed=int(rng.integers(0, 2 ** 31 - 1)),
        kernel_size=distribution.kernel_size(scale),
    )
