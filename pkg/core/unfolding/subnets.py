"""
Proximal Subnetworks
K-Net (spline or MLP backbone over the flattened kernel), O-Net (2D spline sets then
a spectral spline stack) and S-Net (two-level U-shape conv net). Each is residual:
identity plus a learned correction that starts at zero.
"""
import logging
import re
from typing import Dict, List, Optional

import numpy as np

from core.autodiff import ops
from core.autodiff.node import Node, constant, leaf
from core.spline_kan.kan_layer import KanLayer, KanStack, grid_settings, kan1d_apply, kan2d_apply
from core.spline_kan.mlp import MlpStack, matched_mlp_widths
from core.unfolding.data_terms import project_simplex
from core.validation.error_handler import ConfigError, ShapeError

logger = logging.getLogger(__name__)

BACKBONES = ('kan', 'mlp')
CHANNEL_PLANS = ('C', 'C-2C-C', 'C-2C-4C-2C-C')


def plan_widths(plan: str, channels: int) -> List[int]:
    """'C-2C-C' with C=3 -> [3, 6, 3]"""
    widths = []
    for token in plan.split('-'):
        match = re.fullmatch(r'(\d*)C', token.strip())
        if not match:
            raise ConfigError(f"Invalid channel plan '{plan}'")
        widths.append(int(match.group(1) or 1) * channels)
    if widths[0] != channels or widths[-1] != channels:
        raise ConfigError(f"Channel plan '{plan}' must start and end at C")
    if len(widths) == 1:
        widths.append(channels)
    return widths


def _prefixed(prefix: str, params: Dict[str, Node]) -> Dict[str, Node]:
    return {f"{prefix}.{key}": node for key, node in params.items()}


class KNet:
    """K -> project_simplex(K + backbone(k^2 K) / k^2)"""

    def __init__(self, kernel_size: int, backbone: str = 'kan', depth: int = 2,
                 rng: Optional[np.random.Generator] = None, grid: Optional[Dict] = None, name: str = 'knet'):
        if backbone not in BACKBONES:
            raise ConfigError(f"Unknown backbone '{backbone}', expected one of {BACKBONES}")
        if depth < 1:
            raise ConfigError(f"K-Net depth must be >= 1, got {depth}")
        self.kernel_size = kernel_size
        self.dim = kernel_size * kernel_size
        self.backbone_kind = backbone
        widths = [self.dim] * (depth + 1)
        settings = grid_settings(grid)
        if backbone == 'kan':
            self.backbone = KanStack.from_widths(widths, rng, fan_in_scaling=True, last_init_scale=0.0,
                                                 name=name, **settings)
        else:
            mlp_widths = matched_mlp_widths(widths, settings['grid_size'], settings['degree'])
            self.backbone = MlpStack(mlp_widths, rng, last_init_scale=0.0, name=name)

    def __call__(self, k_in: Node) -> Node:
        if k_in.shape != (self.kernel_size, self.kernel_size):
            raise ShapeError(f"K-Net expects a {self.kernel_size}x{self.kernel_size} kernel, got {k_in.shape}")
        row = ops.scale(ops.reshape(k_in, (1, self.dim)), float(self.dim))
        correction = ops.reshape(self.backbone.forward_batch(row), (self.kernel_size, self.kernel_size))
        return project_simplex(ops.add(k_in, ops.scale(correction, 1.0 / self.dim)))

    def parameters(self) -> Dict[str, Node]:
        return self.backbone.parameters()

    def param_count(self) -> int:
        return self.backbone.param_count()


class ONet:
    """Four channel-mixing 2D spline sets followed by the spectral 1D stack"""

    def __init__(self, channels: int, sets: int = 4, plan: str = 'C-2C-C',
                 rng: Optional[np.random.Generator] = None, grid: Optional[Dict] = None, name: str = 'onet'):
        settings = grid_settings(grid)
        self.channels = channels
        self.sets2d = [KanLayer(channels, channels, rng=rng, init_scale=1.0 / channels,
                                name=f"{name}.sets2d.{i}", **settings) for i in range(sets)]
        self.spectral = KanStack.from_widths(plan_widths(plan, channels), rng, fan_in_scaling=True,
                                             last_init_scale=0.0, name=f"{name}.spectral", **settings)

    def __call__(self, o_in: Node) -> Node:
        hidden = o_in
        for layer in self.sets2d:
            hidden = kan2d_apply(hidden, layer)
        return ops.add(o_in, kan1d_apply(hidden, self.spectral))

    def parameters(self) -> Dict[str, Node]:
        params = {}
        for index, layer in enumerate(self.sets2d):
            params.update(_prefixed(f"sets2d.{index}", layer.parameters()))
        params.update(_prefixed('spectral', self.spectral.parameters()))
        return params

    def param_count(self) -> int:
        return sum(layer.param_count() for layer in self.sets2d) + self.spectral.param_count()


class SNet:
    """
    Two-level U-shape: 3x3 conv C->wC (SiLU), 2x2 average pool, 3x3 conv wC->wC (SiLU),
    nearest x2 upsample, decoder conv over [upsampled, skip] -> C, outer residual.
    w is the width factor (2 gives the C -> 2C -> C plan).
    The decoder is zero-initialized.
    """

    def __init__(self, channels: int, rng: Optional[np.random.Generator] = None, name: str = 'snet',
                 width_factor: int = 2):
        rng = rng if rng is not None else np.random.default_rng(0)
        c, wide = channels, width_factor * channels
        self.channels = channels

        def conv_weight(out_ch: int, in_ch: int, label: str) -> Node:
            std = 1.0 / np.sqrt(in_ch * 9)
            return leaf(rng.normal(0.0, std, (out_ch, in_ch, 3, 3)), name=f"{name}.{label}")

        self.enc_weight = conv_weight(wide, c, 'enc_weight')
        self.enc_bias = leaf(np.zeros(wide), name=f"{name}.enc_bias")
        self.mid_weight = conv_weight(wide, wide, 'mid_weight')
        self.mid_bias = leaf(np.zeros(wide), name=f"{name}.mid_bias")
        self.dec_up_weight = leaf(np.zeros((c, wide, 3, 3)), name=f"{name}.dec_up_weight")
        self.dec_skip_weight = leaf(np.zeros((c, wide, 3, 3)), name=f"{name}.dec_skip_weight")
        self.dec_bias = leaf(np.zeros(c), name=f"{name}.dec_bias")

    def __call__(self, s_in: Node) -> Node:
        c, height, width = s_in.shape
        if c != self.channels:
            raise ShapeError(f"S-Net expects {self.channels} channels, got {c}")
        if height % 2 or width % 2:
            raise ShapeError(f"S-Net needs even spatial dims, got {height}x{width}")
        skip = ops.silu(ops.conv2d(s_in, self.enc_weight, self.enc_bias, padding=1))
        mid = ops.silu(ops.conv2d(ops.avg_pool2(skip), self.mid_weight, self.mid_bias, padding=1))
        up = ops.upsample_nearest2(mid)
        no_bias = constant(np.zeros(c, dtype=s_in.value.dtype))
        decoded = ops.add(ops.conv2d(up, self.dec_up_weight, self.dec_bias, padding=1),
                          ops.conv2d(skip, self.dec_skip_weight, no_bias, padding=1))
        return ops.add(s_in, decoded)

    def parameters(self) -> Dict[str, Node]:
        return {
            'enc_weight': self.enc_weight, 'enc_bias': self.enc_bias,
            'mid_weight': self.mid_weight, 'mid_bias': self.mid_bias,
            'dec_up_weight': self.dec_up_weight, 'dec_skip_weight': self.dec_skip_weight,
            'dec_bias': self.dec_bias,
        }

    def param_count(self) -> int:
        return sum(node.value.size for node in self.parameters().values())
