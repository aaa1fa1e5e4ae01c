"""
Degradation Handlers
Handlers for the degrade and gen-data commands
"""
import logging
import os
from typing import Any, Dict, Optional

from cli.command_schemas import COMMAND_SCHEMAS
from cli.file_utils import load_cube, save_cube
from core.config.config_manager import config
from core.degradation.degrade import DegradationSpec, degrade
from core.degradation.kernels import kernel_stats
from core.degradation.presets import PresetLibrary
from core.export.atomic import write_json
from core.export.cube_file import write_cube
from core.export.kernel_csv import write_kernel_csv
from core.training.synthetic import synth_dataset

logger = logging.getLogger(__name__)


def register_degradation_handlers(registry):
    """Register all degradation handlers"""

    # degrade
    def degrade_cube(
        in_path: str,
        sigma_x: float,
        sigma_y: float,
        out: str,
        scale: int = 2,
        theta: float = 0.0,
        noise: float = 0.0,
        seed: int = 0,
        kernel_size: Optional[int] = None,
        kernel_out: Optional[str] = None
    ) -> Dict[str, Any]:
        """Degrade one cube and optionally write the ground-truth kernel"""
        x = load_cube(in_path)
        spec = DegradationSpec(scale=scale, sigma_x=sigma_x, sigma_y=sigma_y, theta=theta,
                               noise=noise, seed=seed, kernel_size=kernel_size)
        y, kernel = degrade(x, spec)
        save_cube(out, y)
        if kernel_out:
            write_kernel_csv(kernel_out, kernel)

        return {
            'success': True,
            'output_path': out,
            'kernel_path': kernel_out,
            'input_shape': list(x.shape),
            'output_shape': list(y.shape),
            'spec': spec.to_dict(),
            'kernel': kernel_stats(kernel)
        }

    schema = COMMAND_SCHEMAS['degrade']
    registry.register(
        'degrade',
        degrade_cube,
        schema['category'],
        schema['description'],
        schema['parameters'],
        schema.get('required', [])
    )

    # gen-data
    def gen_data(
        out_dir: str,
        n: int = 8,
        preset: Optional[str] = None,
        seed: int = 0,
        channels: int = 3,
        size: int = 64,
        scale: Optional[int] = None,
        noise: Optional[float] = None
    ) -> Dict[str, Any]:
        """Procedural pairs x_i.kanc / y_i.kanc / k_i.csv plus manifest.json"""
        preset = preset or config.get('degradation.default_preset', 'natural_images')
        distribution = PresetLibrary().get(preset)
        pairs = synth_dataset(n, distribution, seed, channels, size, scale=scale, noise=noise)

        os.makedirs(out_dir, exist_ok=True)
        entries = []
        for index, pair in enumerate(pairs):
            names = {
                'x': f"x_{index:03d}.kanc",
                'y': f"y_{index:03d}.kanc",
                'kernel': f"k_{index:03d}.csv"
            }
            write_cube(os.path.join(out_dir, names['x']), pair.x_gt)
            write_cube(os.path.join(out_dir, names['y']), pair.y)
            write_kernel_csv(os.path.join(out_dir, names['kernel']), pair.k_gt)
            entries.append({'index': index, **names, 'spec': pair.spec.to_dict()})

        manifest = {'preset': preset, 'seed': seed, 'channels': channels, 'size': size, 'pairs': entries}
        manifest_path = os.path.join(out_dir, 'manifest.json')
        write_json(manifest_path, manifest)
        logger.info(f"Wrote {len(entries)} pairs to {out_dir}")

        return {
            'success': True,
            'output_dir': out_dir,
            'manifest_path': manifest_path,
            'pair_count': len(entries)
        }

    schema = COMMAND_SCHEMAS['gen-data']
    registry.register(
        'gen-data',
        gen_data,
        schema['category'],
        schema['description'],
        schema['parameters'],
        schema.get('required', [])
    )
