"""
Command Schemas Module
Declarative parameter schemas for every subcommand; argparse and parameter
validation are both generated from these
"""
from typing import Any, Dict

COMMAND_SCHEMAS: Dict[str, Dict[str, Any]] = {
    # ============ DEGRADATION ============
    'degrade': {
        'category': 'degradation',
        'description': 'Blur, downsample and add noise to a cube: Y = (X conv K) downsampled by s, plus AWGN',
        'parameters': {
            'in_path': {'type': 'string', 'flag': '--in', 'description': 'Input cube (.kanc or .png)'},
            'scale': {'type': 'integer', 'description': 'Downsampling factor', 'default': 2},
            'sigma_x': {'type': 'number', 'description': 'Kernel standard deviation along x'},
            'sigma_y': {'type': 'number', 'description': 'Kernel standard deviation along y'},
            'theta': {'type': 'number', 'description': 'Kernel rotation in radians', 'default': 0.0},
            'noise': {'type': 'number', 'description': 'AWGN standard deviation', 'default': 0.0},
            'seed': {'type': 'integer', 'description': 'Noise seed', 'default': 0},
            'kernel_size': {'type': 'integer', 'description': 'Odd kernel size (default from config per scale)'},
            'out': {'type': 'string', 'description': 'Output cube (.kanc or .png)'},
            'kernel_out': {'type': 'string', 'description': 'Ground-truth kernel CSV'}
        },
        'required': ['in_path', 'sigma_x', 'sigma_y', 'out']
    },
    'gen-data': {
        'category': 'degradation',
        'description': 'Generate procedural (X, Y, K) pairs from a degradation preset, with a manifest',
        'parameters': {
            'n': {'type': 'integer', 'description': 'Number of pairs', 'default': 8},
            'out_dir': {'type': 'string', 'description': 'Output directory'},
            'preset': {'type': 'string', 'description': 'Degradation preset name'},
            'seed': {'type': 'integer', 'description': 'Base seed', 'default': 0},
            'channels': {'type': 'integer', 'description': 'Channels per image', 'default': 3},
            'size': {'type': 'integer', 'description': 'Image side length', 'default': 64},
            'scale': {'type': 'integer', 'description': 'Fix the scale instead of sampling it'},
            'noise': {'type': 'number', 'description': 'Fix the noise level instead of sampling it'}
        },
        'required': ['out_dir']
    },

    # ============ TRAINING ============
    'train': {
        'category': 'training',
        'description': 'Train a KANO model on a procedural corpus and save a checkpoint plus the training log',
        'parameters': {
            'out': {'type': 'string', 'description': 'Checkpoint path (.npz)'},
            'log_out': {'type': 'string', 'description': 'Training log CSV'},
            'steps': {'type': 'integer', 'description': 'Override training.steps'},
            'seed': {'type': 'integer', 'description': 'Override training.seed'},
            'scale': {'type': 'integer', 'description': 'Override training.scale'},
            'stages': {'type': 'integer', 'description': 'Override model.stages'},
            'backbone': {'type': 'string', 'enum': ['kan', 'mlp'], 'description': 'K-Net backbone'},
            'preset': {'type': 'string', 'description': 'Degradation preset for the corpus'},
            'resume': {'type': 'string', 'description': 'Checkpoint to continue training from (parameters and sampling state)'}
        },
        'required': ['out']
    },
    'compare-backbones': {
        'category': 'training',
        'description': 'Train KAN and MLP K-Net variants from the same seed and data; emit paired kernel-MSE curves',
        'parameters': {
            'out_dir': {'type': 'string', 'description': 'Directory for curves.csv, sigma_sweep.csv and summary.json'},
            'steps': {'type': 'integer', 'description': 'Override training.steps'},
            'seed': {'type': 'integer', 'description': 'Override training.seed'},
            'sweep_preset': {'type': 'string', 'description': 'Preset holding the sigma sweep',
                             'default': 'hyperspectral'}
        },
        'required': ['out_dir']
    },

    # ============ INFERENCE ============
    'infer': {
        'category': 'inference',
        'description': 'Super-resolve a cube with a trained checkpoint',
        'parameters': {
            'model': {'type': 'string', 'description': 'Checkpoint path'},
            'in_path': {'type': 'string', 'flag': '--in', 'description': 'Low-resolution cube (.kanc or .png)'},
            'scale': {'type': 'integer', 'description': 'Scale factor (default: the checkpoint scale)'},
            'out': {'type': 'string', 'description': 'Super-resolved cube (.kanc or .png)'},
            'kernel_out': {'type': 'string', 'description': 'Estimated kernel CSV'},
            'stages_out': {'type': 'string', 'description': 'Per-stage diagnostics CSV'},
            'gt': {'type': 'string', 'description': 'Ground-truth cube for the diagnostics'},
            'kernel_gt': {'type': 'string', 'description': 'Ground-truth kernel CSV for the diagnostics'}
        },
        'required': ['model', 'in_path', 'out']
    },

    # ============ EVALUATION ============
    'eval': {
        'category': 'evaluation',
        'description': 'PSNR, SSIM, SAM, RMSE, ERGAS and CC between reference and test cubes',
        'parameters': {
            'ref': {'type': 'string', 'description': 'Reference cube'},
            'test': {'type': 'string', 'description': 'Test cube'},
            'ref_dir': {'type': 'string', 'description': 'Directory of reference cubes'},
            'test_dir': {'type': 'string', 'description': 'Directory of test cubes (matched by file name)'},
            'scale': {'type': 'integer', 'description': 'Scale factor used by ERGAS', 'default': 1},
            'peak': {'type': 'number', 'description': 'Peak value for PSNR/SSIM (default from config)'},
            'out': {'type': 'string', 'description': 'Metrics CSV'},
            'per_band_out': {'type': 'string', 'description': 'Per-band RMSE CSV'}
        },
        'required': []
    },
    'inspect-kernel': {
        'category': 'evaluation',
        'description': 'Kernel statistics (peak, center, sigma estimates, orientation) and optional MSE to a reference',
        'parameters': {
            'kernel': {'type': 'string', 'description': 'Kernel CSV'},
            'ref': {'type': 'string', 'description': 'Reference kernel CSV'}
        },
        'required': ['kernel']
    }
}
