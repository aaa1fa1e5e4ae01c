"""Handler modules for the KANO subcommands"""
from .degradation_handlers import register_degradation_handlers
from .training_handlers import register_training_handlers
from .inference_handlers import register_inference_handlers
from .evaluation_handlers import register_evaluation_handlers


def register_all_handlers(registry):
    """Register all handlers with the registry"""
    register_degradation_handlers(registry)
    register_training_handlers(registry)
    register_inference_handlers(registry)
    register_evaluation_handlers(registry)


__all__ = [
    'register_all_handlers',
    'register_degradation_handlers',
    'register_training_handlers',
    'register_inference_handlers',
    'register_evaluation_handlers'
]
