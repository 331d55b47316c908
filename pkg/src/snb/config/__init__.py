"""Configuration module for field presets and run settings"""

from .field_presets import (
    FieldPreset,
    FIELD_PRESETS,
    get_field_preset,
    get_field_preset_by_name,
    detect_preset_from_expression
)
from .run_config import RunConfig, load_config_file, log_grid

__all__ = [
    'FieldPreset',
    'FIELD_PRESETS',
    'get_field_preset',
    'get_field_preset_by_name',
    'detect_preset_from_expression',
    'RunConfig',
    'load_config_file',
    'log_grid'
]
