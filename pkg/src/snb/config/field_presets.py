"""
Named field families.

This module holds predefined families so runs can name a field instead of
spelling out its expression or rho coefficients.
"""

from typing import Dict, Optional, Tuple

from ..core.errors import ExprSyntaxError, UnknownIdentifierError
from ..core.expr_parser import parse, to_string
from ..core.field import AnalysisBox, Field


class FieldPreset:
    """Represents a named field family"""

    def __init__(self, name: str, expression: Optional[str] = None,
                 rho: Tuple[float, ...] = (0.0,), description: str = ""):
        self.name = name
        self.expression = expression
        self.rho = tuple(rho)
        self.description = description

    @property
    def is_model(self) -> bool:
        return self.expression is None

    def build(self, box: AnalysisBox = AnalysisBox()) -> Field:
        """Field of this preset on the given box"""
        if self.is_model:
            return Field.model(self.rho, box)
        return Field.generic(self.expression, box)

    def to_dict(self) -> Dict:
        """Convert to dictionary representation"""
        return {
            'name': self.name,
            'expression': self.expression,
            'rho': list(self.rho),
            'description': self.description
        }


# Predefined field families
FIELD_PRESETS = {
    'model': FieldPreset(
        name='Model',
        rho=(0.0,),
        description='Formal model (-x^2 + nu)/(1 + rho x) with rho = 0'
    ),

    'model_residual': FieldPreset(
        name='Model with residual',
        rho=(0.3,),
        description='Formal model with residual invariant rho = 0.3'
    ),

    'quadratic': FieldPreset(
        name='Quadratic',
        expression='-x^2+nu',
        description='Saddle-node normal form'
    ),

    'cubic': FieldPreset(
        name='Cubic',
        expression='-x^2+nu+0.1*x^3',
        description='Generic family with a cubic term'
    ),
}


def get_field_preset(preset_key: str) -> Optional[FieldPreset]:
    """Get a field preset by its key, or failing that by its display name"""
    return FIELD_PRESETS.get(preset_key.lower()) or get_field_preset_by_name(preset_key)


def get_field_preset_by_name(name: str) -> Optional[FieldPreset]:
    """Get a field preset by its display name"""
    for preset in FIELD_PRESETS.values():
        if preset.name.lower() == name.lower():
            return preset
    return None


def detect_preset_from_expression(text: str) -> Optional[FieldPreset]:
    """
    Find the preset whose expression prints the same as the given text.

    Args:
        text: Field expression text

    Returns:
        FieldPreset if one matches after canonical printing, None otherwise
    """
    if not text or not text.strip():
        return None
    try:
        canonical = to_string(parse(text))
    except (ExprSyntaxError, UnknownIdentifierError):
        return None

    for preset in FIELD_PRESETS.values():
        if preset.is_model:
            continue
        if to_string(parse(preset.expression)) == canonical:
            return preset
    return None
