"""Numerical core: fields, Fatou coordinates, orbits, fits and scaling"""

from .compensators import a_of, alpha, alpha_derivative, eta_tilde, kappa, omega, omega_inverse
from .errors import SnbError
from .expr_parser import FieldExpr, differentiate, evaluate, parse, to_string
from .fatou import (
    DisplacementJet,
    FatouCoordinate,
    displacement,
    displacement_inverse,
    displacement_jet,
    fatou_coordinate,
    fatou_model,
    fatou_numeric,
    flow,
    flow_rk,
    multiplier,
    time_one_map,
    variational_jet,
)
from .field import AnalysisBox, Field, ModelParams, fixed_points, genericity_check
from .orbit import (
    NeighborhoodMeasure,
    Orbit,
    continuous_critical_time,
    discrete_critical_index,
    generate_orbit,
    sawtooth_G,
    tail_lengths,
    tau_continuity,
)
from .scale_fit import (
    EtaSample,
    FitResult,
    MultiplicityReport,
    I_empirical,
    eta_of,
    eta_samples,
    eta_vs_eta_tilde,
    fit_scale,
    fit_standard_length,
    read_multiplicity,
    regime_fit,
)
from .scaling import ScalingReport, content_blowup, scaling_exponent

__all__ = [
    'a_of', 'alpha', 'alpha_derivative', 'eta_tilde', 'kappa', 'omega', 'omega_inverse',
    'SnbError',
    'FieldExpr', 'differentiate', 'evaluate', 'parse', 'to_string',
    'DisplacementJet', 'FatouCoordinate', 'displacement', 'displacement_inverse',
    'displacement_jet', 'fatou_coordinate', 'fatou_model', 'fatou_numeric', 'flow',
    'flow_rk', 'multiplier', 'time_one_map', 'variational_jet',
    'AnalysisBox', 'Field', 'ModelParams', 'fixed_points', 'genericity_check',
    'NeighborhoodMeasure', 'Orbit', 'continuous_critical_time', 'discrete_critical_index',
    'generate_orbit', 'sawtooth_G', 'tail_lengths', 'tau_continuity',
    'EtaSample', 'FitResult', 'MultiplicityReport', 'I_empirical', 'eta_of', 'eta_samples',
    'eta_vs_eta_tilde', 'fit_scale', 'fit_standard_length', 'read_multiplicity', 'regime_fit',
    'ScalingReport', 'content_blowup', 'scaling_exponent',
]
