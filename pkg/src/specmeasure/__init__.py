"""Spectral counting and heat-flow diagnostics for submanifold measures on flat tori and S^2."""

__version__ = "0.1.0"

from .counting import (CoefficientTable, build_coefficient_table, convergence_diagnostic,
                       counting_sum, laplace_transform, predicted_counting)
from .curvature import (hessian_envelope, laplace_method_value, model_shape_value,
                        probe_at_distance, rho_hessian_fd, riccati_integrate, shape_envelope)
from .heat import heat_diagnostic, heat_flow_eval, heat_norm_sq, karamata_crosscheck
from .measures import (MeasureSpec, SphPoly, TrigPoly, equator_measure, fourier_coefficient,
                       full_measure, point_measure, subtorus_measure)
from .spectra import SpectralCatalog, enumerate_levels, eval_eigenfunction, weyl_count

__all__ = [
    "CoefficientTable", "MeasureSpec", "SpectralCatalog", "SphPoly", "TrigPoly",
    "build_coefficient_table", "convergence_diagnostic", "counting_sum", "enumerate_levels",
    "heat_diagnostic", "equator_measure", "eval_eigenfunction", "fourier_coefficient",
    "full_measure", "heat_flow_eval", "heat_norm_sq", "karamata_crosscheck",
    "laplace_method_value", "laplace_transform", "hessian_envelope", "model_shape_value",
    "point_measure", "predicted_counting", "probe_at_distance", "rho_hessian_fd",
    "riccati_integrate", "subtorus_measure", "shape_envelope", "weyl_count",
]
