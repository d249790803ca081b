"""Potential families, cutoffs, energy weights and classical symbols."""

from .cutoffs import CutoffKit, DEFAULT_KIT, Smoothstep
from .potentials import (EnergyModel, PositiveTailRadial,
                         PowerLawProfile, PreconditionError, RadialBump,
                         RadialPotential, condition_report, eval_f_lambda,
                         flat_well, reference_model, truncate_radial)
from .example2d import (ExampleEikonal2D, ExamplePerturbation, SinProfile,
                        example_perturbation)
from .symbols import (BracketDecomposition, poisson_bracket_b,
                      poisson_bracket_fd, sample_phase_points, symbol_ab)
from .seminorm import SeminormReport, smallness_seminorm

__all__ = [
    "CutoffKit", "DEFAULT_KIT", "Smoothstep",
    "EnergyModel", "PowerLawProfile", "PositiveTailRadial", "PreconditionError",
    "RadialBump", "RadialPotential", "condition_report", "eval_f_lambda",
    "flat_well", "reference_model", "truncate_radial",
    "ExampleEikonal2D", "ExamplePerturbation", "SinProfile", "example_perturbation",
    "BracketDecomposition", "poisson_bracket_b", "poisson_bracket_fd",
    "sample_phase_points", "symbol_ab",
    "SeminormReport", "smallness_seminorm",
]
