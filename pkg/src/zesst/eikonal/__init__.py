"""Eikonal construction: geodesic flow, charts, measure identities."""

from .geodesics import FlowSolution, FlowStates, MetricDegeneracyError, StiffnessError
from .chart import ChartError, FlowChart, RadialChart, build_chart, icosphere, sphere_lattice
from .measures import (AnisoGaussian, IsoGaussian, coarea_check, eikonal_bounds_report,
                       gauss_check)

__all__ = [
    "FlowSolution", "FlowStates", "MetricDegeneracyError", "StiffnessError",
    "ChartError", "FlowChart", "RadialChart", "build_chart", "icosphere",
    "sphere_lattice",
    "AnisoGaussian", "IsoGaussian", "coarea_check", "eikonal_bounds_report",
    "gauss_check",
]
