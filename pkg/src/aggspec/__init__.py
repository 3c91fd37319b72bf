"""Stick and CES absorption spectra of dipole-coupled molecular aggregates."""

__version__ = "0.1.0"

from .errors import AggSpecError  # noqa: E402
from .excitonics import (  # noqa: E402
    Polarization,
    coupling_matrix,
    diagonalize,
    oscillator_strengths,
    ring_eigenvalues_analytic,
)
from .geometry import AggregateGeometry, build_bent_chain, build_chain, build_ellipse, build_ring  # noqa: E402
from .lineshape import EnergyGrid, LineshapeModel, electronic_green, load_tabulated_lineshape, vibronic_green  # noqa: E402
from .scenario import ScenarioSpec, load_scenario, parse_scenario  # noqa: E402
from .spectra import ces_spectrum, monomer_spectrum, stick_spectrum  # noqa: E402

__all__ = [
    "AggSpecError",
    "AggregateGeometry",
    "EnergyGrid",
    "LineshapeModel",
    "Polarization",
    "ScenarioSpec",
    "build_bent_chain",
    "build_chain",
    "build_ellipse",
    "build_ring",
    "ces_spectrum",
    "coupling_matrix",
    "diagonalize",
    "electronic_green",
    "load_scenario",
    "load_tabulated_lineshape",
    "monomer_spectrum",
    "oscillator_strengths",
    "parse_scenario",
    "ring_eigenvalues_analytic",
    "stick_spectrum",
    "vibronic_green",
]
