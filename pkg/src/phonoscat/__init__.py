"""Phonon-radiation loss of microwave modes with piezoelectric inclusions.

The package computes the rate at which a microwave resonator mode loses
photons by radiating acoustic waves from embedded piezoelectric material,
the resulting quality factor, two mitigation schemes (antiparallel pair
interference and acoustic Bragg mirrors), and the electro-optic figure of
merit that trades coupling against loss.
"""

from .coupling import (
    CouplingAmplitude,
    Inclusion,
    MicrowaveMode,
    coupling_rate,
    default_eps_eff,
    form_factor,
    geometry_factor,
    induced_strain,
)
from .elastodynamics import (
    AcousticBranch,
    MaterialInstabilityError,
    PhononPlaneWave,
    christoffel,
    christoffel_matrix,
    group_velocity,
    zero_point_stress,
)
from .materials import (
    CONSTANTS,
    MaterialError,
    MaterialSpec,
    Orientation,
    default_materials,
    isotropic_stiffness,
    load_materials,
    rotate_piezo,
    rotate_stiffness,
    save_materials,
)
from .mitigation import (
    BraggLayer,
    BraggStack,
    DualWaveguideResult,
    bragg_transmission,
    dual_waveguide_rate,
    mitigated_rate,
    transfer_matrix,
)
from .radiation import (
    BruteForceSpec,
    QuadratureDiagnostics,
    QuadratureSpec,
    RadiationResult,
    SweepResult,
    brute_force_rate,
    derived_material_constant,
    mie_rate,
    min_phase_velocity,
    rayleigh_rate,
    regime_label,
    sweep_dimension,
    sweep_frequency,
)
from .transducer import (
    EoModel,
    OrientationSweep,
    emission_weighted_overlap,
    figure_of_merit,
    sweep_orientation,
)

__version__ = "0.1.0"

__all__ = [
    "AcousticBranch",
    "BraggLayer",
    "BraggStack",
    "BruteForceSpec",
    "CONSTANTS",
    "CouplingAmplitude",
    "DualWaveguideResult",
    "EoModel",
    "Inclusion",
    "MaterialError",
    "MaterialInstabilityError",
    "MaterialSpec",
    "MicrowaveMode",
    "Orientation",
    "OrientationSweep",
    "PhononPlaneWave",
    "QuadratureDiagnostics",
    "QuadratureSpec",
    "RadiationResult",
    "SweepResult",
    "bragg_transmission",
    "brute_force_rate",
    "christoffel",
    "christoffel_matrix",
    "coupling_rate",
    "default_eps_eff",
    "default_materials",
    "derived_material_constant",
    "dual_waveguide_rate",
    "emission_weighted_overlap",
    "figure_of_merit",
    "form_factor",
    "geometry_factor",
    "group_velocity",
    "induced_strain",
    "isotropic_stiffness",
    "load_materials",
    "mie_rate",
    "min_phase_velocity",
    "mitigated_rate",
    "rayleigh_rate",
    "regime_label",
    "rotate_piezo",
    "rotate_stiffness",
    "save_materials",
    "sweep_dimension",
    "sweep_frequency",
    "sweep_orientation",
    "transfer_matrix",
    "zero_point_stress",
]
