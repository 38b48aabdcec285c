"""Gaussian phase-space simulation of single-passage atomic quantum memory readout."""

from .gaussian import (
    CPViolation,
    GaussianChannel,
    GaussianState,
    SymplecticError,
    SymplecticTransform,
    added_noise,
    added_noise_per_quadrature,
    amplifier_channel,
    apply_channel,
    apply_unitary,
    beam_splitter,
    coherent_mean,
    fidelity_coherent,
    loss_channel,
    phase_rotation,
    squeezer,
    wave_plate,
)
from .optimize import (
    A_TH,
    Optimum,
    classical_benchmark,
    closed_form,
    numeric_optimize,
    selective_squeeze_lossy,
    single_cell_lossy,
    two_cell_lossy,
    uniform_squeeze,
)
from .protocols import (
    PhysicalParams,
    ReadoutResult,
    SingleCellSpec,
    TwoCellSpec,
    cloning_check,
    kappa_from_physical,
    recombine,
    single_cell_pass,
    single_cell_readout,
    two_cell_pipeline,
    two_cell_readout,
    two_cell_relations,
)
from .temporal import TemporalProfile, inner, mode_projector, orthogonalize, profile

__version__ = "0.1.0"
