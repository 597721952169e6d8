"""Kinematics and fringe observables of atoms absorbing two twisted (Bessel) photons.

Natural units throughout; energies, momenta and masses are in eV.
"""

__version__ = "0.1.0"

from .amplitude import PWAmplitudeModel, TwistedAmplitude, fringe_function, twisted_amplitude, xsec_density
from .errors import (
    AlwaysVisible,
    DegenerateBoundary,
    EnergyMismatch,
    FixedEnergyViolation,
    IllPosed,
    NeverVisible,
    NoFringe,
    NonConvergent,
    NoSolution,
    NumericalError,
    OutsideAnnulus,
    PhysicsError,
    RootFailure,
    SamplingInefficiency,
    SchemaError,
    SignConventionWarning,
    Undersampled,
    ValidationError,
)
from .kernels import BACKEND
from .kinematics import (
    AtomBeam,
    BesselMode,
    TransferVector,
    TriangleGeometry,
    config_azimuths,
    detuning_from_transfer,
    detuning_window_crossed,
    detuning_window_rest,
    kick_polar_angle,
    pw_reference,
    triangle_geometry,
)
from .lineshape import (
    LineProfile,
    LineSetup,
    MeasurementSet,
    ReconstructionConfig,
    build_design_matrix,
    forward_pattern,
    invert_lineshape,
)
from .oracle import RingRegularization, convergence_table, ring_quadrature_amplitude, root_find_configs
from .smearing import MomentumSpread, smear_pattern, tolerable_spread, visibility
from .spectra import (
    FringePattern,
    KickEvent,
    angular_distribution,
    azimuthal_distribution,
    crossed_beam_scan,
    detuning_scan,
    fringe_census,
    sample_kicks,
)
