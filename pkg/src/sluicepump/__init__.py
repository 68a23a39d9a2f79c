"""Open-system simulation of adiabatic Cooper pair pumping in a sluice.

Two-level master equations in the instantaneous eigenbasis, with and without
the secular approximation, integrated over repeated pumping cycles.
"""

from .core import (
    AdiabaticFrame,
    DegenerateGapError,
    DensityMatrix2,
    InvalidFrameError,
    SingularCoordinateError,
    SluiceError,
    SpectralTriple,
    local_alpha,
    trace_norm_w,
)
from .environment import (
    DivergingInductanceError,
    EngineeredEnvironment,
    OhmicSpectrum,
    engineered_spectrum,
    engineered_triple,
    ohmic_spectrum,
    ohmic_triple,
    spectral_triple,
)
from .integrator import IntegratorConfig, StiffnessError, TrajectoryRecord, integrate_cycles, integrate_frozen
from .master_equations import RhsVariant, rhs, rhs_bloch, rhs_full, rhs_secular, rhs_unitary, stationary_state
from .observables import (
    charge_asymmetry,
    charge_integrands,
    pumped_charge_per_cycle,
    superadiabatic_population,
)
from .sluice import ControlPoint, SluiceParams, adiabaticity, cycle_waveform, frame_at, frames_along

__version__ = "0.1.0"
