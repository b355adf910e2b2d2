"""Non-Hermitian 1D tight-binding chains: spectra, phase diagrams, dynamics.

Four chain families (complex end potential, complex end bond, and their
two-ended counterparts) with closed-form reflection/bound-state results,
a residual-checked dense eigensolver, exceptional-point finders, and
wavepacket protocols for reflectionless absorption and self-sustained
emission.  See the cli module for the file-producing front end.
"""

from .analytic import (
    BoundState,
    BoundaryKind,
    CriticalEqCoeffs,
    EpReport,
    EpWave,
    NonConvergenceError,
    PhaseReport,
    ReflectionPole,
    Region,
    bound_state_cp,
    bound_states_cc,
    check_reciprocity,
    critical_coeffs,
    critical_function,
    delta_h2,
    ep_profile,
    ep_wave,
    find_exceptional_point,
    find_real_roots,
    gamma_h1,
    optimal_reflectionless,
    phase_classify,
    reflection_cc,
    reflection_cp,
)
from .dynamics import (
    EmissionReport,
    InvalidRunError,
    ReflectionReport,
    State,
    WavepacketSpec,
    delta_state,
    eigenstate_currents,
    gaussian_wavepacket,
    local_current,
    measure_emission,
    measure_reflection,
    propagate,
)
from .lattice import (
    Family,
    HamiltonianMatrix,
    ModelSpec,
    apply_hamiltonian,
    build_model,
    pt_image,
    pt_residual,
)
from .spectra import (
    EigenSystem,
    LeadWaveClass,
    NoSignalError,
    SpectrumClass,
    WaveKind,
    classify_levels,
    eigendecompose,
    fit_lead_wave,
    ipr,
)

__version__ = "0.1.0"
