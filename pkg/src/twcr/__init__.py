"""twcr: angular distributions of twisted photons emitted by relativistic
electrons channeled along a crystal axis."""

from .constants import CODE_VERSION as __version__  # noqa: N811

from .channeling import (  # noqa: F401
    BeamConfig,
    BlochState,
    ChannelingSolution,
    ConfigurationError,
    CrystalConfig,
    Transition,
    build_solution,
    continuum_potential_fourier,
    dipole_xy,
    enumerate_transitions,
    populations,
    solve_bloch,
)
from .distribution import (  # noqa: F401
    AngularMap,
    GridSpec,
    PhotonQuantumNumbers,
    angular_map,
    delta_max,
    emission_probability,
    map_correlation,
    omega_max,
    phi_anisotropy,
)
from .geometry import (  # noqa: F401
    ComplexVec3,
    EmissionGeometry,
    Frame,
    WaveVectorCrystal,
    polarization_cr,
    polarization_twcr,
    rotation_matrix,
    spin_basis,
    wavevector_crystal,
)
from .matrixelement import (  # noqa: F401
    AmplitudeTerm,
    ZIntegralParams,
    alpha_fi,
    assemble_m_fi,
    phi_integral_cos,
    phi_integral_sin,
    twcr_amplitude,
    z_integral,
)
