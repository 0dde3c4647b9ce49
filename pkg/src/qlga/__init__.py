"""One-particle quantum lattice gas automaton in one dimension.

Exact two-angle unitary dynamics on a periodic lattice, its plane-wave
theory, binomial wave packets and phase potentials.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BandEdgeError,
    ConfigError,
    DimensionError,
    NonUnitaryError,
    NumericContractError,
    OutputError,
    QLGAError,
)
from .lattice import (  # noqa: E402
    LatticeSpec,
    LocalRule,
    PotentialProfile,
    RuleParams,
    Spinor,
    StateVector,
    basis_state,
    build_rule,
    evolve,
    probability_density,
    random_state,
    square_well,
    step,
    translate,
    verify_unitarity,
)
from .linalg import SpectralResult, assemble_global_U, eigendecompose_unitary  # noqa: E402
from .packets import (  # noqa: E402
    PacketDiagnostics,
    WavePacketSpec,
    packet_momentum_amplitudes,
    track_packet,
    wave_packet,
)
from .spectral import (  # noqa: E402
    FourierSpectrum,
    PlaneWaveIndex,
    continuum_mass_term,
    dispersion_omega,
    fourier_amplitudes,
    group_velocity,
    plane_wave,
    transfer_matrix_D,
)
