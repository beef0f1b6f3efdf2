"""Statevector emulation of twirling-based eigenstate extraction and
superposition circuits for transition matrix elements."""
from .errors import (
    ConfigError,
    ConvergenceFailure,
    PipelineError,
    RankDeficient,
    TwirlSimError,
    ZeroProbability,
)
from .estimation import (
    ExcitationUnitary,
    ExpectationDataset,
    build_excitation_unitary,
    reconstruct_real_state,
)
from .linalg import hermitian_eig, kron, polar_unitarize, unitary_exp
from .oracle import SpectralOracle, exact_eigenpairs, exact_matrix_element
from .pauli import ModelParams, PauliString, PauliSum, build_model, exact_expectation
from .statevector import ShotPlan, StateVector, sample_pauli
from .superposition import MatrixElementResult, SuperpositionRun, full_matrix_element, run_superposition
from .twirl import TwirlOutcome, TwirlSchedule, extract_all_eigenstates, run_schedule, twirl_once

__version__ = "0.1.0"
