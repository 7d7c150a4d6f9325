"""Exact diagonalization of the trapped-ion Jaynes-Cummings-Hubbard model."""

from .crystal import (
    IonChainGeometry,
    ModelParameters,
    PhysicalTrapConfig,
    RadialModeSet,
    SqueezedStateAmplitudes,
    equilibrium_positions,
    mode_matrix,
    physical_to_model,
    radial_modes,
    site_couplings,
    squeezed_amplitudes,
)
from .errors import CapacityError, ConsistencyError, DomainError, IonJCHError, SolverError
from .fockspace import SectorBasis, apply_ladder, build_sector
from .hamiltonian import HamiltonianSpec, SymmetricOperator, build, conservation_check
from .observables import (
    MottCurve,
    ObservableSet,
    measure,
    mott_lobes,
    single_site_ground_energy,
    superfluid_reference,
)
from .solver import GroundStateResult, ground_state
from .sweeps import SweepResult, SweepSpec, classify_phases, run_sweep

__version__ = "0.1.0"
