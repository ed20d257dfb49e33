"""Linear-optical quantum scissors: Fock-space simulation, heralded
truncation and parameter search."""

from .catalog import CatalogEntry, catalog, get_entry
from .circuit import (
    WIRINGS,
    BeamSplitter,
    Circuit,
    CircuitError,
    PhaseShifter,
    compile_circuit,
    load_circuit,
    preset,
)
from .conditioning import (
    DetectionPattern,
    SumMismatch,
    TargetPattern,
    TruncationProfile,
    herald,
    output_state,
    profile_fidelity,
    project,
    success_probability,
    truncation_profile,
)
from .evolution import apply_element, evolve, matrix_element, permanent
from .fock import (
    OccupationVector,
    SingleModeInput,
    StateVector,
    enumerate_basis,
    fidelity,
    make_input,
)
from .optimizer import (
    OptimizationProblem,
    OptimizeConfig,
    Solution,
    objective,
    optimize,
    verify_catalog,
)

__version__ = "0.1.0"
