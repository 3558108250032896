"""Intercept-resend eavesdropping fidelities of quantum signal ensembles."""

from .composite import (
    ProductEnsemble,
    QuantumnessGapReport,
    composite_quantumness,
    entanglement_gap_experiment,
    product_ensemble,
    product_fidelity_value,
)
from .ensembles import (
    Ensemble,
    EnsembleMap,
    FidelityReport,
    Method,
    ReconstructionStrategy,
    achievable_fidelity,
    apply_ensemble_map,
    average_fidelity,
    ensemble_map_of,
    maps_equal,
    optimal_reconstruction,
    projective_reproduction,
)
from .operators import (
    Povm,
    haar_random_state,
    haar_random_von_neumann,
    hs_inner,
    largest_eigenvalue,
    tensor,
    validate_povm,
)
from .optimization import (
    FiducialSearchConfig,
    MonteCarloConfig,
    PovmSearchConfig,
    accessible_fidelity_search,
    find_fiducial,
    frame_potential,
    haar_average_fidelity,
    haar_integral_closed_form,
)
from .structured_states import (
    MubCollection,
    SicEnsemble,
    WeylHeisenbergIndex,
    depolarizing_consistency,
    mub_construct,
    mub_ensemble,
    phi_closed_form,
    purity_from_probabilities,
    reconstruct_density,
    sic_from_fiducial,
    sic_probabilities,
    sic_uniqueness_check,
    verify_sic,
    wh_displacement,
)

__version__ = "0.1.0"

__all__ = [
    "ProductEnsemble",
    "QuantumnessGapReport",
    "composite_quantumness",
    "entanglement_gap_experiment",
    "product_ensemble",
    "product_fidelity_value",
    "Ensemble",
    "EnsembleMap",
    "FidelityReport",
    "Method",
    "ReconstructionStrategy",
    "achievable_fidelity",
    "apply_ensemble_map",
    "average_fidelity",
    "ensemble_map_of",
    "maps_equal",
    "optimal_reconstruction",
    "projective_reproduction",
    "Povm",
    "haar_random_state",
    "haar_random_von_neumann",
    "hs_inner",
    "largest_eigenvalue",
    "tensor",
    "validate_povm",
    "FiducialSearchConfig",
    "MonteCarloConfig",
    "PovmSearchConfig",
    "accessible_fidelity_search",
    "find_fiducial",
    "frame_potential",
    "haar_average_fidelity",
    "haar_integral_closed_form",
    "MubCollection",
    "SicEnsemble",
    "WeylHeisenbergIndex",
    "depolarizing_consistency",
    "mub_construct",
    "mub_ensemble",
    "phi_closed_form",
    "purity_from_probabilities",
    "reconstruct_density",
    "sic_from_fiducial",
    "sic_probabilities",
    "sic_uniqueness_check",
    "verify_sic",
    "wh_displacement",
]
