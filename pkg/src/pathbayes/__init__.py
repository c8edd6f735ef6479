"""Posterior densities for diffusing hidden states, four ways.

``chain`` runs the discrete Bayes recursion, ``pde`` a split-step solver of
the imaginary-time diffusion equation, ``analytic`` the Hermite-mode closed
form for a Gaussian likelihood and ``fock`` a truncated ladder-operator
integrator. The backends are built to agree with each other.
"""
from .analytic import AuxIntegrals, ClosedFormPosterior, analytic_run, aux_integrals, posterior_closed_form
from .core import Density, Grid, ModelParams, gaussian_density, grid_new, l1_distance, moments, renormalize
from .errors import (
    DeadPosteriorError,
    GridMismatchError,
    GridTooSmallError,
    IncompatiblePotentialError,
    PathBayesError,
    RangeError,
    TruncationError,
    VerificationError,
)
from .fock import (
    LadderMatrices,
    bch_conjugation_check,
    expm,
    fock_run,
    ladder_matrices,
    magnus_commutator,
    nested_commutator_norm,
)
from .hermite import FockState, HermiteBasis, hermite_fn, hermite_table, project_prior
from .kernel import (
    ObservationSeries,
    Potential,
    chain_run,
    chain_step,
    chapman_kolmogorov_check,
    diffuse,
    free_propagator_value,
    likelihood_weight,
)
from .scenario import (
    BACKENDS,
    ComparisonReport,
    PriorSpec,
    Scenario,
    desk_scenario,
    run_comparison,
    sample_latent_path,
    sample_observations,
)
from .schrodinger import pde_run, pde_step

__version__ = "0.1.0"

__all__ = [
    "AuxIntegrals", "BACKENDS", "ClosedFormPosterior", "ComparisonReport", "DeadPosteriorError",
    "Density", "FockState", "Grid", "GridMismatchError", "GridTooSmallError", "HermiteBasis",
    "IncompatiblePotentialError", "LadderMatrices", "ModelParams", "ObservationSeries",
    "PathBayesError", "Potential", "PriorSpec", "RangeError", "Scenario", "TruncationError",
    "VerificationError", "analytic_run", "aux_integrals", "bch_conjugation_check", "chain_run",
    "chain_step", "chapman_kolmogorov_check", "desk_scenario", "diffuse", "expm", "fock_run",
    "free_propagator_value", "gaussian_density", "grid_new", "hermite_fn", "hermite_table",
    "l1_distance", "ladder_matrices", "likelihood_weight", "magnus_commutator", "moments",
    "nested_commutator_norm", "pde_run", "pde_step", "posterior_closed_form", "project_prior",
    "renormalize", "run_comparison", "sample_latent_path", "sample_observations",
]
