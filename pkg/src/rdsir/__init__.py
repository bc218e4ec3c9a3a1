"""Numerical laboratory for an SIR reaction-diffusion system driven by a
random diffusion coefficient and a randomly varying transmission rate.

The package simulates the coupled S/I/R fields on 1D/2D Dirichlet domains,
realizes the driving noise (Wiener paths, shifts, OU transmission), and
provides the asymptotic diagnostics: absorbing-set entry, the disease-free
pullback solution, pullback attractor samples, eradication/persistence
thresholds, and box-counting dimension estimates.
"""

__version__ = "0.1.0"

from .randomness import (
    NoisePath,
    TransmissionProcess,
    DiffusionField,
    sample_wiener_path,
    shift,
    ou_trace,
    transmission_trace,
    ou_transmission,
    make_diffusion_field,
    mean_value_m,
)
from .spatial import Grid, DiffusionOperator, SpectralData, build_grid, assemble_diffusion, first_eigenpair
from .dynamics import ModelParams, StateField, Trajectory, incidence, step_imex, simulate, solve_linear_N
from .asymptotics import (
    ThresholdReport,
    AttractorSample,
    disease_free_solution,
    disease_free_invariance_residual,
    pullback_attractor_sample,
    threshold_report,
    gronwall_envelope_check,
    persistence_functional,
    w_growth_check,
    box_counting_dimension,
)
from .harness import Scenario, RunManifest, load_scenario, run_scenario, ensemble_summary
