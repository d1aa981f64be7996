"""Reversible ring-and-scatterer lattice dynamics and its diffusive limit."""

from .lattice import (
    Geometry, Site, ScattererField, OccupationState,
    j_indicator, tau, tau_inverse, tau_table, tau_inverse_table,
    step, step_backward, evolve, evolve_backward, ring_counts_at,
    sample_scatterers, sample_initial,
)
from .orbits import (
    Orbit, LoopDecomposition, orbit_of, loop_decomposition, period_histogram,
    generate_anomalous_field, ring_span,
)
from .diffusion import (
    DiffusionParams, FluxCounts, empirical_density, link_coefficients,
    diffusion_step, solve_diffusion, mass_defect, flux_counts,
    verify_flux_identity, molecular_chaos_residual,
)
from .ensemble import (
    EnsembleConfig, EnsembleReport, run_replica, run_ensemble,
    chebyshev_envelope, variance_envelope, lln_convergence_scan,
)

__version__ = "0.1.0"
