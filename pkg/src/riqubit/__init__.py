"""Exact simulation and closed-form analysis of a qubit under repeated collisions
with thermal spin ancillas."""

from .analytic import (
    RelaxationSummary,
    coherence_sequence,
    eta,
    is_degenerate,
    predict_coherence,
    predict_population,
    psi,
    psi_tilde,
    steady_population,
    steady_population_short_tau,
    summarize,
)
from .collision import CollisionUnitary, StepMap, TrajectoryRecord, collision_unitary, ri_step, run_trajectory
from .errors import ConsistencyError, ContractViolation, DegenerateParametersError, NonConvergenceError
from .metrics import ConvergenceReport, fidelity, infidelity, n_star_bound_diagonal, n_star_numeric, trace_distance
from .model import QubitState, RIParams, effective_beta, thermal_ancilla, theta_phi, total_hamiltonian
from .protocols import ProtocolConfig, randomized_thermalization, regime_diagnostics, run_ensemble
from .thermo import (
    StepLedger,
    asymptotic_housekeeping,
    cumulative_work,
    step_energetics_closed,
    step_energetics_numeric,
)

__version__ = "0.1.0"
