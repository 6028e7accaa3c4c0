"""Rotationally symmetric steady generalized Ricci solitons on R^3.

The profile ``(phi, f)`` of the metric ``dt^2 + phi^2 dsigma^2`` and the
torsion ``H = k phi^2 e^f dt ^ e^12`` is built from a power-series seed at
the singular origin and continued with an adaptive Runge-Kutta integrator.
"""

from .geometry import (
    GeometrySample,
    curvature_limit_q,
    geometry_along,
    geometry_at,
    log_h_density,
    richardson_limit,
    soliton_residual,
)
from .integrator import (
    OrbitCollapse,
    Termination,
    TerminationKind,
    Trajectory,
    integrate,
    rhs,
    sample_grid,
)
from .invariants import (
    AsymptoticFit,
    ConservedCheck,
    PropertyReport,
    PropositionCheck,
    PropositionViolated,
    check_propositions,
    conserved_at,
    est_bound,
    fit_asymptotics,
    pint_constant,
)
from .phase import (
    CrossValidation,
    PhaseState,
    PhaseTrajectory,
    constraint_residual,
    cross_validate,
    integrate_phase,
    phase_rhs,
    profile_r,
    to_phase,
)
from .powerseries import NonzeroConstantTerm, TruncSeries, ZeroConstantTerm
from .seed import (
    Q_CRITICAL,
    SQRT2,
    SeedExpansion,
    SingularLevel,
    SolitonParams,
    SolitonState,
    compute_seed,
    curvature_jet,
    eval_seed,
    q_from_ell,
    seed_residual,
)

__version__ = "0.1.0"
