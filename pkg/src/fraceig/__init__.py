"""Discrete fractional-order Gagliardo forms on 1-D open sets: first
eigenvalues under an L^q constraint, positive ground states, and audits of
the inequalities that govern them."""

from .assembly import (
    DiscreteGagliardoForm,
    GridFunction,
    UniformGridSpec,
    apply_stiffness,
    assemble_form,
    assemble_form_subgrid,
    energy,
    form_from_json,
    form_to_json,
    lq_norm,
    tail,
)
from .audits import (
    HardyConstant,
    converse_linf_bound_audit,
    hardy_audit,
    hardy_constant,
    hopf_fit,
    linf_ratio_audit,
    min_principle_audit,
    picone_lane_emden_audit,
    sign_lemma_audit,
    subsolution_sup_audit,
    weighted_holder_audit,
)
from .domain import (
    OpenSet1D,
    dist_to_boundary,
    exterior_cone_params,
    intersect_ball,
    make_open_set,
    parse_domain,
    scale_set,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    EmptyDomainError,
    EmptyGridError,
    FracEigError,
    GridMismatchError,
    InvalidDomainError,
    InvalidParameterError,
    InvalidScaleError,
)
from .experiments import (
    ExperimentConfig,
    IsolationReport,
    run_audit_suite,
    run_convergence,
    run_experiment,
    run_isolation,
    run_q_continuity,
    run_qscan_super,
    suite_exit_code,
)
from .lane_emden import (
    LaneEmdenResult,
    comparison_check,
    exhaustion_sequence,
    free_energy,
    lane_emden_density,
    minimize_free_energy,
)
from .report import AuditReport
from .solvers import (
    CriticalPoint,
    CriticalPointSet,
    EigenSolveResult,
    conjugate_exponent,
    critical_point_search,
    faber_krahn_check,
    full_spectrum_q2,
    rayleigh,
    solve_lambda1,
    solve_lambda1_general,
)

__version__ = "1.0.0"

__all__ = [name for name in dir() if not name.startswith("_")]
