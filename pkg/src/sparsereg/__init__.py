"""Desk-scale sparse linear regression under Gaussian designs.

Generation of seeded problem instances, penalized convex solvers with
optimality certificates, a best-swap local search over supports, exhaustive
landscape analysis (overlap profiles, gap verdicts, swap-stable supports,
triplet inequalities, feasible-mix certificates), restricted-isometry
estimation, and a reproducible phase-diagram experiment runner.
"""

from .model import (
    Dimensions,
    Instance,
    RecoveryReport,
    SparseVector,
    Thresholds,
    gen_instance,
    load_instance,
    recovery_report,
    sample_beta_star,
    save_instance,
    thresholds,
)
from .lasso import (
    LassoConfig,
    LassoResult,
    kkt_residual,
    lambda_threshold,
    lemma_simple_check,
    solve_lasso,
    solve_lasso_path,
)
from .lsa import (
    LsaResult,
    LsaState,
    Move,
    apply_move,
    best_move,
    default_init,
    make_state,
    run_lsa,
    write_trace_jsonl,
)
from .landscape import (
    CertificateReport,
    DlmTriplet,
    OgpReport,
    OverlapProfile,
    PureNoiseFit,
    best_on_support,
    build_certificate,
    dlm_aggregate_bound,
    dlm_check,
    find_nontrivial_local_minima,
    ogp_check,
    overlap_profile,
    pure_noise_best_fit,
    with_noise_column,
)
from .rip import (
    RipConsequences,
    RipEstimate,
    TailTable,
    check_rip_consequences,
    operator_norm,
    quadratic_form_probe,
    rip_constant,
)
from .experiments import (
    GridSpec,
    SummaryRow,
    TrialRecord,
    dump_config,
    parse_config,
    records_to_csv,
    run_phase_grid,
    summarize,
)
from .supports import BudgetExceededError

__version__ = "0.1.0"
