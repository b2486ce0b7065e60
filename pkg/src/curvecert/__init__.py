"""Validated-numerics toolkit certifying a normally hyperbolic invariant
curve of the quasi-periodically driven logistic map.

Layers, bottom up: outward-rounded interval arithmetic on software floats
(`intervals`), univariate Taylor jets with rigorous polynomial edge bounds
(`jets`), the covering/cone algebra of ch-sets (`cones`), the itinerary
verifier (`chain`), the driven-map analytics (`logistic`), the strip-based
proof pipeline (`strips`), and certificates plus a CLI.
"""

from .certificate import Certificate, Record, recheck
from .chain import (
    ChainCertificate,
    ItineraryPlan,
    LocalMapStep,
    check_main_inequality,
    verify_backward_bounds,
    verify_forward_bounds,
)
from .cones import (
    BoundMatrix,
    ChSet,
    Gamma,
    c_matrix,
    check_chart_transition,
    check_final_cone,
    covering_step,
    g_matrix,
    propagate_cone,
    q_form,
    t_matrix,
)
from .errors import (
    BranchInconsistent,
    ConeSignLoss,
    ConfigError,
    DegenerateOrbit,
    DimensionMismatch,
    DomainViolation,
    GapCollapse,
    GuessOutOfDomain,
    LeftAmbientBox,
    MonotonicityUnverified,
    NoSolution,
    PrecisionExhausted,
    RadiusCollapse,
    RigorError,
    SingularOrUnverifiable,
    UnsupportedSignature,
)
from .intervals import Context, Interval, IntervalMatrix, elementary, golden_ratio
from .jets import (
    Jet,
    Polynomial,
    RemainderBound,
    centered_bounds,
    edge_lower,
    edge_upper,
    jet_of_composition,
)
from .logistic import (
    DrivenLogisticParams,
    LyapunovRun,
    averaged_lyapunov,
    curve_approx,
    frozen_period2,
    inverse_t2,
    invariance_residual,
    lyapunov_sums,
    oscillation_prediction,
    predict_departure_landing,
    simulate_attractor,
    step,
)
from .strips import (
    CurveGuess,
    CurveStrip,
    ProofConfig,
    build_initial_strips,
    check_strip_covering,
    check_strip_inside,
    image_strip,
    run_full_proof,
    verify_cones_on_cover,
)

__version__ = "0.1.0"
