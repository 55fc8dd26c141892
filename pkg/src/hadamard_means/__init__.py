"""Inductive means and barycenters in Hadamard spaces, driven by orbits of
Kronecker systems."""

from .core import (
    DomainError,
    HadamardSpace,
    InequalitySlack,
    NumericError,
    check_convexity_of_distance,
    check_geodesic_convexity,
    check_reshetnyak,
    check_semiparallelogram,
    run_axiom_suite,
)
from .ergodic import (
    GOLDEN,
    ConvergenceTrace,
    KroneckerSystem,
    NonErgodicWarning,
    OrbitFunction,
    birkhoff_average,
    check_orbit_contraction,
    ergodic_inductive_run,
    estimate_pushforward_barycenter,
    multi_start_run,
    orbit,
)
from .means import (
    BarycenterResult,
    EmpiricalMeasure,
    InductiveState,
    check_contraction,
    check_diameter_bound,
    check_variance_inequality,
    check_weighted_inequality,
    diameter,
    inductive_mean,
    inductive_mean_batch,
    inductive_step,
    karcher_mean,
)
from .mollify import (
    ConvergenceError,
    MollifierConfig,
    check_barycenter_contraction,
    check_mollifier_stability,
    continuity_modulus,
    l1_distance,
    mollified_function,
    mollify,
    truncate,
)
from .spaces import (
    BrokenEuclideanSpace,
    EuclideanSpace,
    HyperboloidSpace,
    SPDSpace,
    euclid_distance,
    euclid_geodesic,
    hyperboloid_distance,
    hyperboloid_geodesic,
    parse_space,
    spd_distance,
    spd_geodesic,
)

__version__ = "0.1.0"
