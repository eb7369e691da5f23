"""Time-restricted sensitivity and entropy on subshifts of finite type."""
from .capacity import avoider_nonempty, capacity_lp, capacity_orbit_upper
from .entropy import (
    RateProfile,
    bk_local_entropy_estimate,
    bk_profile,
    pack_count,
    topological_entropy,
)
from .kernels import BACKEND
from .measures import (
    MarkovMeasure,
    PeriodicOrbitMeasure,
    bernoulli,
    birkhoff_average,
    build_markov_measure,
    orbit_measure,
    parse_measure,
)
from .sensitivity import (
    RateEstimate,
    first_sensitive_time_measure,
    first_sensitive_time_top,
    rate_a1,
    rate_a2_profile,
    rate_mu_bowen,
    rate_mu_direct,
)
from .symbolic import (
    Cylinder,
    CylinderUnion,
    Sft,
    SymbolicPoint,
    bowen_cylinder,
    build_sft,
    full_shift,
    golden_mean_shift,
    parse_point,
    parse_sft,
    parse_union,
    rho,
    rho_n,
    word_count,
)

__version__ = "0.1.0"
