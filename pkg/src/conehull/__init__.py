"""conehull: random conical tessellations, Poisson hyperplane tessellations,
and a Monte Carlo verification harness."""

__version__ = "0.1.0"

from .arrangement import (
    ConicalArrangement,
    arrangement_face_census,
    enumerate_cones,
    expected_spherical_face_count,
    schlaefli_count,
    wendel_probability,
)
from .densities import (
    Ball,
    Constants,
    CoordinateRep,
    HalfSpace,
    beta_prime_density,
    eval_phi,
    eval_phi_n,
    expected_typical_cell_volume,
    exterior_inverse_power_integral,
    gamma_intensity,
    kappa,
    limit_density_factor,
    omega,
    pc_beta_prime,
    size_bias_weight,
)
from .errors import (
    ConehullError,
    ConfigError,
    DegenerateInput,
    EmptyWindow,
    IterationCap,
    NonGeneric,
    NotPointed,
    OriginNotInterior,
    SingularFrame,
    TiedFirstCoordinate,
    ZeroVolume,
)
from .geometry import (
    PolyhedralCone,
    Polytope,
    contains,
    convex_hull,
    extreme_rays,
    face_counts_spherical,
    polar_cone,
    polar_polytope,
    polytope_volume,
    solid_angle,
    solid_angle_mc,
)
from .harness import ExperimentConfig, ResultRecord, map_replicates, run_experiment
from .profiles import (
    Profile,
    TangentFrame,
    cell_profile,
    profile,
    sample_Pn_star,
    sample_Qn_star,
    tangent_frame,
)
from .rng import RngStream
from .samplers import (
    ConeSample,
    sample_cauchy_point,
    sample_cover_efron,
    sample_poisson_Pi,
    sample_r_n,
    sample_s_minus_e,
    sample_schlaefli_cone,
    sample_uniform_in_cell,
    sample_uniform_sphere,
)
from .stats import two_sample_energy_test
from .tessellation import (
    AffineHyperplane,
    Cell,
    cell_features,
    intensity_gamma,
    sample_pht,
    sample_typical_cell,
    sample_zero_cell,
)

__all__ = [
    "__version__",
    # errors
    "ConehullError", "ConfigError", "DegenerateInput", "EmptyWindow", "IterationCap",
    "NonGeneric", "NotPointed", "OriginNotInterior", "SingularFrame",
    "TiedFirstCoordinate", "ZeroVolume",
    # geometry
    "PolyhedralCone", "Polytope", "contains", "convex_hull", "extreme_rays",
    "face_counts_spherical", "polar_cone", "polar_polytope", "polytope_volume",
    "solid_angle", "solid_angle_mc",
    # arrangements
    "ConicalArrangement", "arrangement_face_census", "enumerate_cones",
    "expected_spherical_face_count", "schlaefli_count", "wendel_probability",
    # sampling
    "ConeSample", "RngStream", "sample_cauchy_point", "sample_cover_efron",
    "sample_poisson_Pi", "sample_r_n", "sample_s_minus_e", "sample_schlaefli_cone",
    "sample_uniform_in_cell", "sample_uniform_sphere",
    # profiles
    "Profile", "TangentFrame", "cell_profile", "profile", "sample_Pn_star",
    "sample_Qn_star", "tangent_frame",
    # tessellation
    "AffineHyperplane", "Cell", "cell_features", "intensity_gamma", "sample_pht",
    "sample_typical_cell", "sample_zero_cell",
    # densities
    "Ball", "Constants", "CoordinateRep", "HalfSpace", "beta_prime_density",
    "eval_phi", "eval_phi_n", "expected_typical_cell_volume",
    "exterior_inverse_power_integral", "gamma_intensity", "kappa",
    "limit_density_factor", "omega", "pc_beta_prime", "size_bias_weight",
    # harness
    "ExperimentConfig", "ResultRecord", "map_replicates", "run_experiment",
    "two_sample_energy_test",
]
