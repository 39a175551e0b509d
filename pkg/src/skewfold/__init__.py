"""Skew unfolding of reflected paths, skew Brownian and Bessel processes,
and a two-particle system with skew-elastic collisions, with Monte Carlo
checks of the pathwise identities and laws they satisfy."""

from .errors import ConfigurationError, DomainError, GridMismatchError, SkewfoldError
from .excursions import (
    ExcursionDecomposition,
    UnfoldResult,
    decompose_excursions,
    draw_signs,
    unfold_conventional,
    unfold_skorokhod,
    unfold_with_signs,
)
from .local_time import (
    LocalTimeCurve,
    estimate_local_time,
    occupation_local_time,
    tanaka_local_time,
    upcrossing_local_time,
)
from .particles import (
    BaseSystem,
    ParticleParams,
    SkewSystemResult,
    auxiliary_brownians,
    build_skew_system,
    derive_skew_params,
    simulate_base,
)
from .paths import (
    RngStream,
    SamplePath,
    SemimartingalePath,
    TimeGrid,
    brownian_with_clock,
    euler_path,
    ito_integral,
    make_grid,
    quadratic_variation,
    sample_brownian,
)
from .processes import (
    NakaoResult,
    OconeResult,
    SkewBesselParams,
    bessel_scale_maps,
    nakao_solution,
    ocone_counterexample,
    skew_bessel,
    skew_brownian,
    squared_bessel,
)
from .reflection import ReflectionResult, conventional_reflect, levy_transform, sign, skorokhod_reflect
from .statistics import McSummary, identity_residual, mc_estimate, run_batches, sign_occupation

__version__ = "0.1.0"
