"""Pseudospectral laboratory for the relaxed Euler-Poisson model on a torus.

The package couples a dyadic-frequency analysis core (block decomposition,
Besov norms, paraproducts) with a pseudospectral integrator of the
hydrodynamic semiconductor equations and an exact per-mode linear oracle for
the exponential decay rates near equilibrium.
"""

from .errors import (
    CflViolationError,
    ConfigError,
    DomainViolationError,
    EplabError,
    GridTooCoarseError,
    NonPositiveDensityError,
    NonPositiveSeriesError,
    NonZeroMeanError,
    TooFewSamplesError,
)
from .spectral import (
    Grid,
    ScalarField,
    VectorField,
    curl,
    dealias,
    divergence,
    forward_transform,
    gradient,
    inverse_transform,
    l2_norm,
    padded_product,
    poisson_gradient,
    riesz_div_projection,
)
from .dyadic import (
    BesovIndex,
    DyadicCutoffs,
    bernstein_ratio,
    besov_norm,
    build_cutoffs,
    commutator_block,
    paraproduct,
    remainder,
)
from .model import (
    InitSpec,
    ModeSeed,
    Params,
    PrimitiveState,
    RandomSeedSpec,
    SymmetricState,
    Tendencies,
    compatible_init,
    constraint_residual,
    from_symmetric,
    h_of,
    rhs_primitive,
    rhs_symmetric,
    sound_speed,
    to_symmetric,
)
from .linear import (
    longitudinal_eigenvalues,
    predicted_decay_rate,
    solenoidal_rate,
    tau_scaling_curve,
)
from .timestep import StepControl, evolve, step
from .diagnostics import RunRecord, decay_fit, q_functional, vorticity_norm
from .config import RunConfig, emit_config, parse_config_text
from .runner import run_single, run_sweep

__version__ = "0.1.0"
