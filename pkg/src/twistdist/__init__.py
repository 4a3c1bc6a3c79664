"""Value statistics of quadratic-twist Dirichlet-polynomial families.

Two sides of one comparison: short Dirichlet polynomials over the real
characters of fundamental discriminants (the ``family`` module) and a
random multiplicative sign model with the matching local weights (the
``randmodel`` module), measured against each other in ``analysis`` via
moments, characteristic functions, inverted densities, rectangle
discrepancy, and small-value counts.
"""

from .analysis import (
    CharFnGrid,
    DensityGrid,
    DiscrepancyReport,
    PrimeSumDiagnostics,
    SADIKOVA_CONSTANT,
    berry_esseen_bound,
    berry_esseen_convergence,
    choose_inversion_box,
    discrepancy,
    empirical_char_grid,
    hat_phi,
    invert_density,
    model_char_grid,
    mp_factor,
    phi_empirical,
    phi_rand,
    phi_rand_tail_estimate,
    prime_sum_diagnostics,
    small_values,
)
from .coeffs import (
    SatakeProvider,
    file_provider,
    gl2_provider,
    hypothesis_h_partial,
    trivial_provider,
)
from .family import (
    FamilyConfig,
    arithmetic_moment,
    default_polynomial_length,
    euler_coprime_product,
    family_sweep,
    second_moment,
    short_polynomial,
    square_char_average,
)
from .kernels import BACKEND
from .ntcore import (
    FundamentalDiscriminant,
    PrimeTable,
    enumerate_discriminants,
    is_fundamental_discriminant,
    kronecker,
    mangoldt,
    sieve_primes,
)
from .randmodel import (
    RandomAssignment,
    RandomSeriesValue,
    exact_moment,
    expected_x,
    mc_moment,
    mc_value_set,
    random_partial_sum,
    sample_assignment,
    x_n,
)
from .samplesets import ComplexSampleSet

__version__ = "0.1.0"
