"""Numerical laboratory for 2D Pauli operators with almost periodic fields.

Library layout:

- ``series``: certified evaluation of the lacunary sine series, its
  asymptotic constants and growth-law fits;
- ``expsums``: zone decomposition, discrete phase derivatives, the Van
  der Corput inequality, block periods and block sums;
- ``fields``: almost periodic field specs, potentials, flux, Poisson
  residuals and serialization;
- ``zeromodes``: kernel-dimension predictions, shell-integral
  verification, the spectral gap bound and the variational probe;
- ``spectral``: supersymmetric finite-box discretization, eigensolves,
  cluster counting, gauge and translation checks;
- ``cli``: the ``paulilab`` command-line front end.
"""

from .errors import (
    InvalidParameterError,
    InvalidRegimeError,
    PauliLabError,
    ResourceLimitError,
    ZoneDegenerateError,
)
from .series import (
    AsymptoticFit,
    CertifiedValue,
    SeriesParams,
    asymptotic_constant,
    eval_g_direct,
    eval_g_osc,
    eval_g_taylor,
    fit_asymptotics,
    global_log_bound,
    riemann_zeta,
)
from .expsums import (
    PhaseDerivative,
    ZonePartition,
    block_period,
    block_sum,
    discrete_derivative,
    leading_symbol,
    vdc_bound,
    zone_partition,
)
from .fields import (
    APFieldSpec,
    DecayingField,
    CosineFamilyField,
    FourierMode,
    ModesField,
    PotentialGrid,
    cosine_field,
    axes_cosine_family,
    equal_angle_family,
    field_eval,
    flux,
    mean_value,
    modes_field,
    poisson_residual,
    sample_potential_grid,
    scalar_potential,
    spec_from_config,
    spec_to_config,
    sublinear_potential,
    vector_potential,
)
from .zeromodes import (
    GrowthProfile,
    IntegrabilityOutcome,
    KerPrediction,
    equal_angle_admissible,
    gap_lower_bound,
    growth_profile,
    integrability_test,
    oscillation,
    predict_dim_ker,
    variational_gap_probe,
)
from .spectral import (
    GridOperator,
    SpectrumResult,
    assemble_pauli,
    build_annihilation,
    count_zero_cluster,
    gauge_check,
    low_spectrum,
    spectrum_for_spec,
    susy_pairing_check,
    translation_check,
    zero_cluster,
)

__version__ = "0.1.0"
