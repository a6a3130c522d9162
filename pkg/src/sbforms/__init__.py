"""Sobolev-Bregman forms of symmetric Markov generators.

Finite models (:mod:`~sbforms.model`), exact semigroups
(:mod:`~sbforms.semigroup`), the p-form by several routes
(:mod:`~sbforms.forms`), scalar inequalities and their sweeps
(:mod:`~sbforms.scalar`, :mod:`~sbforms.inequalities`), the Hardy-Stein
balance (:mod:`~sbforms.hardy_stein`) and one-dimensional grid models
(:mod:`~sbforms.euclid`).
"""

from .euclid import (
    EnergyMeasureDensity,
    EuclideanSpec,
    Grid1D,
    SingularIntegrandError,
    build_diffusion,
    build_fractional,
    continuum_ep,
    energy_measure,
    fractional_spec,
    lejan_check,
    local_constant_study,
)
from .forms import (
    ApproxForm,
    Comparability,
    FormBreakdown,
    bd_form_p,
    bregman_jump,
    comparability_check,
    dirichlet_form,
    energy,
    ep_approx,
    ep_domain_witness,
    ep_generator,
)
from .hardy_stein import HardySteinReport, decay_curve, hardy_stein
from .inequalities import (
    LemmaSample,
    classify_region,
    key_bound_residual,
    region_bound_check,
    stroock_check,
    sweep,
)
from .model import (
    BeurlingDenyData,
    FiniteModel,
    InvalidModelError,
    ModelError,
    ModelFileError,
    SchemaError,
    assemble,
    decompose,
    load_model,
    random_model,
    save_model,
    validate_model,
)
from .quadrature import QuadratureError, adaptive_simpson
from .scalar import LemmaParams, bregman_F, phi, phi_n, psi_n, signed_pow
from .semigroup import (
    EigenConvergenceError,
    SpectralSemigroup,
    apply_Tt,
    limit_infinity,
    lp_norm,
    spectral_decompose,
)

__version__ = "0.1.0"
