"""Kernel scores, MMD and characteristic/universal kernel diagnostics.

Finite spaces (:mod:`charkern.measure`, :mod:`charkern.kernel`), Mercer
expansions and counterexamples (:mod:`charkern.spectral`), finite Abelian
groups (:mod:`charkern.group`) and spheres (:mod:`charkern.sphere`).
"""
from ._backend import NAME as BACKEND
from .exceptions import (
    CharkernError,
    DomainError,
    PreconditionError,
    PSDViolationError,
    SpaceMismatchError,
    ValidationError,
)
from .group import (
    GroupKernel,
    GroupSpec,
    character,
    coeffs_from_kernel,
    group_mercer_expansion,
    group_verdict,
    kernel_from_coeffs,
    product_group_kernel,
    real_onb,
    validate_z2_invariance,
)
from .kernel import (
    KernelSpec,
    KernelVerdict,
    kernel_score,
    kernel_scores,
    mmd_sq,
    plus_one,
    product_kernel,
    propriety_gap,
    sum_kernel,
    verdict,
)
from .measure import (
    Density,
    DiscreteSpace,
    SignedMeasure,
    density_to_measure,
    hahn_jordan,
    measure_to_density,
    mix,
    product_measure,
    tv_norm,
)
from .spectral import (
    MercerExpansion,
    mercer_decompose,
    mmd_sq_spectral,
    near_zero_mmd_pair,
    near_zero_mmd_pair_local,
    no_uniform_perturbation,
    spectral_verdict,
    zero_mmd_pair,
)

__version__ = "0.1.0"
