"""Empirical moment matrices and the Christoffel-Darboux kernel machinery.

The package builds moment matrices from point clouds, decomposes them,
and uses the spectrum for two tasks: reading the intrinsic dimension of
data supported on an algebraic set from the growth of the numerical
rank, and estimating densities on boundary-free algebraic sets (circle,
sphere, bi-torus) through the normalized Christoffel function.
"""

from .basis import (
    GradedBasis,
    MultiIndex,
    basis_size,
    chebyshev_T,
    default_scale_box,
    enumerate_basis,
    eval_basis_matrix,
    eval_basis_vector,
    monomial_conversion_matrix,
)
from .cdkernel import (
    ChristoffelEvaluator,
    LambdaValue,
    NeedlePolynomial,
    RidgeContinuationError,
    lambda_variational_oracle,
    needle,
    needle_eval,
    perturbed_lambda,
    pseudo_inverse_lambda,
    ridge_lambda,
    supnorm_bound_check,
)
from .density import (
    DensityGrid,
    Normalization,
    convergence_experiment,
    estimate_density,
    normalization_constant,
    sphere_N,
)
from .dimension import (
    DimensionEstimate,
    RankCurve,
    RankObservation,
    estimate_dimension,
    fit_hilbert,
    hilbert_oracle,
    rank_curve,
)
from .estimators import ChristoffelDensity, ChristoffelFunction, IntrinsicDimension
from .geometry import (
    EvaluationGrid,
    SurfaceSpec,
    default_resolution,
    embed_angles,
    make_grid,
    sample,
)
from .moments import (
    MomentMatrix,
    SpectralData,
    SpectralDecompositionError,
    as_point_cloud,
    design_matrix,
    kernel_basis,
    load_moment_cache,
    moment_matrix,
    save_moment_cache,
    spectral,
    spectral_from_design,
)
from .perturbation import NoiseLadder, NoiseSweepResult, noise_sweep

__version__ = "0.1.0"

__all__ = [
    "GradedBasis",
    "MultiIndex",
    "basis_size",
    "chebyshev_T",
    "default_scale_box",
    "enumerate_basis",
    "eval_basis_matrix",
    "eval_basis_vector",
    "monomial_conversion_matrix",
    "ChristoffelEvaluator",
    "LambdaValue",
    "NeedlePolynomial",
    "RidgeContinuationError",
    "lambda_variational_oracle",
    "needle",
    "needle_eval",
    "perturbed_lambda",
    "pseudo_inverse_lambda",
    "ridge_lambda",
    "supnorm_bound_check",
    "DensityGrid",
    "Normalization",
    "convergence_experiment",
    "estimate_density",
    "normalization_constant",
    "sphere_N",
    "DimensionEstimate",
    "RankCurve",
    "RankObservation",
    "estimate_dimension",
    "fit_hilbert",
    "hilbert_oracle",
    "rank_curve",
    "ChristoffelDensity",
    "ChristoffelFunction",
    "IntrinsicDimension",
    "EvaluationGrid",
    "SurfaceSpec",
    "default_resolution",
    "embed_angles",
    "make_grid",
    "sample",
    "MomentMatrix",
    "SpectralData",
    "SpectralDecompositionError",
    "as_point_cloud",
    "design_matrix",
    "kernel_basis",
    "load_moment_cache",
    "moment_matrix",
    "save_moment_cache",
    "spectral",
    "spectral_from_design",
    "NoiseLadder",
    "NoiseSweepResult",
    "noise_sweep",
]
