"""Scikit-learn style estimators wrapping the moment-matrix pipeline.

``ChristoffelFunction`` fits an empirical moment matrix and scores
points by their Christoffel function value (large on the support of the
training data, small or zero away from it).  ``ChristoffelDensity``
specializes it to boundary-free algebraic sets and scores with the
normalized value N(d) * Lambda, a density estimate with respect to the
uniform measure.  ``IntrinsicDimension`` fits rank-versus-degree curves
and exposes the selected dimension.  All three follow the usual
conventions (get_params/set_params, fitted attributes with trailing
underscores) and compose with pipelines and model selection tools.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .basis import CHEBYSHEV, basis_size, default_scale_box, enumerate_basis
from .cdkernel import DEFAULT_KERNEL_TOL, ChristoffelEvaluator
from .density import (
    DEFAULT_MEMBERSHIP_TOL,
    DensityGrid,
    OffSurfaceError,
    _as_surface,
    normalization_constant,
)
from .dimension import estimate_dimension, rank_curve
from .geometry import make_grid
from .moments import DEFAULT_THRESHOLD, RELATIVE, design_matrix, moment_matrix, spectral

__all__ = ["ChristoffelFunction", "ChristoffelDensity", "IntrinsicDimension"]


def _validated(X) -> np.ndarray:
    return check_array(X, dtype=np.float64, ensure_all_finite=True)


class ChristoffelFunction(BaseEstimator):
    """Empirical Christoffel function of a point cloud.

    Parameters
    ----------
    degree : int, default=4
        Maximum polynomial degree of the kernel.
    basis : {"chebyshev", "monomial"}, default="chebyshev"
        Evaluation basis; Chebyshev keeps the moment matrix
        well-conditioned.
    threshold : float, default=1e-10
        Numerical-rank cut-off for the eigenvalues of the moment matrix.
    threshold_mode : {"relative", "absolute"}, default="relative"
        Whether the threshold is scaled by the largest eigenvalue.
    kernel_tol : float, default=1e-6
        Kernel-residual tolerance separating on-support from off-support
        points.
    scale_box : array-like of shape (p, 2), optional
        Chebyshev rescaling box; defaults to the padded bounding box of
        the training data.

    Attributes
    ----------
    basis_ : GradedBasis
    moment_matrix_ : MomentMatrix
    spectral_ : SpectralData
    evaluator_ : ChristoffelEvaluator
    rank_ : int
        Numerical rank of the fitted moment matrix.
    """

    def __init__(
        self,
        degree: int = 4,
        basis: str = CHEBYSHEV,
        threshold: float = DEFAULT_THRESHOLD,
        threshold_mode: str = RELATIVE,
        kernel_tol: float = DEFAULT_KERNEL_TOL,
        scale_box=None,
    ):
        self.degree = degree
        self.basis = basis
        self.threshold = threshold
        self.threshold_mode = threshold_mode
        self.kernel_tol = kernel_tol
        self.scale_box = scale_box

    def fit(self, X, y=None):
        X = _validated(X)
        box = self.scale_box
        if box is None and self.basis == CHEBYSHEV:
            box = default_scale_box(X)
        self.basis_ = enumerate_basis(X.shape[1], self.degree, self.basis, box)
        design = design_matrix(X, self.basis_)
        self.moment_matrix_ = moment_matrix(design, self.basis_)
        self.spectral_ = spectral(self.moment_matrix_, self.threshold, self.threshold_mode)
        self.evaluator_ = ChristoffelEvaluator(self.spectral_, self.basis_, self.kernel_tol)
        self.rank_ = self.spectral_.numerical_rank
        self.n_features_in_ = X.shape[1]
        return self

    def _check_input(self, X) -> np.ndarray:
        check_is_fitted(self, "evaluator_")
        X = _validated(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        return X

    def lambda_values(self, X) -> np.ndarray:
        """Christoffel function at each row of X (0 off the support)."""
        return self.evaluator_.lambda_values(self._check_input(X))[0]

    def kernel_residuals(self, X) -> np.ndarray:
        """Fraction of each basis vector falling in the numerical kernel."""
        return self.evaluator_.kernel_residuals(self._check_input(X))

    def kernel_diagonal(self, X) -> np.ndarray:
        """Christoffel-Darboux kernel diagonal at each row of X."""
        return self.evaluator_.kernel_diagonal(self._check_input(X))

    def score_samples(self, X) -> np.ndarray:
        """Alias of :meth:`lambda_values`, higher meaning closer to the data."""
        return self.lambda_values(X)


class ChristoffelDensity(ChristoffelFunction):
    """Density estimation on a boundary-free algebraic set.

    Scores are N(d) * Lambda, an estimate of the density of the training
    cloud with respect to the uniform probability measure on the
    surface.

    Parameters
    ----------
    surface : str or SurfaceSpec, default="circle"
        One of ``"circle"``, ``"sphere"``, ``"bitorus"``.
    membership_tol : float, default=1e-6
        Largest implicit-equation residual accepted at fit time.

    Other parameters are inherited from :class:`ChristoffelFunction`.
    """

    def __init__(
        self,
        degree: int = 4,
        basis: str = CHEBYSHEV,
        threshold: float = DEFAULT_THRESHOLD,
        threshold_mode: str = RELATIVE,
        kernel_tol: float = DEFAULT_KERNEL_TOL,
        scale_box=None,
        surface="circle",
        membership_tol: float = DEFAULT_MEMBERSHIP_TOL,
    ):
        super().__init__(degree, basis, threshold, threshold_mode, kernel_tol, scale_box)
        self.surface = surface
        self.membership_tol = membership_tol

    def fit(self, X, y=None):
        X = _validated(X)
        spec = _as_surface(self.surface)
        residual = float(spec.implicit_residual(X).max())
        if residual > self.membership_tol:
            raise OffSurfaceError(spec.kind, residual, self.membership_tol)
        s = basis_size(X.shape[1], self.degree)
        if X.shape[0] < s:
            raise ValueError(
                f"need at least s(d) = {s} samples at degree {self.degree}, "
                f"got {X.shape[0]}"
            )
        super().fit(X)
        self.surface_ = spec
        self.normalization_ = normalization_constant(spec, self.degree)
        # sample diagnostics: mean kernel diagonal equals the rank
        self.sample_kernel_mean_ = float(self.kernel_diagonal(X).mean())
        return self

    def score_samples(self, X) -> np.ndarray:
        """Density estimate N(d) * Lambda at each row of X."""
        check_is_fitted(self, "normalization_")
        return self.normalization_.value * self.lambda_values(X)

    def evaluate_grid(self, resolution=None) -> DensityGrid:
        """Density estimate on the surface's standard evaluation grid."""
        check_is_fitted(self, "normalization_")
        grid = make_grid(self.surface_, resolution)
        lam, residuals = self.evaluator_.lambda_values(grid.points)
        return DensityGrid(
            grid=grid,
            values=self.normalization_.value * lam,
            kernel_residuals=residuals,
            degree=self.degree,
            sample_count=self.moment_matrix_.sample_count,
            normalization=self.normalization_,
            rank=self.rank_,
            sample_kernel_mean=self.sample_kernel_mean_,
        )


class IntrinsicDimension(BaseEstimator):
    """Intrinsic dimension of data supported on an algebraic set.

    Fits the numerical rank of the moment matrix across a degree window
    and selects the smallest polynomial degree in d that interpolates
    the curve within a relative residual gate.

    Parameters
    ----------
    degrees : sequence of int, default=(5, ..., 12)
        Strictly increasing degree window.
    basis : {"chebyshev", "monomial"}, default="chebyshev"
    threshold : float, default=1e-10
        Relative singular-value cut-off for the rank computation.
    rel_fit_tol : float, default=1e-2
        Residual gate as a fraction of the mean observed rank.

    Attributes
    ----------
    rank_curve_ : RankCurve
    estimate_ : DimensionEstimate
    dimension_ : int
    """

    def __init__(
        self,
        degrees=tuple(range(5, 13)),
        basis: str = CHEBYSHEV,
        threshold: float = DEFAULT_THRESHOLD,
        rel_fit_tol: float = 1e-2,
    ):
        self.degrees = degrees
        self.basis = basis
        self.threshold = threshold
        self.rel_fit_tol = rel_fit_tol

    def fit(self, X, y=None):
        X = _validated(X)
        self.rank_curve_ = rank_curve(
            X, list(self.degrees), kind=self.basis, threshold=self.threshold
        )
        self.estimate_ = estimate_dimension(
            self.rank_curve_, X.shape[1], rel_fit_tol=self.rel_fit_tol
        )
        self.dimension_ = self.estimate_.selected_dimension
        self.n_features_in_ = X.shape[1]
        return self
