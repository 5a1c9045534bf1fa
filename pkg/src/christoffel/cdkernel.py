"""Christoffel-Darboux kernel and Christoffel function evaluation.

The kernel of a (possibly rank-deficient) moment matrix M is
``v(x)^T M^+ v(y)`` with the Moore-Penrose pseudo-inverse taken through
the spectral factorization.  The Christoffel function at x is the
minimum quadratic mass ``min {p^T M p : p^T v(x) = 1}``, which equals
``1 / (v^T M^+ v)`` when v(x) has no component in the kernel of M and 0
otherwise.  Both the closed form and an independent ridge-continuation
solver for the variational problem are provided, along with the
needle-polynomial construction used to localize the kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .basis import GradedBasis, chebyshev_T, eval_basis_vector
from .moments import (
    DEFAULT_THRESHOLD,
    RELATIVE,
    MomentMatrix,
    SpectralData,
    design_matrix,
    spectral,
)

__all__ = [
    "DEFAULT_KERNEL_TOL",
    "LambdaValue",
    "ChristoffelEvaluator",
    "pseudo_inverse_lambda",
    "RidgeContinuationError",
    "ridge_lambda",
    "lambda_variational_oracle",
    "perturbed_lambda",
    "NeedlePolynomial",
    "needle",
    "needle_eval",
    "supnorm_bound_check",
]

DEFAULT_KERNEL_TOL = 1e-6


class RidgeContinuationError(RuntimeError):
    """Raised when the ridge sequence fails to converge to a limit."""


@dataclass(frozen=True)
class LambdaValue:
    """Christoffel function value together with its kernel diagnostic.

    ``kernel_residual`` is the fraction (in norm) of the basis vector
    falling into the numerical kernel of the moment matrix; values at or
    below the kernel tolerance mark the point as on-support.
    """

    value: float
    kernel_residual: float


class ChristoffelEvaluator:
    """Evaluates the kernel and the Christoffel function of a moment matrix.

    Parameters
    ----------
    spectral_data : SpectralData
        Eigendecomposition of the moment matrix, with numerical rank.
    basis : GradedBasis
        Basis the moment matrix was assembled in.
    kernel_tol : float
        Residual tolerance deciding the on/off-support case split.

    Instances are immutable and safe for concurrent evaluation.
    """

    def __init__(
        self,
        spectral_data: SpectralData,
        basis: GradedBasis,
        kernel_tol: float = DEFAULT_KERNEL_TOL,
    ):
        if spectral_data.size != basis.size:
            raise ValueError(
                f"spectral data of size {spectral_data.size} does not match "
                f"basis of size {basis.size}"
            )
        self.spectral = spectral_data
        self.basis = basis
        self.kernel_tol = float(kernel_tol)
        rank = spectral_data.numerical_rank
        pinv = np.zeros(spectral_data.size)
        pinv[:rank] = 1.0 / spectral_data.eigenvalues[:rank]
        pinv.setflags(write=False)
        self.pinv_eigenvalues = pinv

    @property
    def rank(self) -> int:
        return self.spectral.numerical_rank

    def _coordinates(self, points) -> np.ndarray:
        # Basis vectors expressed in the eigenvector frame, one row per point.
        return design_matrix(points, self.basis) @ self.spectral.eigenvectors

    def kernel_diagonal(self, points) -> np.ndarray:
        """Kernel diagonal v(x)^T M^+ v(x) at each point."""
        coords = self._coordinates(points)
        r = self.rank
        return (coords[:, :r] ** 2 * self.pinv_eigenvalues[:r]).sum(axis=1)

    def kernel_matrix(self, left, right) -> np.ndarray:
        """Cross kernel v(x)^T M^+ v(y) for rows x of `left`, y of `right`."""
        r = self.rank
        cl = self._coordinates(left)[:, :r] * self.pinv_eigenvalues[:r]
        cr = self._coordinates(right)[:, :r]
        return cl @ cr.T

    def kernel(self, x, y) -> float:
        """Kernel value between two single points."""
        return float(self.kernel_matrix(np.atleast_2d(x), np.atleast_2d(y))[0, 0])

    def kernel_residuals(self, points) -> np.ndarray:
        """Norm fraction of each basis vector lying in the numerical kernel."""
        coords = self._coordinates(points)
        total = np.linalg.norm(coords, axis=1)
        tail = np.linalg.norm(coords[:, self.rank :], axis=1)
        return tail / total

    def lambda_values(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Christoffel function and kernel residual at each point.

        The value is ``1 / kernel_diagonal`` where the residual is within
        the kernel tolerance and 0 otherwise (the off-support branch of
        the pseudo-inverse formula).
        """
        coords = self._coordinates(points)
        r = self.rank
        diag = (coords[:, :r] ** 2 * self.pinv_eigenvalues[:r]).sum(axis=1)
        total = np.linalg.norm(coords, axis=1)
        residual = np.linalg.norm(coords[:, r:], axis=1) / total
        on_support = residual <= self.kernel_tol
        values = np.zeros_like(diag)
        np.divide(1.0, diag, out=values, where=on_support & (diag > 0.0))
        return values, residual

    def lambda_at(self, x) -> LambdaValue:
        """Christoffel function at a single point."""
        values, residuals = self.lambda_values(np.atleast_2d(x))
        return LambdaValue(float(values[0]), float(residuals[0]))

    def orthonormal_coefficients(self) -> np.ndarray:
        """Coefficient vectors of the orthonormal polynomials, one per column.

        Column j is the eigenvector of the j-th retained eigenvalue scaled
        by its inverse square root, so the polynomials have unit norm in
        the sample inner product and reproduce through the kernel.
        """
        r = self.rank
        return self.spectral.eigenvectors[:, :r] * np.sqrt(self.pinv_eigenvalues[:r])


def evaluator_for(
    matrix: MomentMatrix,
    threshold: float = DEFAULT_THRESHOLD,
    mode: str = RELATIVE,
    kernel_tol: float = DEFAULT_KERNEL_TOL,
) -> ChristoffelEvaluator:
    """Decompose a moment matrix and wrap it in an evaluator."""
    return ChristoffelEvaluator(spectral(matrix, threshold, mode), matrix.basis, kernel_tol)


def pseudo_inverse_lambda(
    matrix: np.ndarray,
    v: np.ndarray,
    threshold: float = DEFAULT_THRESHOLD,
    mode: str = RELATIVE,
    kernel_tol: float = DEFAULT_KERNEL_TOL,
) -> LambdaValue:
    """Constrained-minimum value through the pseudo-inverse case split.

    For a symmetric PSD matrix S and constraint vector v this is
    ``1 / (v^T S^+ v)`` when v is (numerically) orthogonal to the kernel
    of S, and 0 otherwise.
    """
    spec = spectral(np.asarray(matrix, dtype=float), threshold, mode)
    v = np.asarray(v, dtype=float)
    coords = spec.eigenvectors.T @ v
    r = spec.numerical_rank
    norm = np.linalg.norm(coords)
    if norm == 0.0:
        raise ValueError("constraint vector must be nonzero")
    residual = float(np.linalg.norm(coords[r:]) / norm)
    if residual > kernel_tol:
        return LambdaValue(0.0, residual)
    diag = float((coords[:r] ** 2 / spec.eigenvalues[:r]).sum())
    value = 1.0 / diag if diag > 0.0 else 0.0
    return LambdaValue(value, residual)


def ridge_lambda(
    matrix: np.ndarray,
    v: np.ndarray,
    ridge_sequence=None,
    rtol: float = 1e-7,
    atol: float = 1e-9,
) -> float:
    """Variational value ``min {p^T S p : p^T v = 1}`` by ridge continuation.

    Solves the regularized problem with S + l*I for a decreasing sequence
    of ridge parameters and extrapolates the limit l -> 0 from consecutive
    pairs (the regularized values decrease monotonically to the limit).
    Independent of the pseudo-inverse path, so the two can cross-validate.

    Raises
    ------
    RidgeContinuationError
        If the extrapolated values have not settled at the end of the
        sequence.
    """
    matrix = np.asarray(matrix, dtype=float)
    v = np.asarray(v, dtype=float)
    if ridge_sequence is None:
        ridge_sequence = 10.0 ** -np.arange(1, 9)
    ridge_sequence = np.asarray(ridge_sequence, dtype=float)
    if ridge_sequence.size < 2 or np.any(np.diff(ridge_sequence) >= 0):
        raise ValueError("ridge_sequence must be strictly decreasing with >= 2 entries")
    eye = np.eye(matrix.shape[0])
    values = []
    for level in ridge_sequence:
        try:
            y = scipy.linalg.solve(matrix + level * eye, v, assume_a="pos")
        except scipy.linalg.LinAlgError:
            y = scipy.linalg.solve(matrix + level * eye, v, assume_a="sym")
        values.append(1.0 / float(v @ y))
    extrapolated = []
    for k in range(len(values) - 1):
        ratio = ridge_sequence[k] / ridge_sequence[k + 1]
        extrapolated.append((ratio * values[k + 1] - values[k]) / (ratio - 1.0))
    last, prev = extrapolated[-1], extrapolated[-2]
    if abs(last - prev) > atol + rtol * abs(last):
        raise RidgeContinuationError(
            f"ridge continuation has not converged: last extrapolations "
            f"{prev:.6e} and {last:.6e}"
        )
    return max(float(last), 0.0)


def lambda_variational_oracle(matrix: MomentMatrix, x) -> float:
    """Christoffel function at x via the variational ridge continuation.

    Intended as an independent check of the pseudo-inverse formula on
    small problems; refuses matrices larger than 200 x 200.
    """
    if matrix.size > 200:
        raise ValueError("variational oracle is limited to size <= 200")
    v = eval_basis_vector(matrix.basis, np.asarray(x, dtype=float))
    return ridge_lambda(matrix.entries, v)


def _check_psd(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("perturbation must be a square matrix")
    scale = np.abs(a).max()
    if scale > 0 and np.abs(a - a.T).max() > 1e-10 * scale:
        raise ValueError("perturbation must be symmetric")
    eigenvalues = scipy.linalg.eigvalsh(a)
    if eigenvalues[0] < -1e-10 * max(eigenvalues[-1], 1e-300):
        raise ValueError("perturbation must be positive semidefinite")
    return a


def perturbed_lambda(
    matrix: MomentMatrix,
    perturbation: np.ndarray,
    level: float,
    x,
    threshold: float = DEFAULT_THRESHOLD,
    mode: str = RELATIVE,
    kernel_tol: float = DEFAULT_KERNEL_TOL,
) -> float:
    """Christoffel function of ``M + level * A`` at x, pseudo-inverse path.

    As the level decreases to 0 the value decreases to the unperturbed
    Christoffel function.
    """
    a = _check_psd(perturbation)
    if a.shape != matrix.entries.shape:
        raise ValueError("perturbation must match the moment matrix shape")
    if level < 0:
        raise ValueError("perturbation level must be non-negative")
    v = eval_basis_vector(matrix.basis, np.asarray(x, dtype=float))
    return pseudo_inverse_lambda(
        matrix.entries + level * a, v, threshold, mode, kernel_tol
    ).value


@dataclass(frozen=True)
class NeedlePolynomial:
    """Radial bump polynomial equal to 1 at the origin.

    ``Q(y) = R(|y|)`` with ``R(t) = T_d(1 + delta^2 - t^2) / T_d(1 + delta^2)``
    where T_d is the first-kind Chebyshev polynomial; Q has total degree
    2d, stays in [-1, 1] on the unit ball and is at most ``2**(1 - delta*d)``
    outside the delta-ball.  Evaluation goes through the Chebyshev
    recurrence at the shifted argument; the expanded monomial
    coefficients (available from :meth:`radial_coefficients`) are only
    reliable at small degree.
    """

    degree_parameter: int
    delta: float
    normalizer: float

    def radial_values(self, t) -> np.ndarray:
        """R(t) for scalar or array t."""
        t = np.asarray(t, dtype=float)
        arg = 1.0 + self.delta**2 - t**2
        return chebyshev_T(self.degree_parameter, arg) / self.normalizer

    def radial_coefficients(self) -> np.ndarray:
        """Monomial coefficients of R(t), ascending powers, length 2d + 1."""
        d = self.degree_parameter
        e_d = np.zeros(d + 1)
        e_d[d] = 1.0
        t_poly = np.polynomial.Polynomial(np.polynomial.chebyshev.cheb2poly(e_d))
        shifted = t_poly(np.polynomial.Polynomial([1.0 + self.delta**2, 0.0, -1.0]))
        coef = np.zeros(2 * d + 1)
        coef[: shifted.coef.size] = shifted.coef
        return coef / self.normalizer


def needle(d: int, delta: float) -> NeedlePolynomial:
    """Construct the needle polynomial for degree parameter d and width delta."""
    if d < 1:
        raise ValueError("degree parameter must be at least 1")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie strictly between 0 and 1")
    return NeedlePolynomial(d, float(delta), chebyshev_T(d, 1.0 + delta**2))


def needle_eval(q: NeedlePolynomial, y) -> float | np.ndarray:
    """Evaluate Q(y) = R(|y|) at one point (1-D input) or many (2-D input)."""
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        return float(q.radial_values(np.linalg.norm(y)))
    if y.ndim == 2:
        return q.radial_values(np.linalg.norm(y, axis=1))
    raise ValueError("point must be a vector or a matrix of row vectors")


def supnorm_bound_check(
    evaluator: ChristoffelEvaluator, points, coefficients
) -> tuple[float, float]:
    """Evaluate both sides of the sample sup-norm bound for a polynomial.

    Returns ``(lhs, rhs)`` where ``lhs`` is the largest squared value of
    the polynomial over the sample and ``rhs`` is the largest kernel
    diagonal times the mean squared value; the bound ``lhs <= rhs`` holds
    for any polynomial within the degree of the evaluator's basis.
    """
    coefficients = np.asarray(coefficients, dtype=float)
    if coefficients.shape != (evaluator.basis.size,):
        raise ValueError(
            f"coefficient vector must have length {evaluator.basis.size}"
        )
    values = design_matrix(points, evaluator.basis) @ coefficients
    squared = values**2
    lhs = float(squared.max())
    rhs = float(evaluator.kernel_diagonal(points).max() * squared.mean())
    return lhs, rhs
