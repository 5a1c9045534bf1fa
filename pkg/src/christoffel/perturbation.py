"""Noise sweeps: Christoffel function stability under vanishing noise.

Adding isotropic Gaussian noise to an on-surface cloud makes the moment
matrix full rank; as the noise scale decreases the Christoffel function
on the surface converges back to the noiseless one.  The sweep tracks
the mean absolute deviation from the noiseless reference across a
ladder of decreasing scales.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import CHEBYSHEV, default_scale_box, enumerate_basis
from .cdkernel import DEFAULT_KERNEL_TOL, ChristoffelEvaluator
from .density import DEFAULT_MEMBERSHIP_TOL, Normalization, OffSurfaceError, _as_surface
from .density import normalization_constant
from .geometry import EvaluationGrid, make_grid, _rng
from .moments import (
    DEFAULT_THRESHOLD,
    RELATIVE,
    as_point_cloud,
    design_matrix,
    moment_matrix,
    spectral,
)

__all__ = ["NoiseLadder", "NoiseLevelResult", "NoiseSweepResult", "noise_sweep"]


@dataclass(frozen=True)
class NoiseLadder:
    """Base cloud plus a strictly decreasing ladder of noise scales.

    Each scale is the per-coordinate standard deviation of isotropic
    Gaussian noise; a trailing scale of exactly 0 reproduces the base
    cloud.  One noise realization (drawn from the seed) is shared across
    scales so deviations vary smoothly along the ladder.
    """

    base_points: np.ndarray
    sigmas: tuple[float, ...]
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "base_points", as_point_cloud(self.base_points))
        sigmas = tuple(float(s) for s in self.sigmas)
        if len(sigmas) < 1:
            raise ValueError("noise ladder needs at least one scale")
        if any(s < 0 for s in sigmas):
            raise ValueError("noise scales must be non-negative")
        if any(b >= a for a, b in zip(sigmas, sigmas[1:])):
            raise ValueError("noise scales must be strictly decreasing")
        object.__setattr__(self, "sigmas", sigmas)


@dataclass(frozen=True)
class NoiseLevelResult:
    """Grid values at one noise scale and their deviation from noiseless."""

    sigma: float
    values: np.ndarray  # N(d) * Lambda on the grid
    kernel_residuals: np.ndarray
    deviation: float  # mean |Lambda_sigma - Lambda_0| over the grid


@dataclass(frozen=True)
class NoiseSweepResult:
    """Per-scale grids plus the noiseless reference grid."""

    grid: EvaluationGrid
    degree: int
    normalization: Normalization
    reference_values: np.ndarray
    reference_residuals: np.ndarray
    levels: tuple[NoiseLevelResult, ...]

    @property
    def deviations(self) -> np.ndarray:
        return np.array([lvl.deviation for lvl in self.levels])


def _lambda_on_grid(points, degree, grid, kind, threshold, mode, kernel_tol):
    # Raw kernel-diagonal reciprocal: the off-support extension of the
    # Christoffel function, finite for full-rank (noisy) matrices and
    # equal to the on-support value for the noiseless reference.
    cloud = as_point_cloud(points)
    box = default_scale_box(cloud) if kind == CHEBYSHEV else None
    basis = enumerate_basis(cloud.shape[1], degree, kind, box)
    matrix = moment_matrix(design_matrix(cloud, basis), basis)
    evaluator = ChristoffelEvaluator(spectral(matrix, threshold, mode), basis, kernel_tol)
    diag = evaluator.kernel_diagonal(grid.points)
    residuals = evaluator.kernel_residuals(grid.points)
    values = np.zeros_like(diag)
    np.divide(1.0, diag, out=values, where=diag > 0.0)
    return values, residuals


def noise_sweep(
    ladder: NoiseLadder,
    degree: int,
    grid: EvaluationGrid | None = None,
    surface="circle",
    kind: str = CHEBYSHEV,
    threshold: float = DEFAULT_THRESHOLD,
    mode: str = RELATIVE,
    kernel_tol: float = DEFAULT_KERNEL_TOL,
    membership_tol: float = DEFAULT_MEMBERSHIP_TOL,
) -> NoiseSweepResult:
    """Evaluate the Christoffel function on a grid across noise scales.

    The base cloud must lie on the surface; the grid defaults to the
    surface's standard grid.  Values are reported as N(d) * Lambda (same
    convention as density grids) while deviations compare the raw Lambda
    values against the noiseless reference.
    """
    spec = _as_surface(surface)
    base = ladder.base_points
    residual = float(spec.implicit_residual(base).max())
    if residual > membership_tol:
        raise OffSurfaceError(spec.kind, residual, membership_tol)
    if grid is None:
        grid = make_grid(spec)
    norm = normalization_constant(spec, degree)
    noise = _rng(ladder.seed).standard_normal(base.shape)

    ref_lambda, ref_residuals = _lambda_on_grid(
        base, degree, grid, kind, threshold, mode, kernel_tol
    )
    levels = []
    for sigma in ladder.sigmas:
        lam, residuals = _lambda_on_grid(
            base + sigma * noise, degree, grid, kind, threshold, mode, kernel_tol
        )
        levels.append(
            NoiseLevelResult(
                sigma=sigma,
                values=norm.value * lam,
                kernel_residuals=residuals,
                deviation=float(np.abs(lam - ref_lambda).mean()),
            )
        )
    return NoiseSweepResult(
        grid=grid,
        degree=degree,
        normalization=norm,
        reference_values=norm.value * ref_lambda,
        reference_residuals=ref_residuals,
        levels=tuple(levels),
    )
