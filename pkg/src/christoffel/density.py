"""Density estimation on boundary-free algebraic sets.

On the circle, the sphere and the bi-torus the Christoffel function of
the uniform (rotation-invariant) measure is constant and equal to the
reciprocal of the polynomial-space dimension N(d).  Multiplying the
empirical Christoffel function by N(d) therefore yields a density
estimate relative to the uniform probability measure, converging
uniformly as the degree grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import CHEBYSHEV, basis_size, default_scale_box, enumerate_basis
from .cdkernel import DEFAULT_KERNEL_TOL, ChristoffelEvaluator
from .geometry import (
    BITORUS,
    CIRCLE,
    SPHERE,
    EvaluationGrid,
    SurfaceSpec,
    _rng,
    make_grid,
    sample_with,
)
from .moments import (
    DEFAULT_THRESHOLD,
    RELATIVE,
    as_point_cloud,
    design_matrix,
    moment_matrix,
    spectral,
)

__all__ = [
    "OffSurfaceError",
    "sphere_N",
    "Normalization",
    "normalization_constant",
    "DensityGrid",
    "estimate_density",
    "ConvergenceRow",
    "convergence_experiment",
    "sample_from_density",
]

DEFAULT_MEMBERSHIP_TOL = 1e-6


class OffSurfaceError(ValueError):
    """Input cloud does not lie on the requested surface."""

    def __init__(self, kind: str, residual: float, tol: float):
        self.residual = residual
        super().__init__(
            f"cloud is not on the {kind}: max membership residual "
            f"{residual:.3e} exceeds tolerance {tol:.1e}"
        )


def sphere_N(p: int, d: int) -> int:
    """Dimension of the polynomials of degree <= d on the sphere in R^p."""
    if p < 2:
        raise ValueError("the sphere normalization needs ambient dimension >= 2")
    if d < 0:
        raise ValueError("degree must be non-negative")
    return math.comb(p + d - 1, p - 1) + math.comb(p + d - 2, p - 1)


@dataclass(frozen=True)
class Normalization:
    """Degree-dependent constant N(d) scaling the Christoffel function."""

    surface_kind: str
    degree: int
    value: int


def normalization_constant(surface, d: int) -> Normalization:
    """N(d) for a surface carrying a uniform reference measure.

    Circle: 2d + 1.  Sphere in R^p: the two-binomial sum.  Bi-torus:
    2d^2 + 2d + 1 (the number of Fourier pairs (k, l) with |k|+|l| <= d).
    Other surfaces have no uniform-reference normalization here.
    """
    if isinstance(surface, SurfaceSpec):
        kind, p = surface.kind, surface.ambient_dim
    else:
        kind, p = str(surface), {CIRCLE: 2, SPHERE: 3, BITORUS: 4}.get(str(surface), 3)
    if kind == CIRCLE:
        return Normalization(kind, d, 2 * d + 1)
    if kind == SPHERE:
        return Normalization(kind, d, sphere_N(p, d))
    if kind == BITORUS:
        return Normalization(kind, d, 2 * d * d + 2 * d + 1)
    raise ValueError(f"no uniform-reference normalization for surface {kind!r}")


@dataclass(frozen=True)
class DensityGrid:
    """Normalized Christoffel values N(d) * Lambda on an evaluation grid.

    ``sample_kernel_mean`` is the sample average of the kernel diagonal,
    which equals the numerical rank up to rounding and serves as a
    consistency diagnostic for every fitted moment matrix.
    """

    grid: EvaluationGrid
    values: np.ndarray
    kernel_residuals: np.ndarray
    degree: int
    sample_count: int
    normalization: Normalization
    rank: int
    sample_kernel_mean: float


def _as_surface(surface) -> SurfaceSpec:
    return surface if isinstance(surface, SurfaceSpec) else SurfaceSpec(str(surface))


def estimate_density(
    points,
    surface,
    degree: int,
    grid: EvaluationGrid | None = None,
    kind: str = CHEBYSHEV,
    threshold: float = DEFAULT_THRESHOLD,
    mode: str = RELATIVE,
    kernel_tol: float = DEFAULT_KERNEL_TOL,
    membership_tol: float = DEFAULT_MEMBERSHIP_TOL,
    scale_box=None,
) -> DensityGrid:
    """Estimate the density of an on-surface cloud on an evaluation grid.

    Builds the empirical moment matrix of the cloud, evaluates the
    Christoffel function on the grid through the pseudo-inverse, and
    scales by N(d).

    Parameters
    ----------
    points : array-like of shape (n, p)
        Cloud lying on the surface to within ``membership_tol``.
    surface : SurfaceSpec or str
        One of the boundary-free surfaces (circle, sphere, bi-torus).
    degree : int
        Kernel degree; the sample must satisfy n >= s(degree).
    grid : EvaluationGrid, optional
        Defaults to the surface's standard grid.

    Raises
    ------
    OffSurfaceError
        If the membership residual of the cloud exceeds the tolerance.
    """
    spec = _as_surface(surface)
    cloud = as_point_cloud(points)
    residual = float(spec.implicit_residual(cloud).max())
    if residual > membership_tol:
        raise OffSurfaceError(spec.kind, residual, membership_tol)
    s = basis_size(cloud.shape[1], degree)
    if cloud.shape[0] < s:
        raise ValueError(
            f"need at least s(d) = {s} samples at degree {degree}, "
            f"got {cloud.shape[0]}"
        )
    norm = normalization_constant(spec, degree)
    if grid is None:
        grid = make_grid(spec)
    if kind == CHEBYSHEV and scale_box is None:
        scale_box = default_scale_box(cloud)
    basis = enumerate_basis(cloud.shape[1], degree, kind, scale_box)
    design = design_matrix(cloud, basis)
    matrix = moment_matrix(design, basis)
    evaluator = ChristoffelEvaluator(spectral(matrix, threshold, mode), basis, kernel_tol)
    lam, residuals = evaluator.lambda_values(grid.points)
    # kernel diagonal over the sample, reusing the design matrix
    coords = design @ evaluator.spectral.eigenvectors
    r = evaluator.rank
    diag = (coords[:, :r] ** 2 * evaluator.pinv_eigenvalues[:r]).sum(axis=1)
    return DensityGrid(
        grid=grid,
        values=norm.value * lam,
        kernel_residuals=residuals,
        degree=degree,
        sample_count=cloud.shape[0],
        normalization=norm,
        rank=r,
        sample_kernel_mean=float(diag.mean()),
    )


def sample_from_density(
    surface,
    n: int,
    seed: int,
    density=None,
    density_max: float = 1.0,
) -> np.ndarray:
    """Sample n surface points from a density w.r.t. the uniform measure.

    Rejection sampling against the surface's uniform sampler; ``density``
    is a callable on embedded points and must be bounded by
    ``density_max``.  ``density=None`` falls back to the uniform sampler.
    """
    spec = _as_surface(surface)
    if density is None:
        return sample_with(_rng(seed), spec, n)
    if density_max <= 0:
        raise ValueError("density_max must be positive")
    rng = _rng(seed)
    out = np.empty((n, spec.ambient_dim))
    filled = 0
    while filled < n:
        m = max(2 * (n - filled), 64)
        candidates = sample_with(rng, spec, m)
        ratio = np.asarray(density(candidates), dtype=float) / density_max
        if np.any(ratio > 1.0 + 1e-12):
            raise ValueError("density exceeds density_max on the surface")
        accepted = candidates[rng.uniform(0.0, 1.0, m) <= ratio]
        take = min(accepted.shape[0], n - filled)
        out[filled : filled + take] = accepted[:take]
        filled += take
    return out


@dataclass(frozen=True)
class ConvergenceRow:
    """Seed-averaged grid errors of the density estimate at one degree."""

    degree: int
    sup_error: float
    mean_error: float
    seed_sup_errors: tuple[float, ...]


def convergence_experiment(
    surface,
    degrees,
    n: int,
    seeds,
    density=None,
    density_max: float = 1.0,
    resolution=None,
    kind: str = CHEBYSHEV,
    threshold: float = DEFAULT_THRESHOLD,
) -> list[ConvergenceRow]:
    """Sup and mean grid error of N(d) * Lambda against a target density.

    For each seed a fresh cloud of size n is drawn from the density (by
    rejection against the uniform sampler), the estimate is computed for
    every degree, and errors against the target are averaged over seeds.
    The target defaults to the constant 1 (the uniform reference).
    """
    spec = _as_surface(surface)
    grid = make_grid(spec, resolution)
    target = (
        np.ones(grid.points.shape[0])
        if density is None
        else np.asarray(density(grid.points), dtype=float)
    )
    seeds = list(seeds)
    degrees = list(degrees)
    sup_errors = np.zeros((len(seeds), len(degrees)))
    mean_errors = np.zeros_like(sup_errors)
    for i, seed in enumerate(seeds):
        cloud = sample_from_density(spec, n, seed, density, density_max)
        for j, d in enumerate(degrees):
            est = estimate_density(
                cloud, spec, d, grid=grid, kind=kind, threshold=threshold
            )
            err = np.abs(est.values - target)
            sup_errors[i, j] = err.max()
            mean_errors[i, j] = err.mean()
    rows = []
    for j, d in enumerate(degrees):
        rows.append(
            ConvergenceRow(
                degree=int(d),
                sup_error=float(sup_errors[:, j].mean()),
                mean_error=float(mean_errors[:, j].mean()),
                seed_sup_errors=tuple(float(v) for v in sup_errors[:, j]),
            )
        )
    return rows
