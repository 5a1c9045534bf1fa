"""Intrinsic dimension from the growth of the moment-matrix rank.

On data supported by an algebraic set, the rank of the degree-d moment
matrix equals the dimension of the space of polynomials of degree at
most d restricted to the set (the Hilbert function), which for large d
is a polynomial in d whose degree is the dimension of the set.  Fitting
polynomials of increasing degree to the observed rank-versus-degree
curve and gating on the residual therefore reads off the dimension.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .basis import CHEBYSHEV, basis_size, default_scale_box, enumerate_basis
from .geometry import BITORUS, CIRCLE, CUBE, SPHERE, TORUS, TVSCREEN, SurfaceSpec
from .moments import DEFAULT_THRESHOLD, RELATIVE, as_point_cloud, design_matrix

__all__ = [
    "RankObservation",
    "RankCurve",
    "rank_curve",
    "fit_hilbert",
    "DimensionEstimate",
    "estimate_dimension",
    "hilbert_oracle",
]

MAX_BASIS_GUARD = 5000


@dataclass(frozen=True)
class RankObservation:
    """Numerical rank of the moment matrix at one degree."""

    degree: int
    rank: int
    basis_size: int
    sample_count: int
    threshold: float
    threshold_mode: str
    saturated: bool  # n < s(d): the rank is capped by the sample size


@dataclass(frozen=True)
class RankCurve:
    """Rank observations at strictly increasing degrees."""

    observations: tuple[RankObservation, ...]

    @property
    def degrees(self) -> np.ndarray:
        return np.array([o.degree for o in self.observations])

    @property
    def ranks(self) -> np.ndarray:
        return np.array([o.rank for o in self.observations])

    def unsaturated(self) -> "RankCurve":
        return RankCurve(tuple(o for o in self.observations if not o.saturated))


def rank_curve(
    points,
    degrees,
    kind: str = CHEBYSHEV,
    threshold: float = DEFAULT_THRESHOLD,
    mode: str = RELATIVE,
    scale_box=None,
) -> RankCurve:
    """Numerical rank of the empirical moment matrix at each degree.

    The design matrix is built once at the largest degree; the columns
    for every smaller degree are a prefix in graded-lex order, so a
    single QR factorization yields the singular values of all design
    prefixes from the leading blocks of R.  The threshold applies to the
    singular values of the (sample-scaled) design matrix, which keeps
    polynomials that vanish on the data at the rounding floor, far below
    any genuinely positive moment.

    Parameters
    ----------
    points : array-like of shape (n, p)
    degrees : sequence of int
        Strictly increasing degrees to evaluate.
    kind, scale_box
        Basis settings; the default box is the padded data bounding box.
    threshold, mode
        Rank cut-off for the singular values.

    Returns
    -------
    RankCurve
        Observations flagged as saturated where n < s(d).
    """
    cloud = as_point_cloud(points)
    n, p = cloud.shape
    degrees = [int(d) for d in degrees]
    if len(degrees) < 1:
        raise ValueError("at least one degree is required")
    if any(b <= a for a, b in zip(degrees, degrees[1:])):
        raise ValueError("degrees must be strictly increasing")
    if degrees[0] < 0:
        raise ValueError("degrees must be non-negative")
    d_max = degrees[-1]
    s_max = basis_size(p, d_max)
    if s_max > MAX_BASIS_GUARD:
        raise ValueError(
            f"basis size {s_max} at degree {d_max} exceeds the guard "
            f"({MAX_BASIS_GUARD}); reduce the degree window"
        )
    if n < s_max:
        warnings.warn(
            f"sample size {n} is below the basis size {s_max} at degree "
            f"{d_max}; ranks will saturate at n",
            stacklevel=2,
        )
    if kind == CHEBYSHEV and scale_box is None:
        scale_box = default_scale_box(cloud)
    basis = enumerate_basis(p, d_max, kind, scale_box)
    design = design_matrix(cloud, basis) / math.sqrt(n)
    r_factor = np.linalg.qr(design, mode="r")
    observations = []
    for d in degrees:
        s = basis_size(p, d)
        sv = np.linalg.svd(r_factor[:s, :s], compute_uv=False)
        cut = threshold * sv[0] if mode == RELATIVE else threshold
        rank = int(np.count_nonzero(sv > cut))
        observations.append(
            RankObservation(d, rank, s, n, threshold, mode, saturated=n < s)
        )
    return RankCurve(tuple(observations))


def fit_hilbert(
    curve: RankCurve, k: int, include_saturated: bool = False
) -> tuple[np.ndarray, float]:
    """Least-squares fit of the rank curve by a degree-k polynomial in d.

    Returns the coefficients (ascending powers) and the root-mean-square
    residual.  Saturated observations are excluded unless requested.
    """
    if k < 0:
        raise ValueError("candidate dimension must be non-negative")
    obs = curve if include_saturated else curve.unsaturated()
    d = obs.degrees.astype(float)
    r = obs.ranks.astype(float)
    if d.size < k + 2:
        raise ValueError(
            f"need at least {k + 2} observations for a degree-{k} fit, have {d.size}"
        )
    vander = np.vander(d, k + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(vander, r, rcond=None)
    rms = float(np.sqrt(np.mean((vander @ coef - r) ** 2)))
    return coef, rms


@dataclass(frozen=True)
class DimensionEstimate:
    """Nested Hilbert-polynomial fits and the selected dimension.

    ``fits`` maps candidate dimension k to (coefficients, rms residual);
    ``selected_dimension`` is the smallest k whose residual passes the
    relative gate.  When no candidate passes, the ambient dimension is
    reported with ``gate_passed`` false.
    """

    fits: dict[int, tuple[np.ndarray, float]]
    selected_dimension: int
    fit_degrees_used: tuple[int, ...]
    gate_passed: bool
    rel_fit_tol: float


def estimate_dimension(
    curve: RankCurve,
    ambient_dim: int,
    rel_fit_tol: float = 1e-2,
    include_saturated: bool = False,
) -> DimensionEstimate:
    """Select the intrinsic dimension from nested rank-curve fits.

    Fits polynomials of degree k = 0..ambient_dim and picks the smallest
    k whose rms residual is at most ``rel_fit_tol`` times the mean rank.
    """
    obs = curve if include_saturated else curve.unsaturated()
    if len(obs.observations) < 4:
        raise ValueError("need at least 4 rank observations to estimate dimension")
    mean_rank = float(obs.ranks.mean())
    fits: dict[int, tuple[np.ndarray, float]] = {}
    for k in range(0, ambient_dim + 1):
        if len(obs.observations) < k + 2:
            break
        fits[k] = fit_hilbert(obs, k, include_saturated=True)
    selected = None
    for k, (_, rms) in fits.items():
        if rms <= rel_fit_tol * mean_rank:
            selected = k
            break
    gate_passed = selected is not None
    if selected is None:
        selected = ambient_dim
    return DimensionEstimate(
        fits=fits,
        selected_dimension=selected,
        fit_degrees_used=tuple(int(d) for d in obs.degrees),
        gate_passed=gate_passed,
        rel_fit_tol=rel_fit_tol,
    )


def hilbert_oracle(surface, d: int, hypersurface_degree: int | None = None) -> int:
    """Exact dimension of degree-<=d polynomials on a synthetic surface.

    Accepts a :class:`SurfaceSpec` or a kind string; ``"hypersurface"``
    with an explicit degree covers any irreducible hypersurface in R^3.
    Cube: binom(d+p, p).  Sphere in R^p: binom(p+d-1, p-1) +
    binom(p+d-2, p-1).  Degree-k hypersurface in R^3:
    binom(d+3, 3) - binom(d-k+3, 3).  Circle: 2d + 1.  Bi-torus:
    2d^2 + 2d + 1.
    """
    if d < 0:
        raise ValueError("degree must be non-negative")
    if isinstance(surface, SurfaceSpec):
        kind, p = surface.kind, surface.ambient_dim
    else:
        kind, p = str(surface), 3
    if kind == CUBE:
        return math.comb(d + p, p)
    if kind == SPHERE:
        return math.comb(p + d - 1, p - 1) + math.comb(p + d - 2, p - 1)
    if kind == CIRCLE:
        return 2 * d + 1
    if kind == BITORUS:
        return 2 * d * d + 2 * d + 1
    if kind in (TORUS, TVSCREEN, "hypersurface"):
        k = {TORUS: 4, TVSCREEN: 6}.get(kind, hypersurface_degree)
        if k is None:
            raise ValueError("hypersurface oracle needs an equation degree")
        full = math.comb(d + 3, 3)
        excess = math.comb(d - k + 3, 3) if d - k + 3 >= 3 else 0
        return full - excess
    raise ValueError(f"no Hilbert oracle for surface kind {kind!r}")
