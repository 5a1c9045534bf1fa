"""Synthetic algebraic sets: samplers, angle embeddings, evaluation grids.

Supported surfaces are the unit cube, the unit sphere, a torus of
revolution, the "TV screen" sextic x^6 + y^6 + z^6 - 2x^2y^2z^2 = 1, the
unit circle in the plane, and the bi-torus (product of two circles) in
R^4.  Samplers draw from a counter-based random stream (Philox) so
identical seeds give bit-identical clouds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SurfaceSpec",
    "EvaluationGrid",
    "sample",
    "sample_with",
    "embed_angles",
    "make_grid",
    "default_resolution",
]

CUBE = "cube"
SPHERE = "sphere"
TORUS = "torus"
TVSCREEN = "tvscreen"
CIRCLE = "circle"
BITORUS = "bitorus"
SURFACE_KINDS = (CUBE, SPHERE, TORUS, TVSCREEN, CIRCLE, BITORUS)

_DEFAULT_AMBIENT = {CUBE: 3, SPHERE: 3, TORUS: 3, TVSCREEN: 3, CIRCLE: 2, BITORUS: 4}


@dataclass(frozen=True)
class SurfaceSpec:
    """A synthetic surface with its implicit equation(s) where applicable.

    ``major_radius`` and ``minor_radius`` only apply to the torus; the
    defaults give the quartic (x^2+y^2+z^2+R^2-r^2)^2 = 4R^2(x^2+y^2)
    with R=3/4, r=1/4.
    """

    kind: str
    ambient_dim: int = 0
    major_radius: float = 0.75
    minor_radius: float = 0.25

    def __post_init__(self):
        if self.kind not in SURFACE_KINDS:
            raise ValueError(f"unknown surface kind {self.kind!r}")
        if self.ambient_dim == 0:
            object.__setattr__(self, "ambient_dim", _DEFAULT_AMBIENT[self.kind])
        if self.kind in (TORUS, TVSCREEN, CIRCLE, BITORUS):
            if self.ambient_dim != _DEFAULT_AMBIENT[self.kind]:
                raise ValueError(
                    f"{self.kind} lives in dimension {_DEFAULT_AMBIENT[self.kind]}"
                )
        if self.kind == TORUS and not 0 < self.minor_radius < self.major_radius:
            raise ValueError("torus requires 0 < minor_radius < major_radius")

    @property
    def codimension_degrees(self) -> tuple[int, ...]:
        """Degrees of the implicit defining polynomials (empty for the cube)."""
        return {
            CUBE: (),
            SPHERE: (2,),
            TORUS: (4,),
            TVSCREEN: (6,),
            CIRCLE: (2,),
            BITORUS: (2, 2),
        }[self.kind]

    def implicit_residual(self, points: np.ndarray) -> np.ndarray:
        """Largest absolute value of the defining equations at each point.

        Zero for points exactly on the surface.  The cube has no implicit
        equation; its residual is the amount by which a point leaves
        [-1, 1]^p.
        """
        x = np.asarray(points, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        if x.shape[1] != self.ambient_dim:
            raise ValueError(
                f"points have dimension {x.shape[1]}, surface lives in "
                f"{self.ambient_dim}"
            )
        if self.kind == CUBE:
            return np.maximum(np.abs(x).max(axis=1) - 1.0, 0.0)
        if self.kind == SPHERE:
            return np.abs((x**2).sum(axis=1) - 1.0)
        if self.kind == CIRCLE:
            return np.abs((x**2).sum(axis=1) - 1.0)
        if self.kind == TORUS:
            R, r = self.major_radius, self.minor_radius
            q = (x**2).sum(axis=1) + R**2 - r**2
            return np.abs(q**2 - 4.0 * R**2 * (x[:, 0] ** 2 + x[:, 1] ** 2))
        if self.kind == TVSCREEN:
            return np.abs(
                x[:, 0] ** 6
                + x[:, 1] ** 6
                + x[:, 2] ** 6
                - 2.0 * x[:, 0] ** 2 * x[:, 1] ** 2 * x[:, 2] ** 2
                - 1.0
            )
        # bi-torus: both circle equations must hold
        r1 = np.abs(x[:, 0] ** 2 + x[:, 1] ** 2 - 1.0)
        r2 = np.abs(x[:, 2] ** 2 + x[:, 3] ** 2 - 1.0)
        return np.maximum(r1, r2)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _sample_torus_angles(
    rng: np.random.Generator, n: int, R: float, r: float
) -> np.ndarray:
    # Rejection on the tube angle with weight (R + r cos) / (R + r) makes
    # parameter sampling uniform with respect to the area measure.
    out = np.empty(n)
    filled = 0
    while filled < n:
        m = max(2 * (n - filled), 64)
        theta = rng.uniform(0.0, 2.0 * np.pi, m)
        u = rng.uniform(0.0, 1.0, m)
        accepted = theta[u <= (R + r * np.cos(theta)) / (R + r)]
        take = min(accepted.size, n - filled)
        out[filled : filled + take] = accepted[:take]
        filled += take
    return out


def sample(spec: SurfaceSpec, n: int, seed: int) -> np.ndarray:
    """Draw n points on the surface, deterministically from the seed.

    Cube: uniform on [-1, 1]^p.  Sphere: normalized Gaussian directions
    (rotation invariant).  Torus: area-uniform via rejection on the tube
    angle.  TV screen: uniform directions pushed onto the surface by an
    exact radial solve (smooth positive, not area-uniform, density).
    Circle / bi-torus: uniform angles embedded by (cos, sin).
    """
    if n < 1:
        raise ValueError("sample size must be at least 1")
    return sample_with(_rng(seed), spec, n)


def sample_with(rng: np.random.Generator, spec: SurfaceSpec, n: int) -> np.ndarray:
    """Like :func:`sample` but drawing from a caller-managed generator."""
    p = spec.ambient_dim
    if spec.kind == CUBE:
        return rng.uniform(-1.0, 1.0, (n, p))
    if spec.kind == SPHERE:
        g = rng.standard_normal((n, p))
        return g / np.linalg.norm(g, axis=1, keepdims=True)
    if spec.kind == TORUS:
        R, r = spec.major_radius, spec.minor_radius
        theta = _sample_torus_angles(rng, n, R, r)
        phi = rng.uniform(0.0, 2.0 * np.pi, n)
        rho = R + r * np.cos(theta)
        return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), r * np.sin(theta)])
    if spec.kind == TVSCREEN:
        g = rng.standard_normal((n, 3))
        u = g / np.linalg.norm(g, axis=1, keepdims=True)
        f = (
            u[:, 0] ** 6
            + u[:, 1] ** 6
            + u[:, 2] ** 6
            - 2.0 * u[:, 0] ** 2 * u[:, 1] ** 2 * u[:, 2] ** 2
        )
        return u * f[:, None] ** (-1.0 / 6.0)
    if spec.kind == CIRCLE:
        theta = rng.uniform(0.0, 2.0 * np.pi, n)
        return embed_angles(theta, CIRCLE)
    # bi-torus
    angles = rng.uniform(0.0, 2.0 * np.pi, (n, 2))
    return embed_angles(angles, BITORUS)


def embed_angles(angles, target: str) -> np.ndarray:
    """Map angles (radians) onto the circle or the bi-torus.

    Circle expects one angle per row and returns (cos t, sin t); the
    bi-torus expects two angles per row and returns
    (cos a, sin a, cos b, sin b).
    """
    arr = np.asarray(angles, dtype=float)
    if target == CIRCLE:
        if arr.ndim == 2 and arr.shape[1] == 1:
            arr = arr[:, 0]
        if arr.ndim != 1:
            raise ValueError("circle embedding expects one angle per row")
        return np.column_stack([np.cos(arr), np.sin(arr)])
    if target == BITORUS:
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("bi-torus embedding expects two angles per row")
        return np.column_stack(
            [np.cos(arr[:, 0]), np.sin(arr[:, 0]), np.cos(arr[:, 1]), np.sin(arr[:, 1])]
        )
    raise ValueError(f"no angle embedding for target {target!r}")


@dataclass(frozen=True)
class EvaluationGrid:
    """Parameter grid plus its embedding into ambient space.

    ``parameters`` has one row per grid point (angles in radians;
    longitude/latitude for the sphere); ``points`` holds the embedded
    coordinates.  ``shape`` is (rows, cols) for 2-parameter surfaces and
    (m,) for the circle.
    """

    parameters: np.ndarray
    points: np.ndarray
    shape: tuple[int, ...]
    parameter_names: tuple[str, ...]


def default_resolution(kind: str):
    """Grid resolution used by the command line when none is given."""
    return {CIRCLE: 512, SPHERE: (72, 36), BITORUS: (64, 64)}[kind]


def make_grid(spec: SurfaceSpec, resolution=None) -> EvaluationGrid:
    """Evaluation grid on the circle, sphere, or bi-torus.

    Circle: m uniform angles.  Sphere: equirectangular longitude x
    latitude grid at cell centers (poles excluded).  Bi-torus: uniform
    product grid of the two angles.
    """
    if spec.kind not in (CIRCLE, SPHERE, BITORUS):
        raise ValueError(f"no evaluation grid defined for surface {spec.kind!r}")
    if resolution is None:
        resolution = default_resolution(spec.kind)

    if spec.kind == CIRCLE:
        m = int(resolution)
        if m < 2:
            raise ValueError("resolution must be at least 2")
        theta = 2.0 * np.pi * np.arange(m) / m
        return EvaluationGrid(theta[:, None], embed_angles(theta, CIRCLE), (m,), ("theta",))

    if np.isscalar(resolution):
        res = (int(resolution), int(resolution))
    else:
        res = (int(resolution[0]), int(resolution[1]))
    if min(res) < 2:
        raise ValueError("resolution must be at least 2 per parameter")

    if spec.kind == SPHERE:
        n_lon, n_lat = res
        lon = 2.0 * np.pi * np.arange(n_lon) / n_lon
        lat = -0.5 * np.pi + np.pi * (np.arange(n_lat) + 0.5) / n_lat
        lon2, lat2 = np.meshgrid(lon, lat, indexing="ij")
        params = np.column_stack([lon2.ravel(), lat2.ravel()])
        points = np.column_stack(
            [
                np.cos(params[:, 1]) * np.cos(params[:, 0]),
                np.cos(params[:, 1]) * np.sin(params[:, 0]),
                np.sin(params[:, 1]),
            ]
        )
        return EvaluationGrid(params, points, res, ("longitude", "latitude"))

    # bi-torus
    m1, m2 = res
    a = 2.0 * np.pi * np.arange(m1) / m1
    b = 2.0 * np.pi * np.arange(m2) / m2
    a2, b2 = np.meshgrid(a, b, indexing="ij")
    params = np.column_stack([a2.ravel(), b2.ravel()])
    return EvaluationGrid(params, embed_angles(params, BITORUS), res, ("phi", "psi"))
