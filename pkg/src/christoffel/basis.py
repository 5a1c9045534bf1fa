"""Graded multivariate polynomial bases and their evaluation.

A graded basis enumerates all multi-indices of total degree at most ``d``
in ``p`` variables, sorted by graded lexicographic order (degree first,
ties broken lexicographically with the first variable ranked highest).
Each multi-index is realised either as a plain monomial or as a tensor
product of first-kind Chebyshev polynomials evaluated on affinely
rescaled coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np
from numpy.polynomial import chebyshev as _cheb
from numpy.polynomial import polynomial as _poly

__all__ = [
    "MultiIndex",
    "GradedBasis",
    "basis_size",
    "enumerate_basis",
    "eval_basis_vector",
    "eval_basis_matrix",
    "chebyshev_T",
    "default_scale_box",
    "monomial_conversion_matrix",
]

MONOMIAL = "monomial"
CHEBYSHEV = "chebyshev"
_KINDS = (MONOMIAL, CHEBYSHEV)


class MultiIndex(NamedTuple):
    """Exponent tuple of a single basis monomial."""

    exponents: tuple[int, ...]

    @property
    def degree(self) -> int:
        return int(sum(self.exponents))


def basis_size(p: int, d: int) -> int:
    """Number of p-variate monomials of total degree at most d."""
    return math.comb(p + d, d)


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    # Weak compositions of `total` into `parts`, first coordinate largest
    # first: this is descending lexicographic order within a degree block.
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def graded_lex_indices(p: int, d: int) -> np.ndarray:
    """All exponent tuples with |alpha| <= d in graded lexicographic order.

    Returns an integer array of shape ``(basis_size(p, d), p)``.  The
    block of degree k+1 follows the block of degree k, and inside a block
    exponent tuples decrease lexicographically, so the monomial sequence
    for p=2, d=3 reads 1, x1, x2, x1^2, x1*x2, x2^2, x1^3, ...
    """
    rows = [c for k in range(d + 1) for c in _compositions(k, p)]
    out = np.array(rows, dtype=np.int64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class GradedBasis:
    """Graded polynomial basis with an evaluation rule.

    Parameters
    ----------
    ambient_dim : int
        Number of variables p.
    max_degree : int
        Largest total degree d included.
    kind : str
        ``"monomial"`` or ``"chebyshev"`` (tensor products of first-kind
        Chebyshev polynomials on rescaled coordinates).
    scale_box : ndarray of shape (p, 2)
        Per-coordinate interval [lo, hi] affinely mapped onto [-1, 1]
        before Chebyshev evaluation.  Ignored for the monomial kind.
    """

    ambient_dim: int
    max_degree: int
    kind: str
    scale_box: np.ndarray
    indices: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.indices.shape[0]

    def multi_index(self, j: int) -> MultiIndex:
        return MultiIndex(tuple(int(e) for e in self.indices[j]))

    def rescale(self, points: np.ndarray) -> np.ndarray:
        """Map coordinates from the scale box onto [-1, 1] per coordinate."""
        lo = self.scale_box[:, 0]
        hi = self.scale_box[:, 1]
        return (2.0 * points - (lo + hi)) / (hi - lo)

    def truncated(self, d: int) -> "GradedBasis":
        """The sub-basis of degree at most d (a prefix in graded-lex order)."""
        if d > self.max_degree:
            raise ValueError(f"cannot truncate degree {self.max_degree} basis to {d}")
        sub = self.indices[: basis_size(self.ambient_dim, d)]
        return GradedBasis(self.ambient_dim, d, self.kind, self.scale_box, sub)


def default_scale_box(points: np.ndarray, padding: float = 0.01) -> np.ndarray:
    """Bounding box of the data, padded by a fraction of each side length.

    Degenerate coordinates (zero spread) fall back to a unit half-width so
    the affine map onto [-1, 1] stays well defined.
    """
    points = np.asarray(points, dtype=float)
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    width = hi - lo
    pad = np.where(width > 0.0, padding * width, 1.0)
    box = np.column_stack([lo - pad, hi + pad])
    box.setflags(write=False)
    return box


def enumerate_basis(
    p: int,
    d: int,
    kind: str = MONOMIAL,
    scale_box: np.ndarray | None = None,
) -> GradedBasis:
    """Construct the complete graded basis of degree at most d in p variables.

    Parameters
    ----------
    p : int
        Ambient dimension, at least 1.
    d : int
        Maximum total degree, at least 0.
    kind : str
        Evaluation rule, ``"monomial"`` or ``"chebyshev"``.
    scale_box : array-like of shape (p, 2), optional
        Rescaling intervals for the Chebyshev kind.  Defaults to
        [-1, 1]^p, which is also the (ignored) identity box for the
        monomial kind.

    Returns
    -------
    GradedBasis
        Basis with exactly ``binom(p + d, d)`` indices; index 0 is the
        constant function.
    """
    if p < 1:
        raise ValueError("ambient dimension must be at least 1")
    if d < 0:
        raise ValueError("maximum degree must be non-negative")
    if kind not in _KINDS:
        raise ValueError(f"unknown basis kind {kind!r}; expected one of {_KINDS}")
    if scale_box is None:
        box = np.tile([-1.0, 1.0], (p, 1))
    else:
        box = np.array(scale_box, dtype=float)
        if box.shape != (p, 2):
            raise ValueError(f"scale_box must have shape ({p}, 2), got {box.shape}")
        if kind == CHEBYSHEV and np.any(box[:, 1] <= box[:, 0]):
            raise ValueError("scale_box intervals must be non-degenerate (lo < hi)")
    box.setflags(write=False)
    return GradedBasis(p, d, kind, box, graded_lex_indices(p, d))


def _coordinate_values(basis: GradedBasis, points: np.ndarray) -> list[np.ndarray]:
    # One (n, d+1) table per coordinate holding phi_k(x_j) for k = 0..d.
    d = basis.max_degree
    if basis.kind == CHEBYSHEV:
        t = basis.rescale(points)
        return [_cheb.chebvander(t[:, j], d) for j in range(basis.ambient_dim)]
    return [_poly.polyvander(points[:, j], d) for j in range(basis.ambient_dim)]


def eval_basis_matrix(basis: GradedBasis, points: np.ndarray) -> np.ndarray:
    """Evaluate every basis function at every point.

    Parameters
    ----------
    basis : GradedBasis
    points : ndarray of shape (n, p)

    Returns
    -------
    ndarray of shape (n, basis.size)
        Entry (i, j) is the j-th basis function at the i-th point.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != basis.ambient_dim:
        raise ValueError(
            f"points must have shape (n, {basis.ambient_dim}), got {points.shape}"
        )
    tables = _coordinate_values(basis, points)
    out = np.ones((points.shape[0], basis.size))
    for j in range(basis.ambient_dim):
        out *= tables[j][:, basis.indices[:, j]]
    return out


def eval_basis_vector(basis: GradedBasis, x: np.ndarray) -> np.ndarray:
    """Evaluate the basis at a single point, returning a vector of length size."""
    x = np.asarray(x, dtype=float)
    if x.shape != (basis.ambient_dim,):
        raise ValueError(f"point must have shape ({basis.ambient_dim},), got {x.shape}")
    return eval_basis_matrix(basis, x[None, :])[0]


def chebyshev_T(k: int, t):
    """First-kind Chebyshev polynomial T_k evaluated at t (scalar or array).

    Uses the three-term recurrence on [-1, 1] and the explicit formula
    ``((t + sqrt(t^2-1))^k + (t + sqrt(t^2-1))^-k) / 2`` for t > 1, which
    stays accurate for large k; t < -1 is handled through the parity
    T_k(-t) = (-1)^k T_k(t).
    """
    if k < 0:
        raise ValueError("degree must be non-negative")
    t_arr = np.asarray(t, dtype=float)
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr)
    out = np.empty_like(t_arr)

    sign = np.where((t_arr < 0) & (k % 2 == 1), -1.0, 1.0)
    u = np.abs(t_arr)

    inside = u <= 1.0
    if np.any(inside):
        ui = u[inside]
        prev = np.ones_like(ui)
        cur = ui.copy()
        if k == 0:
            out[inside] = prev
        else:
            for _ in range(k - 1):
                prev, cur = cur, 2.0 * ui * cur - prev
            out[inside] = cur
    if np.any(~inside):
        uo = u[~inside]
        w = uo + np.sqrt(uo * uo - 1.0)
        out[~inside] = 0.5 * (w**k + w ** (-k))
    out *= sign
    return float(out[0]) if scalar else out


def monomial_conversion_matrix(basis: GradedBasis) -> np.ndarray:
    """Change-of-basis matrix from this basis to graded-lex monomials.

    Column j holds the monomial coefficients (in the same graded-lex
    ordering, in the original unscaled coordinates) of the j-th basis
    function, so monomial coefficients of a polynomial are obtained as
    ``matrix @ coefficients``.  Intended for interpreting coefficient
    vectors at moderate degree; the expansion is ill-conditioned for
    large degrees.
    """
    p, d = basis.ambient_dim, basis.max_degree
    # Per-coordinate monomial expansions of each 1-D basis function.
    per_coord = []
    for j in range(p):
        table = np.zeros((d + 1, d + 1))
        for k in range(d + 1):
            if basis.kind == CHEBYSHEV:
                lo, hi = basis.scale_box[j]
                poly = _cheb.Chebyshev.basis(k, domain=[lo, hi]).convert(
                    kind=_poly.Polynomial
                )
                coef = poly.coef
            else:
                coef = np.zeros(k + 1)
                coef[k] = 1.0
            table[k, : len(coef)] = coef
        per_coord.append(table)

    lookup = {tuple(alpha): i for i, alpha in enumerate(basis.indices)}
    out = np.zeros((basis.size, basis.size))
    for j, alpha in enumerate(basis.indices):
        # Tensor the univariate expansions and scatter onto multi-indices.
        acc = {(): 1.0}
        for coord in range(p):
            coef = per_coord[coord][alpha[coord]]
            nxt: dict[tuple[int, ...], float] = {}
            for key, val in acc.items():
                for e, c in enumerate(coef):
                    if c != 0.0:
                        k2 = key + (e,)
                        nxt[k2] = nxt.get(k2, 0.0) + val * c
            acc = nxt
        for key, val in acc.items():
            out[lookup[key], j] += val
    return out
