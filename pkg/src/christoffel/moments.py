"""Empirical moment matrices and their spectral decompositions.

Given a point cloud and a graded basis, the design matrix stacks the
basis vector of every point row by row; the moment matrix is the
(optionally sample-averaged) Gram matrix of the design.  Numerical rank
is read off the eigenvalue spectrum with an absolute or
relative-to-largest threshold, and eigenvectors below the threshold are
coefficient vectors of polynomials that numerically vanish on the data.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .basis import (
    CHEBYSHEV,
    MONOMIAL,
    GradedBasis,
    basis_size,
    enumerate_basis,
    eval_basis_matrix,
)

__all__ = [
    "SpectralDecompositionError",
    "as_point_cloud",
    "design_matrix",
    "MomentMatrix",
    "moment_matrix",
    "SpectralData",
    "spectral",
    "spectral_from_design",
    "kernel_basis",
    "save_moment_cache",
    "load_moment_cache",
]

MEAN_OVER_N = "mean"
SUM = "sum"
_NORMALIZATIONS = (MEAN_OVER_N, SUM)

RELATIVE = "relative"
ABSOLUTE = "absolute"
_THRESHOLD_MODES = (RELATIVE, ABSOLUTE)

DEFAULT_THRESHOLD = 1e-10


class SpectralDecompositionError(RuntimeError):
    """Raised when the symmetric eigensolver fails to converge."""


def as_point_cloud(points) -> np.ndarray:
    """Validate a point cloud: finite float matrix with at least one row.

    A 1-D array is interpreted as a single point.
    """
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"point cloud must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"point cloud must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point cloud contains non-finite coordinates")
    return arr


def design_matrix(points, basis: GradedBasis) -> np.ndarray:
    """Row i is the basis vector of point i; shape (n, basis.size)."""
    cloud = as_point_cloud(points)
    if cloud.shape[1] != basis.ambient_dim:
        raise ValueError(
            f"cloud dimension {cloud.shape[1]} does not match basis "
            f"ambient dimension {basis.ambient_dim}"
        )
    return eval_basis_matrix(basis, cloud)


@dataclass(frozen=True)
class MomentMatrix:
    """Symmetric positive-semidefinite Gram matrix of a graded basis.

    ``entries[a, b]`` is the empirical moment of the product of basis
    functions a and b, averaged over the sample (``normalization="mean"``)
    or summed (``"sum"``).
    """

    entries: np.ndarray = field(repr=False)
    degree: int
    basis: GradedBasis
    sample_count: int
    normalization: str = MEAN_OVER_N

    @property
    def size(self) -> int:
        return self.entries.shape[0]


def moment_matrix(
    design: np.ndarray,
    basis: GradedBasis,
    normalization: str = MEAN_OVER_N,
) -> MomentMatrix:
    """Gram matrix of a design matrix.

    Parameters
    ----------
    design : ndarray of shape (n, s)
        Output of :func:`design_matrix`.
    basis : GradedBasis
        Basis the design was evaluated in (kept as provenance).
    normalization : str
        ``"mean"`` for (1/n) X^T X, ``"sum"`` for X^T X.

    Returns
    -------
    MomentMatrix
        Symmetry is enforced by averaging with the transpose.
    """
    design = np.asarray(design, dtype=float)
    if design.ndim != 2 or design.shape[0] < 1:
        raise ValueError("design matrix must be a non-empty 2-D array")
    if design.shape[1] != basis.size:
        raise ValueError(
            f"design has {design.shape[1]} columns but basis has size {basis.size}"
        )
    if normalization not in _NORMALIZATIONS:
        raise ValueError(f"unknown normalization {normalization!r}")
    n = design.shape[0]
    gram = design.T @ design
    if normalization == MEAN_OVER_N:
        gram /= n
    gram = 0.5 * (gram + gram.T)
    return MomentMatrix(gram, basis.max_degree, basis, n, normalization)


@dataclass(frozen=True)
class SpectralData:
    """Full symmetric eigendecomposition with a numerical-rank record.

    Eigenvalues are sorted non-increasing; column j of ``eigenvectors``
    pairs with ``eigenvalues[j]``.  ``numerical_rank`` counts eigenvalues
    strictly above ``effective_threshold``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    numerical_rank: int
    threshold: float
    threshold_mode: str
    effective_threshold: float

    @property
    def size(self) -> int:
        return self.eigenvalues.shape[0]


def _rank_from_eigenvalues(
    eigenvalues: np.ndarray, threshold: float, mode: str
) -> tuple[int, float]:
    if mode not in _THRESHOLD_MODES:
        raise ValueError(f"unknown threshold mode {mode!r}")
    largest = max(float(eigenvalues[0]), 0.0) if eigenvalues.size else 0.0
    effective = threshold * largest if mode == RELATIVE else threshold
    rank = int(np.count_nonzero(eigenvalues > effective))
    return rank, effective


def spectral(
    matrix: MomentMatrix | np.ndarray,
    threshold: float = DEFAULT_THRESHOLD,
    mode: str = RELATIVE,
) -> SpectralData:
    """Symmetric eigendecomposition plus numerical rank of a moment matrix.

    Parameters
    ----------
    matrix : MomentMatrix or ndarray
        Symmetric positive-semidefinite matrix.
    threshold : float
        Rank cut-off; interpreted per ``mode``.
    mode : str
        ``"relative"`` compares eigenvalues against ``threshold * largest``,
        ``"absolute"`` against ``threshold`` itself.

    Raises
    ------
    SpectralDecompositionError
        If the underlying eigensolver does not converge.
    """
    entries = matrix.entries if isinstance(matrix, MomentMatrix) else np.asarray(matrix)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(entries)):
        raise ValueError("matrix contains non-finite entries")
    try:
        eigenvalues, eigenvectors = scipy.linalg.eigh(entries)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise SpectralDecompositionError(str(exc)) from exc
    eigenvalues = eigenvalues[::-1]
    eigenvectors = eigenvectors[:, ::-1]
    rank, effective = _rank_from_eigenvalues(eigenvalues, threshold, mode)
    return SpectralData(eigenvalues, eigenvectors, rank, threshold, mode, effective)


def spectral_from_design(
    design: np.ndarray,
    normalization: str = MEAN_OVER_N,
    threshold: float = DEFAULT_THRESHOLD,
    mode: str = RELATIVE,
) -> SpectralData:
    """Spectral data of the moment matrix via an SVD of the design matrix.

    Mathematically identical to :func:`spectral` of the Gram matrix but
    more accurate when n < s(d) or when small singular values matter.
    """
    design = np.asarray(design, dtype=float)
    n, s = design.shape
    scaled = design / np.sqrt(n) if normalization == MEAN_OVER_N else design
    try:
        _, sigma, vt = np.linalg.svd(scaled, full_matrices=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise SpectralDecompositionError(str(exc)) from exc
    eigenvalues = np.zeros(s)
    eigenvalues[: sigma.size] = sigma**2
    rank, effective = _rank_from_eigenvalues(eigenvalues, threshold, mode)
    return SpectralData(eigenvalues, vt.T, rank, threshold, mode, effective)


def design_rank(
    design: np.ndarray,
    threshold: float = DEFAULT_THRESHOLD,
    mode: str = RELATIVE,
) -> int:
    """Numerical rank of a design matrix by singular-value thresholding.

    The threshold applies to the singular values themselves (not their
    squares), so vanishing polynomials sit at the rounding floor of the
    design entries and separate much more sharply from genuine small
    moments than in the eigenvalue domain.
    """
    sv = np.linalg.svd(np.asarray(design, dtype=float), compute_uv=False)
    if mode not in _THRESHOLD_MODES:
        raise ValueError(f"unknown threshold mode {mode!r}")
    cut = threshold * sv[0] if mode == RELATIVE else threshold
    return int(np.count_nonzero(sv > cut))


def kernel_basis(spec: SpectralData) -> np.ndarray:
    """Eigenvectors at or below the rank threshold, one coefficient vector per row.

    Each row is the coefficient vector (in the originating basis) of a
    polynomial that numerically vanishes on the support of the sample.
    Shape ``(size - numerical_rank, size)``; empty for full-rank matrices.
    """
    return spec.eigenvectors[:, spec.numerical_rank :].T


_MAGIC = b"CMOM1"
_KIND_CODES = {MONOMIAL: 0, CHEBYSHEV: 1}
_KIND_NAMES = {code: kind for kind, code in _KIND_CODES.items()}


def save_moment_cache(path, matrix: MomentMatrix) -> None:
    """Write a moment matrix to the dense binary cache format.

    Layout: magic ``CMOM1``; little-endian header with p (u32), d (u32),
    n (u64), basis kind (u8); then the s(d) x s(d) entries as row-major
    little-endian float64, followed by the p x 2 scale box (also
    float64) so Chebyshev bases reconstruct exactly.
    """
    basis = matrix.basis
    header = struct.pack(
        "<5sIIQB",
        _MAGIC,
        basis.ambient_dim,
        matrix.degree,
        matrix.sample_count,
        _KIND_CODES[basis.kind],
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(matrix.entries, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(basis.scale_box, dtype="<f8").tobytes())


def load_moment_cache(path) -> MomentMatrix:
    """Read a moment matrix written by :func:`save_moment_cache`.

    Caches missing the trailing scale-box block are accepted and fall
    back to the default [-1, 1]^p box.  Normalization is not stored; the
    mean-over-n convention is assumed.
    """
    header_size = struct.calcsize("<5sIIQB")
    with open(path, "rb") as fh:
        header = fh.read(header_size)
        if len(header) != header_size:
            raise ValueError("truncated moment cache header")
        magic, p, d, n, kind_code = struct.unpack("<5sIIQB", header)
        if magic != _MAGIC:
            raise ValueError(f"bad magic bytes {magic!r}; not a moment cache")
        if kind_code not in _KIND_NAMES:
            raise ValueError(f"unknown basis kind code {kind_code}")
        s = basis_size(p, d)
        payload = fh.read(8 * s * s)
        if len(payload) != 8 * s * s:
            raise ValueError("truncated moment cache payload")
        entries = np.frombuffer(payload, dtype="<f8").reshape(s, s).astype(float)
        box_bytes = fh.read(8 * p * 2)
    box = None
    if len(box_bytes) == 8 * p * 2:
        box = np.frombuffer(box_bytes, dtype="<f8").reshape(p, 2).astype(float)
    basis = enumerate_basis(p, d, _KIND_NAMES[kind_code], box)
    return MomentMatrix(entries, d, basis, n, MEAN_OVER_N)
