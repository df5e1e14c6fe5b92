"""Dense eigensolution of -Delta - V, eigenvalue filtering, and sum functionals.

The grid Hamiltonian is a circulant Laplacian minus a diagonal potential.
Filtering separates genuine discrete eigenvalues from the finite-box shadow
of the essential spectrum [0, inf); the surviving points feed the weighted
eigenvalue sums.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .grid import Grid, GridSpec, as_grid, apply_multiplier

__all__ = [
    "SpectralPoint",
    "SpectrumFilter",
    "hamiltonian_matrix",
    "eigenvalues_dense",
    "filter_discrete",
    "delta_dist",
    "eigenvalue_sum",
]

_DENSE_BUDGET = 4096
_CLUSTER_REL_TOL = 1e-7


@dataclass(frozen=True)
class SpectralPoint:
    """One clustered eigenvalue with certificate data."""

    z: complex
    multiplicity: int
    residual: float

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be a positive integer")

    @property
    def lam(self) -> float:
        """Re sqrt(z), principal branch."""
        return cmath.sqrt(self.z).real

    @property
    def eps(self) -> float:
        """Im sqrt(z), principal branch."""
        return cmath.sqrt(self.z).imag


@dataclass(frozen=True)
class SpectrumFilter:
    """Window on sqrt|z|, distance-to-[0,inf) floor, and optional sector cut."""

    band: tuple[float, float]
    essential_margin: float
    kappa: float | None = None

    def __post_init__(self):
        lo, hi = self.band
        if lo < 0 or hi < lo:
            raise ValueError(f"band must satisfy 0 <= lower <= upper, got {self.band}")
        if not self.essential_margin > 0:
            raise ValueError("essential_margin must be positive")

    @classmethod
    def default_margin(cls, grid) -> float:
        """One free-Laplacian level spacing at the bottom of the spectrum."""
        spec = grid.spec if isinstance(grid, Grid) else grid
        return 10.0 * (2.0 * np.pi / spec.L) ** 2

    @classmethod
    def from_scales(
        cls,
        R0: float,
        h: float,
        essential_margin: float,
        kappa: float | None = None,
    ) -> SpectrumFilter:
        """Window 1/R0 <= sqrt|z| <= 1/h from the sparse and cell scales."""
        return cls((1.0 / R0, 1.0 / h), essential_margin, kappa)


def delta_dist(z: complex) -> float:
    """Distance from z to the half line [0, inf)."""
    z = complex(z)
    return abs(z.imag) if z.real >= 0 else abs(z)


def hamiltonian_matrix(grid, potential) -> np.ndarray:
    """Dense position-basis matrix of -Delta - V on the grid.

    The Laplacian block is the circulant with the DFT-diagonal symbol
    |2 pi xi|^2; the result is self-checked against spectral application
    on random vectors before being returned.
    """
    g = as_grid(grid)
    spec = g.spec
    n = spec.node_count
    if n > _DENSE_BUDGET:
        raise ValueError(f"dense Hamiltonian budget is {_DENSE_BUDGET} nodes, got {n}")
    vals = potential.values if hasattr(potential, "values") else np.asarray(potential)
    if vals.shape != spec.shape:
        raise ValueError(f"potential shape {vals.shape} does not match grid {spec.shape}")

    kernel = np.fft.ifftn(g.lap_symbol)
    # Multi-axis circulant: index the kernel by the per-axis differences of
    # the row and column multi-indices.
    multi = np.unravel_index(np.arange(n), spec.shape)
    gather = tuple(
        (multi[ax][:, None] - multi[ax][None, :]) % spec.N for ax in range(spec.d)
    )
    lap = kernel[gather]
    h = lap.astype(complex)
    h[np.diag_indices(n)] -= vals.ravel()

    rng = np.random.default_rng(0xA11CE)
    for _ in range(2):
        v = rng.standard_normal(spec.shape) + 1j * rng.standard_normal(spec.shape)
        direct = (h @ v.ravel()).reshape(spec.shape)
        spectral = apply_multiplier(g, g.lap_symbol, v) - vals * v
        err = np.linalg.norm(direct - spectral) / np.linalg.norm(spectral)
        if err > 1e-10:
            raise RuntimeError(f"circulant assembly disagrees with DFT application: {err:.2e}")
    return h


def eigenvalues_dense(matrix: np.ndarray) -> list[SpectralPoint]:
    """All eigenvalues of a square matrix, clustered into SpectralPoints.

    Residuals are ||(H - z)v|| / ||v|| for the computed right eigenvectors;
    multiplicities come from single-linkage clustering at 1e-7 ||H||.
    """
    h = np.asarray(matrix)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    n = h.shape[0]
    if n > _DENSE_BUDGET:
        raise ValueError(f"dense eigensolve budget is {_DENSE_BUDGET}, got {n}")

    w, vr = scipy.linalg.eig(h)
    vnorms = np.linalg.norm(vr, axis=0)
    residuals = np.linalg.norm(h @ vr - vr * w[None, :], axis=0) / vnorms

    from .util import spectral_norm

    tol = _CLUSTER_REL_TOL * max(spectral_norm(h), np.finfo(float).tiny)

    order = np.lexsort((w.imag, w.real))
    w, residuals = w[order], residuals[order]
    points: list[SpectralPoint] = []
    members: list[int] = [0]
    reps = w[0]
    for i in range(1, n + 1):
        if i < n and abs(w[i] - w[members[-1]]) <= tol:
            members.append(i)
            continue
        cluster = np.array(members)
        points.append(
            SpectralPoint(
                z=complex(w[cluster].mean()),
                multiplicity=len(members),
                residual=float(residuals[cluster].max()),
            )
        )
        if i < n:
            members = [i]
    return points


def filter_discrete(points, filt: SpectrumFilter) -> list[SpectralPoint]:
    """Keep points in the sqrt|z| band, off the half line, and in the sector."""
    lo, hi = filt.band
    kept = []
    for pt in points:
        z = complex(pt.z)
        if delta_dist(z) < filt.essential_margin:
            continue
        root = np.sqrt(abs(z))
        if not lo <= root <= hi:
            continue
        if filt.kappa is not None and abs(z.imag) < filt.kappa * z.real:
            continue
        kept.append(pt)
    return kept


def eigenvalue_sum(points, p: float, sigma: float, eps: float) -> float:
    """Sum of delta(z) |z|^e over points, e = -1/2 + ((2 p sigma - 1 + eps)+)/2.

    Multiplicities weight each term; points on the half line contribute
    nothing and are skipped even where |z|^e would be singular.
    """
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    exponent = -0.5 + 0.5 * max(2.0 * p * sigma - 1.0 + eps, 0.0)
    total = 0.0
    for pt in points:
        dist = delta_dist(pt.z)
        if dist == 0.0:
            continue
        total += pt.multiplicity * dist * abs(complex(pt.z)) ** exponent
    return total
