"""Periodic box discretization with DFT-diagonal constant-coefficient operators.

The box is [0, L)^d sampled on N^d equispaced nodes.  Fourier conventions
follow the e^{-2*pi*i*x.xi} normalization, so the Laplacian acts as the
multiplier |2*pi*xi|^2 on the dual lattice xi = m/L with integer coordinates
m in {-N/2, ..., N/2 - 1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularSymbolError

__all__ = [
    "GridSpec",
    "Grid",
    "FrequencySymbol",
    "build_grid",
    "laplacian_symbol",
    "resolvent_symbol",
    "apply_multiplier",
]


@dataclass(frozen=True)
class GridSpec:
    """Geometry of the periodic box: dimension, side length, nodes per side."""

    d: int
    L: float
    N: int

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if not self.L > 0:
            raise ValueError(f"box side must be positive, got {self.L}")
        n = self.N
        if n < 4 or n & (n - 1) != 0:
            raise ValueError(f"nodes per side must be a power of two >= 4, got {n}")

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def cellvol(self) -> float:
        return (self.L / self.N) ** self.d

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.d

    @property
    def node_count(self) -> int:
        return self.N**self.d


@dataclass(frozen=True)
class FrequencySymbol:
    """Values of a Fourier multiplier on the dual lattice, in DFT layout."""

    values: np.ndarray


class Grid:
    """A GridSpec plus cached node coordinates and dual-lattice data.

    Instances are immutable by convention; the cached arrays are shared and
    must not be written to.  Build through :func:`build_grid`.
    """

    def __init__(self, spec: GridSpec):
        self.spec = spec
        n, L, d = spec.N, spec.L, spec.d
        axis = np.arange(n) * (L / n)
        # Torus representative in [-L/2, L/2): radial potentials centered at
        # the origin wrap around the box without seams.
        centered = np.where(axis < L / 2, axis, axis - L)
        self.axis_raw = axis
        self.axis_centered = centered
        self.freq_axis = np.fft.fftfreq(n, d=L / n)
        self._freq_meshes = np.meshgrid(*([self.freq_axis] * d), indexing="ij")
        self.lap_symbol = sum((2.0 * np.pi * f) ** 2 for f in self._freq_meshes)
        self._radius = None

    @property
    def shape(self):
        return self.spec.shape

    @property
    def cellvol(self):
        return self.spec.cellvol

    def coords(self, centered: bool = True) -> list[np.ndarray]:
        """Node coordinate meshes, one array of shape N^d per dimension."""
        axis = self.axis_centered if centered else self.axis_raw
        return np.meshgrid(*([axis] * self.spec.d), indexing="ij")

    def radii(self) -> np.ndarray:
        """Torus distance of every node to the origin."""
        if self._radius is None:
            mesh = self.coords(centered=True)
            self._radius = np.sqrt(sum(c * c for c in mesh))
        return self._radius

    def points(self, centered: bool = True) -> np.ndarray:
        """All node coordinates stacked as an (N^d, d) array."""
        mesh = self.coords(centered)
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def freq_meshes(self) -> list[np.ndarray]:
        return self._freq_meshes

    def forward(self, values: np.ndarray) -> np.ndarray:
        """DFT with the quadrature weight, approximating the integral transform."""
        return np.fft.fftn(values) * self.spec.cellvol

    def inverse(self, spectrum: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(spectrum) / self.spec.cellvol


def build_grid(spec: GridSpec) -> Grid:
    """Materialize coordinates and the Laplacian symbol for a grid spec."""
    return Grid(spec)


def as_grid(grid) -> Grid:
    """Accept either a Grid or a GridSpec where both are convenient."""
    if isinstance(grid, Grid):
        return grid
    return Grid(grid)


def laplacian_symbol(grid) -> FrequencySymbol:
    """Multiplier |2*pi*xi|^2 of the (positive) free Laplacian."""
    return FrequencySymbol(as_grid(grid).lap_symbol)


def resolvent_symbol(grid, z: complex) -> FrequencySymbol:
    """Multiplier of (-Laplacian - z)^(-1).

    Raises SingularSymbolError when z hits one of the discrete Laplacian
    levels exactly; any other z, including real z between levels, is allowed.
    """
    lap = as_grid(grid).lap_symbol
    diff = lap - z
    if np.any(diff == 0):
        raise SingularSymbolError(
            f"z = {z} coincides with a discrete Laplacian level; resolvent undefined"
        )
    return FrequencySymbol(1.0 / diff)


def _symbol_values(symbol) -> np.ndarray:
    if isinstance(symbol, FrequencySymbol):
        return symbol.values
    return np.asarray(symbol)


def apply_multiplier(grid, symbol, values: np.ndarray) -> np.ndarray:
    """Apply a Fourier multiplier: inverse-DFT(symbol * DFT(values)).

    The quadrature weights cancel between the two transforms, so this is
    exact on the discrete space regardless of normalization.
    """
    g = as_grid(grid)
    sym = _symbol_values(symbol)
    arr = np.asarray(values)
    if arr.shape != g.shape:
        raise ValueError(f"field shape {arr.shape} does not match grid shape {g.shape}")
    if sym.shape != g.shape:
        raise ValueError(f"symbol shape {sym.shape} does not match grid shape {g.shape}")
    return np.fft.ifftn(sym * np.fft.fftn(arr))


def apply_multiplier_stack(grid, symbol, stack: np.ndarray) -> np.ndarray:
    """Multiplier applied to a batch of fields stacked along axis 0."""
    g = as_grid(grid)
    sym = _symbol_values(symbol)
    axes = tuple(range(1, g.spec.d + 1))
    return np.fft.ifftn(sym[None, ...] * np.fft.fftn(stack, axes=axes), axes=axes)
