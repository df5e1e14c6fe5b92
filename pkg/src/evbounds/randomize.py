"""Cellwise sign/Gaussian randomization of potentials on an h-lattice.

Each cell of the cube lattice h*Z^d (anchored at the box origin) carries one
i.i.d. weight: a symmetric +-1 sign or a standard Gaussian.  Weights come
from a counter-based Philox stream keyed by (master_seed, realization_index)
with the flattened cell index as counter position, so a cell's value never
depends on platform, draw order, or how many other cells exist before it in
a parallel schedule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import SupportError
from .grid import GridSpec, as_grid
from .potential import PotentialField
from .util import wilson_interval

__all__ = [
    "OmegaSpec",
    "OmegaField",
    "TailEntry",
    "draw_omega",
    "anderson_randomize",
    "tail_table",
]

DISTRIBUTIONS = ("bernoulli", "gaussian")
_U64 = np.uint64(0xFFFFFFFFFFFFFFFF)


@dataclass(frozen=True)
class OmegaSpec:
    """Cell size, weight law, and the seed pair identifying one realization."""

    h: float
    distribution: str
    master_seed: int
    realization_index: int = 0

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"cell size must be positive, got {self.h}")
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"distribution must be one of {DISTRIBUTIONS}")
        if self.realization_index < 0:
            raise ValueError("realization_index must be nonnegative")

    def with_realization(self, index: int) -> OmegaSpec:
        return OmegaSpec(self.h, self.distribution, self.master_seed, index)


@dataclass
class OmegaField:
    """One drawn weight per lattice cell covering the box."""

    spec: OmegaSpec
    grid: GridSpec
    cells: np.ndarray  # shape (cells_per_axis,) * d

    @property
    def cells_per_axis(self) -> int:
        return self.cells.shape[0]

    @classmethod
    def constant(cls, spec: OmegaSpec, grid, value: float = 1.0) -> OmegaField:
        """All-equal weights; value 1 reproduces the deterministic potential."""
        gs = as_grid(grid).spec
        nc = _cells_per_axis(spec, gs)
        return cls(spec, gs, np.full((nc,) * gs.d, value, dtype=float))

    def at_nodes(self) -> np.ndarray:
        """Expand cell weights to the grid nodes (node x sits in cell floor(x/h))."""
        g = as_grid(self.grid)
        idx = _node_cell_index(self.spec, g.spec)
        return self.cells[idx]


@dataclass(frozen=True)
class TailEntry:
    threshold: float
    fraction: float
    lower: float
    upper: float


def _cells_per_axis(spec: OmegaSpec, gs: GridSpec) -> int:
    if spec.h > gs.L:
        raise SupportError(f"cell size {spec.h} exceeds box side {gs.L}")
    ratio = gs.L / spec.h
    # Tolerate float noise when L/h is meant to be integral.
    return int(np.ceil(ratio - 1e-9 * max(1.0, ratio)))


def _node_cell_index(spec: OmegaSpec, gs: GridSpec):
    nc = _cells_per_axis(spec, gs)
    axis_idx = np.floor(np.arange(gs.N) * (gs.L / gs.N) / spec.h).astype(int)
    axis_idx = np.minimum(axis_idx, nc - 1)
    return np.ix_(*([axis_idx] * gs.d)) if gs.d > 1 else axis_idx


def _raw_stream(spec: OmegaSpec, count: int) -> np.ndarray:
    key = np.array(
        [np.uint64(spec.master_seed) & _U64, np.uint64(spec.realization_index) & _U64],
        dtype=np.uint64,
    )
    return np.random.Philox(key=key).random_raw(count)


def cell_values(spec: OmegaSpec, count: int) -> np.ndarray:
    """Weights for cells 0..count-1 of one realization, platform-independent.

    Bernoulli signs use one raw bit per cell; Gaussians map the top 53 raw
    bits through the inverse normal CDF, avoiding any library-specific
    normal sampler.
    """
    raw = _raw_stream(spec, count)
    if spec.distribution == "bernoulli":
        return np.where(raw & np.uint64(1), 1.0, -1.0)
    u = (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53 + 2.0**-54
    return ndtri(u)


def draw_omega(spec: OmegaSpec, grid) -> OmegaField:
    """Draw the weight field for every cell meeting the box."""
    gs = as_grid(grid).spec
    nc = _cells_per_axis(spec, gs)
    vals = cell_values(spec, nc**gs.d)
    return OmegaField(spec, gs, vals.reshape((nc,) * gs.d))


def anderson_randomize(field: PotentialField, omega: OmegaField) -> PotentialField:
    """Multiply V by the cell weights: x in cell j picks up omega_j.

    The support never grows, and for sign weights every pointwise magnitude,
    hence every L^q norm, is preserved exactly.
    """
    if omega.grid != field.grid:
        raise SupportError(
            "omega was drawn for a different grid; cell cover does not match the field"
        )
    values = field.values * omega.at_nodes()
    return PotentialField(field.grid, values, field.support_radius)


def tail_table(samples, thresholds) -> list[TailEntry]:
    """Empirical exceedance fractions with Wilson 95% intervals."""
    arr = np.sort(np.asarray(samples, dtype=float))
    n = arr.size
    if n < 100:
        raise ValueError(f"too few samples for a tail table: {n} < 100")
    out = []
    for t in thresholds:
        k = int(n - np.searchsorted(arr, t, side="right"))
        lo, hi = wilson_interval(k, n)
        out.append(TailEntry(float(t), k / n, lo, hi))
    return out
