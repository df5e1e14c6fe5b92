"""Sphere quadrature nets, Fourier extension matrices, and sandwich operators.

A net discretizes the sphere of radius lambda in frequency space at spacing
1/R.  The extension matrix maps net coefficients to the plane-wave sum
sum_xi a(xi) e^{2 pi i x.xi} w_xi; sandwiching a potential between an
extension and a co-extension gives the dense matrix whose singular values
drive every restriction-type bound in the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .grid import as_grid
from .potential import PotentialField
from .randomize import OmegaField

__all__ = [
    "SphereNet",
    "SandwichOperator",
    "SandwichEnsemble",
    "SchattenParams",
    "build_net",
    "extension_matrix",
    "sandwich",
    "sandwich_randomized",
    "beltrami_weighted_sandwich",
    "singular_values",
    "schatten_norm",
    "weak_schatten",
]

# Node budget factor for the d=3 Fibonacci net: with n = ceil(F (lam R)^2)
# points the nearest-neighbor distance on the radius-lam sphere sits near
# lam * 3.1 / sqrt(n) ~ 1/R, inside the [spacing/2, 2 spacing] window.
_FIB_FACTOR = 9.6

_MIN_NODES = 8


@dataclass(frozen=True)
class SphereNet:
    """Quadrature nodes and weights on the frequency sphere |xi| = lam."""

    d: int
    lam: float
    R: float
    nodes: np.ndarray  # (n, d)
    weights: np.ndarray  # (n,)

    @property
    def spacing(self) -> float:
        """Target node spacing 1/R."""
        return 1.0 / self.R

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    def surface_measure(self) -> float:
        """Measure of the continuum sphere the weights should reproduce."""
        if self.d == 2:
            return 2.0 * np.pi * self.lam
        return 4.0 * np.pi * self.lam**2


@dataclass
class SandwichOperator:
    """Dense co-extension / potential / extension product."""

    net_out: SphereNet
    net_in: SphereNet
    matrix: np.ndarray
    potential_ref: dict = dc_field(default_factory=dict)  # provenance of the sandwiched field

    def norm(self) -> float:
        from .util import spectral_norm

        return spectral_norm(self.matrix)


@dataclass(frozen=True)
class SchattenParams:
    """Schatten exponent p (weak by default), smoothing order nu, slack eps."""

    p: float
    nu: float
    eps: float
    weak: bool = True

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"Schatten exponent must satisfy p >= 1, got {self.p}")
        if not self.nu > 0:
            raise ValueError(f"smoothing order must be positive, got {self.nu}")
        if not self.eps > 0:
            raise ValueError(f"slack must be positive, got {self.eps}")

    @classmethod
    def from_nu(cls, nu: float, d: int, eps: float, weak: bool = True) -> SchattenParams:
        """Derive p = (d-1)/nu from the smoothing order in dimension d."""
        if not 0 < nu <= d - 1:
            raise ValueError(f"nu must lie in (0, d-1], got {nu} in d={d}")
        return cls((d - 1) / nu, nu, eps, weak)


def build_net(lam: float, R: float, d: int) -> SphereNet:
    """Discretize the radius-lam frequency sphere at spacing 1/R.

    d=2 uses equispaced angles with uniform weights summing to the exact
    circumference; d=3 uses an offset Fibonacci lattice with equal-area
    weights summing to the exact sphere area.
    """
    if d == 2:
        n = int(np.ceil(2.0 * np.pi * lam * R))
        if n < _MIN_NODES:
            raise ValueError(
                f"net would have {n} nodes; lam*R too small for a usable sphere net"
            )
        theta = 2.0 * np.pi * np.arange(n) / n
        nodes = lam * np.column_stack([np.cos(theta), np.sin(theta)])
        weights = np.full(n, 2.0 * np.pi * lam / n)
        return SphereNet(d, lam, R, nodes, weights)
    if d == 3:
        n = int(np.ceil(_FIB_FACTOR * (lam * R) ** 2))
        if n < _MIN_NODES:
            raise ValueError(
                f"net would have {n} nodes; lam*R too small for a usable sphere net"
            )
        i = np.arange(n)
        z = 1.0 - (2.0 * i + 1.0) / n  # midpoint heights: equal-area bands
        golden = np.pi * (3.0 - np.sqrt(5.0))
        phi = golden * i
        rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        nodes = lam * np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
        weights = np.full(n, 4.0 * np.pi * lam**2 / n)
        return SphereNet(d, lam, R, nodes, weights)
    raise ValueError(f"sphere nets exist for d in (2, 3), got d={d}")


def extension_matrix(net: SphereNet, points: np.ndarray) -> np.ndarray:
    """Matrix of e^{2 pi i x.xi} w_xi over (point, node) pairs.

    Rows follow `points` (shape (m, d)); applying to net coefficients
    evaluates the weighted plane-wave sum at each point, and the conjugate
    transpose realizes the co-extension up to the caller's volume weights.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != net.d:
        raise ValueError(f"points have dimension {pts.shape[1]}, net has {net.d}")
    phase = np.exp(2j * np.pi * (pts @ net.nodes.T))
    return phase * net.weights[None, :]


def _support_data(field: PotentialField):
    # Empty support is legal here: the gram loop then yields the zero matrix.
    g = as_grid(field.grid)
    vals = field.values.ravel()
    support = np.flatnonzero(vals)
    return g, g.points(centered=True)[support], vals[support]


def _weighted_gram(pts, vals, net_out, net_in, cellvol, chunk=262144):
    """sum_x conj(e(x.mu)) V(x) e(x.nu) cellvol, accumulated in chunks."""
    n_out, n_in = net_out.n_nodes, net_in.n_nodes
    m = np.zeros((n_out, n_in), dtype=complex)
    step = max(1, int(chunk // max(n_out, n_in)))
    for lo in range(0, pts.shape[0], step):
        sl = slice(lo, lo + step)
        p_out = np.exp(2j * np.pi * (pts[sl] @ net_out.nodes.T))
        p_in = (
            p_out
            if net_in is net_out
            else np.exp(2j * np.pi * (pts[sl] @ net_in.nodes.T))
        )
        m += (p_out.conj().T * (vals[sl] * cellvol)) @ p_in
    return m


def _apply_net_weights(m, net_out, net_in):
    m *= np.sqrt(net_out.weights)[:, None]
    m *= np.sqrt(net_in.weights)[None, :]
    return m


def sandwich(net_out: SphereNet, net_in: SphereNet, field: PotentialField) -> SandwichOperator:
    """Assemble the co-extension/potential/extension matrix on support nodes.

    Entry (mu, nu) is sum_x conj(e(x.mu)) V(x) e(x.nu) cellvol sqrt(w_mu w_nu)
    with x running over the grid nodes where V is nonzero, in torus-centered
    coordinates so wrapped supports stay contiguous.
    """
    g, pts, vals = _support_data(field)
    m = _weighted_gram(pts, vals, net_out, net_in, g.cellvol)
    _apply_net_weights(m, net_out, net_in)
    return SandwichOperator(net_out, net_in, m, {"support_nodes": pts.shape[0]})


def _cell_blocks(field: PotentialField, h: float):
    """Split node values into h-cell blocks; None when cells don't tile nodes."""
    gs = field.grid
    ratio = h / gs.dx
    r = int(round(ratio))
    if r < 1 or abs(ratio - r) > 1e-9:
        return None
    nc = gs.N // r
    if nc * r != gs.N:
        return None
    d = gs.d
    shape = sum(((nc, r),) * d, ())
    blocks = field.values.reshape(shape)
    # (nc, r, nc, r, ...) -> (nc, ..., nc, r, ..., r)
    order = tuple(range(0, 2 * d, 2)) + tuple(range(1, 2 * d, 2))
    return np.ascontiguousarray(blocks.transpose(order)), nc, r


class SandwichEnsemble:
    """Randomized sandwiches over many realizations of one (V, net) pair.

    All realization-independent factors are precomputed: cells on which V is
    constant and that share one torus offset contribute through a corner
    phase matrix and a separable in-cell geometric sum, so a realization
    costs two small matrix products instead of a full node-level assembly.
    Cells cut by the support boundary (or the seam at L/2) keep per-node
    phases.  The result equals the node-level sandwich of the randomized
    potential to rounding error.
    """

    def __init__(self, net_out: SphereNet, net_in: SphereNet, field: PotentialField, h: float):
        self.net_out = net_out
        self.net_in = net_in
        self.field = field
        self.h = float(h)
        g = as_grid(field.grid)
        self._g = g
        gs = g.spec
        split = _cell_blocks(field, h)
        self._factored = split is not None
        if not self._factored:
            return
        blocks, nc, r = split
        d = gs.d
        self._nc, self._r = nc, r
        per_cell = r**d
        flat = blocks.reshape(nc**d, per_cell)

        const = np.all(flat == flat[:, :1], axis=1)
        tau_axis = (g.axis_raw >= gs.L / 2).astype(int)
        tau_blocks = tau_axis.reshape(nc, r)
        tau_const_axis = np.all(tau_blocks == tau_blocks[:, :1], axis=1)
        tau_ok = tau_const_axis
        for _ in range(d - 1):
            tau_ok = np.logical_and.outer(tau_ok, tau_const_axis)
        uniform = const & tau_ok.ravel()
        cell_vals = flat[:, 0]
        self._active = uniform & (cell_vals != 0)
        self._active_vals = cell_vals[self._active]

        if self._active.any():
            corner_axis = g.axis_centered[::r]  # centered coordinates of block corners
            mesh = np.meshgrid(*([corner_axis] * d), indexing="ij")
            corners = np.stack([c.ravel() for c in mesh], axis=-1)[self._active]
            self._u_out = np.exp(2j * np.pi * (corners @ net_out.nodes.T))
            self._u_in = (
                self._u_out
                if net_in is net_out
                else np.exp(2j * np.pi * (corners @ net_in.nodes.T))
            )
            # In-cell phase sum: product over axes of geometric sums of length r.
            kappa = net_in.nodes[None, :, :] - net_out.nodes[:, None, :]
            sigma = np.ones((net_out.n_nodes, net_in.n_nodes), dtype=complex)
            for ax in range(d):
                half = np.pi * gs.dx * kappa[..., ax]
                s = np.sin(half)
                tiny = np.abs(s) < 1e-12
                ratio = np.where(tiny, float(r), np.sin(half * r) / np.where(tiny, 1.0, s))
                sigma *= np.exp(1j * half * (r - 1)) * ratio
            self._sigma = sigma

        self._rest_cells = np.flatnonzero(~self._active & np.any(flat != 0, axis=1))
        if self._rest_cells.size:
            node_idx = _cell_node_indices(gs, nc, r, self._rest_cells)
            pts = g.points(centered=True)[node_idx]
            self._rest_vals = field.values.ravel()[node_idx]
            self._rest_repeat = per_cell
            self._p_out = np.exp(2j * np.pi * (pts @ net_out.nodes.T))
            self._p_in = (
                self._p_out
                if net_in is net_out
                else np.exp(2j * np.pi * (pts @ net_in.nodes.T))
            )

    def with_omega(self, omega: OmegaField) -> SandwichOperator:
        if omega.grid != self.field.grid:
            raise ValueError("omega drawn for a different grid than the potential")
        if abs(omega.spec.h - self.h) > 1e-12:
            raise ValueError("omega cell size differs from the ensemble's")
        if not self._factored:
            from .randomize import anderson_randomize

            return sandwich(self.net_out, self.net_in, anderson_randomize(self.field, omega))
        gs = self._g.spec
        omega_flat = omega.cells.reshape(-1)
        n_out, n_in = self.net_out.n_nodes, self.net_in.n_nodes
        m = np.zeros((n_out, n_in), dtype=complex)
        if self._active.any():
            dvals = (omega_flat[self._active] * self._active_vals).astype(complex)
            m += ((self._u_out.conj().T * dvals) @ self._u_in) * self._sigma
        if self._rest_cells.size:
            per_node = np.repeat(omega_flat[self._rest_cells], self._rest_repeat)
            m += (self._p_out.conj().T * (self._rest_vals * per_node)) @ self._p_in
        m *= gs.cellvol
        _apply_net_weights(m, self.net_out, self.net_in)
        return SandwichOperator(
            self.net_out,
            self.net_in,
            m,
            {
                "uniform_cells": int(self._active.sum()),
                "mixed_cells": int(self._rest_cells.size),
                "realization_index": omega.spec.realization_index,
            },
        )


def sandwich_randomized(
    net_out: SphereNet,
    net_in: SphereNet,
    field: PotentialField,
    omega: OmegaField,
) -> SandwichOperator:
    """Sandwich of the cell-randomized potential, factored over cells.

    One-shot form of SandwichEnsemble: equals sandwich(net_out, net_in,
    anderson_randomize(field, omega)) up to rounding, at a fraction of the
    assembly cost when cells tile the node lattice.
    """
    return SandwichEnsemble(net_out, net_in, field, omega.spec.h).with_omega(omega)


def _cell_node_indices(gs, nc, r, cells):
    """Flat node indices of the given flat cell indices, cell-major order."""
    d = gs.d
    cell_multi = np.unravel_index(cells, (nc,) * d)
    offsets = np.meshgrid(*([np.arange(r)] * d), indexing="ij")
    offsets = np.stack([o.ravel() for o in offsets], axis=-1)  # (r^d, d)
    idx = 0
    for ax in range(d):
        axis_nodes = cell_multi[ax][:, None] * r + offsets[None, :, ax]
        idx = idx * gs.N + axis_nodes
    return idx.reshape(-1)


def beltrami_weighted_sandwich(
    net: SphereNet,
    field: PotentialField,
    nu: float,
    omega: OmegaField | None = None,
) -> SandwichOperator:
    """Conjugate the sandwich by <sphere Laplacian>^(nu/4) in angular modes.

    Implemented for d=2, where the angular Fourier modes k of the circle
    carry the multiplier (2 + (k/lam)^2)^(nu/4); nu=0 reduces to the plain
    sandwich.  d=3 nets are rejected.
    """
    if net.d != 2:
        raise ValueError("angular-mode weighting is implemented for d=2 nets only")
    if nu < 0:
        raise ValueError(f"nu must be nonnegative, got {nu}")
    base = (
        sandwich(net, net, field)
        if omega is None
        else sandwich_randomized(net, net, field, omega)
    )
    m2 = _angular_conjugate(base.matrix, net.lam, nu)
    ref = dict(base.potential_ref, nu=nu)
    return SandwichOperator(net, net, m2, ref)


def _angular_conjugate(matrix: np.ndarray, lam: float, nu: float) -> np.ndarray:
    """Two-sided <(k/lam)^2>^(nu/4) multiplier in the circle's Fourier modes."""
    n = matrix.shape[0]
    modes = np.fft.fftfreq(n, d=1.0 / n)  # integer angular modes
    mult = (2.0 + (modes / lam) ** 2) ** (nu / 4.0)
    m1 = np.fft.ifft(mult[:, None] * np.fft.fft(matrix, axis=0), axis=0)
    return np.fft.fft(mult[None, :] * np.fft.ifft(m1, axis=1), axis=1)


def singular_values(op) -> np.ndarray:
    """Descending singular values of a sandwich (or bare) matrix."""
    matrix = op.matrix if isinstance(op, SandwichOperator) else np.asarray(op)
    return np.linalg.svd(matrix, compute_uv=False)


def schatten_norm(svals, p: float) -> float:
    """(sum s_k^p)^(1/p); p >= 1."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    s = np.asarray(svals, dtype=float)
    return float((s**p).sum() ** (1.0 / p))


def weak_schatten(svals, p: float) -> float:
    """sup_k s_k k^(1/p) with 1-based ranks and s sorted descending."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    s = np.sort(np.asarray(svals, dtype=float))[::-1]
    if s.size == 0:
        return 0.0
    k = np.arange(1, s.size + 1, dtype=float)
    return float((s * k ** (1.0 / p)).max())
