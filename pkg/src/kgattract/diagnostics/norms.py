"""Energy, charge and the local energy seminorms / weighted metric on a grid.

|psi'|^2 is integrated on grid links, (psi_{j+1} - psi_j)/dx at the link midpoint.
That is the gradient energy the leapfrog scheme conserves, and it stays second
order accurate across the kinks that point oscillators put into the profile.
"""

from __future__ import annotations

import math
import warnings
from typing import Iterable

import numpy as np

from ..model import FieldState, GridSpec, ModelSpec, oscillator_nodes, potential


def _abs2(z: np.ndarray) -> np.ndarray:
    return z.real**2 + z.imag**2


def link_gradient(psi: np.ndarray, dx: float, periodic: bool = False) -> np.ndarray:
    """(psi_{j+1} - psi_j)/dx on the n-1 links (n links when periodic, last one wrapping)."""
    if periodic:
        return (np.roll(psi, -1) - psi) / dx
    return np.diff(psi) / dx


def gradient(psi: np.ndarray, dx: float) -> np.ndarray:
    """Centered first difference, one-sided at the edges (for snapshots and plots)."""
    return np.gradient(psi, dx, edge_order=1)


def energy_density(state: FieldState, grid: GridSpec, m: float,
                   periodic: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Node part |pi|^2 + m^2 |psi|^2 and link part |D psi|^2."""
    node = _abs2(state.pi) + m * m * _abs2(state.psi)
    link = _abs2(link_gradient(state.psi, grid.dx, periodic))
    return node, link


def pairing(psi: np.ndarray, rho: np.ndarray, grid: GridSpec) -> complex:
    """<rho, psi> by the trapezoid rule."""
    return complex(np.dot(grid.trapezoid_weights() * rho, psi))


def energy(state: FieldState, model: ModelSpec, grid: GridSpec, periodic: bool = False) -> float:
    node, link = energy_density(state, grid, model.mass, periodic)
    w = grid.trapezoid_weights(periodic)
    e = 0.5 * (float(np.dot(w, node)) + grid.dx * float(link.sum()))
    for o, j in zip(model.oscillators, oscillator_nodes(model, grid)):
        e += potential(o.coeffs, state.psi[j])
    if model.mean_field is not None:
        mf = model.mean_field
        e += potential(mf.coeffs, pairing(state.psi, mf.rho, grid))
    return e


def charge(state: FieldState, grid: GridSpec, periodic: bool = False) -> float:
    """Q = (i/2) int (conj(psi) pi - conj(pi) psi) dx = -int Im(conj(psi) pi) dx."""
    w = grid.trapezoid_weights(periodic)
    return -float(np.dot(w, (np.conj(state.psi) * state.pi).imag))


def _radius_index(grid: GridSpec, R: float) -> int:
    return min(int(math.floor(R / grid.dx + 1e-9)), grid.n_half)


def window_integrals(node: np.ndarray, grid: GridSpec, radii: Iterable[float],
                     link: np.ndarray | None = None) -> np.ndarray:
    """Integrals over |x| <= R for every R: trapezoid on ``node``, midpoint sum on ``link``.

    Either density may be complex (cross terms); one cumulative sum serves all radii.
    """
    r = np.array([_radius_index(grid, R) for R in radii], dtype=int)
    lo = grid.n_half - r
    hi = grid.n_half + r
    cn = np.concatenate(([0.0], np.cumsum(node)))
    out = grid.dx * (cn[hi + 1] - cn[lo] - 0.5 * (node[lo] + node[hi]))
    if link is not None:
        cl = np.concatenate(([0.0], np.cumsum(link[: grid.n_points - 1])))
        out = out + grid.dx * (cl[hi] - cl[lo])
    return out


def _window_energy(state: FieldState, grid: GridSpec, radii, m: float) -> np.ndarray:
    node, link = energy_density(state, grid, m)
    return window_integrals(node, grid, radii, link)


def seminorm_E_R(state: FieldState, grid: GridSpec, R: float, m: float) -> float:
    """Local energy seminorm over |x| <= R (epsilon = 0)."""
    if R > grid.half_width:
        warnings.warn(f"R={R} exceeds half_width={grid.half_width}; clamped", stacklevel=2)
        R = grid.half_width
    return math.sqrt(max(float(_window_energy(state, grid, [R], m)[0]), 0.0))


def seminorms(state: FieldState, grid: GridSpec, radii: Iterable[float], m: float) -> dict[float, float]:
    radii = [min(float(R), grid.half_width) for R in radii]
    vals = _window_energy(state, grid, radii, m)
    return {R: math.sqrt(max(float(v), 0.0)) for R, v in zip(radii, vals)}


def energy_norm(state: FieldState, grid: GridSpec, m: float) -> float:
    """Global energy norm (the seminorm at R = half_width)."""
    return seminorm_E_R(state, grid, grid.half_width, m)


def r_max(grid: GridSpec) -> int:
    return max(1, int(math.floor(grid.half_width + 1e-12)))


def metric_weights(grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Radii 1..R_max and weights 2^-R; the last weight also carries the closed-form tail 2^-R_max."""
    rm = r_max(grid)
    radii = np.arange(1, rm + 1, dtype=float)
    w = 2.0 ** (-radii)
    w[-1] += 2.0 ** (-rm)
    return radii, w


def ef_norm(state: FieldState, grid: GridSpec, m: float) -> float:
    """sum_R 2^-R ||state||_{E,R}, truncated at R_max with the tail folded into the last term."""
    radii, w = metric_weights(grid)
    vals = _window_energy(state, grid, radii, m)
    return float(np.dot(w, np.sqrt(np.maximum(vals, 0.0))))


def metric_E_F(a: FieldState, b: FieldState, grid: GridSpec, m: float) -> float:
    return ef_norm(a - b, grid, m)


def boundary_mass(state: FieldState, grid: GridSpec, m: float, width: float = 1.0) -> float:
    """Energy within ``width`` of either edge; the truncated metric is exact only when this vanishes."""
    node, link = energy_density(state, grid, m)
    k = max(1, int(round(width / grid.dx)))
    return float(grid.dx * (node[:k].sum() + node[-k:].sum() + link[:k].sum() + link[-k:].sum()))
