"""Models, grids and field states for Klein-Gordon fields with concentrated nonlinearities.

Three couplings are supported on the line:

* point oscillators ``delta(x - X_J) F_J(psi(X_J, t))`` (one or several),
* a mean-field coupling ``rho(x) F(<rho, psi>)``,
* no coupling at all (the free field, used for dispersive-decay checks).

Every nonlinearity derives from a polynomial potential
``U(z) = sum_l u_l |z|^{2l}`` and is evaluated as ``g(|z|^2) z`` with ``g`` real,
so U(1) equivariance holds to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "OscillatorSpec",
    "MeanFieldSpec",
    "ModelSpec",
    "GridSpec",
    "FieldState",
    "GapCheck",
    "Finding",
    "force",
    "force_gain",
    "potential",
    "check_gap_condition",
    "validate_model",
    "oscillator_nodes",
]


def _as_coeffs(coeffs: Sequence[float]) -> np.ndarray:
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("potential coefficients must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(c)):
        raise ValueError("potential coefficients must be finite")
    return c


def force_gain(coeffs: Sequence[float], s):
    """Real factor g(s) with F(z) = g(|z|^2) z, i.e. g(s) = -sum_{l>=1} 2 l u_l s^(l-1)."""
    c = _as_coeffs(coeffs)
    s = np.asarray(s, dtype=float)
    g = np.zeros_like(s)
    # Horner in s over l = p..1
    for l in range(c.size - 1, 0, -1):
        g = g * s - 2.0 * l * c[l]
    return g


def force(coeffs: Sequence[float], z):
    """Oscillator force F(z) = -grad U(z) for U(z) = sum_l u_l |z|^{2l}.

    Accepts scalars or arrays; scalars give a Python complex back.
    """
    z_arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z_arr)):
        raise ValueError("force: non-finite argument")
    s = z_arr.real**2 + z_arr.imag**2
    out = force_gain(coeffs, s) * z_arr
    if out.ndim == 0:
        return complex(out)
    return out


def potential(coeffs: Sequence[float], z):
    """U(z) = sum_l u_l |z|^{2l}."""
    c = _as_coeffs(coeffs)
    z_arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z_arr)):
        raise ValueError("potential: non-finite argument")
    s = z_arr.real**2 + z_arr.imag**2
    u = np.zeros_like(s)
    for l in range(c.size - 1, -1, -1):
        u = u * s + c[l]
    if u.ndim == 0:
        return float(u)
    return u


def _bounded_below(c: np.ndarray) -> bool:
    if c.size == 1 or not np.any(c[1:]):
        return True
    return bool(c[-1] > 0)


@dataclass(frozen=True)
class OscillatorSpec:
    position: float
    coeffs: tuple[float, ...]

    def __post_init__(self):
        c = _as_coeffs(self.coeffs)
        if c.size > 1 and c[-1] == 0.0:
            raise ValueError("leading potential coefficient u_p must be nonzero")
        object.__setattr__(self, "coeffs", tuple(float(v) for v in c))
        object.__setattr__(self, "position", float(self.position))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def strictly_nonlinear(self) -> bool:
        return self.degree >= 2 and self.coeffs[-1] > 0

    @property
    def bounded_below(self) -> bool:
        return _bounded_below(np.asarray(self.coeffs))


@dataclass(frozen=True, eq=False)
class MeanFieldSpec:
    """Mean-field coupling; ``rho`` is sampled on the grid the model runs on."""

    rho: np.ndarray
    coeffs: tuple[float, ...]

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        if rho.ndim != 1 or not np.any(rho != 0.0):
            raise ValueError("rho must be a 1-d sample array that is not identically zero")
        c = _as_coeffs(self.coeffs)
        if c.size > 1 and c[-1] == 0.0:
            raise ValueError("leading potential coefficient u_p must be nonzero")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "coeffs", tuple(float(v) for v in c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def strictly_nonlinear(self) -> bool:
        return self.degree >= 2 and self.coeffs[-1] > 0

    @property
    def bounded_below(self) -> bool:
        return _bounded_below(np.asarray(self.coeffs))


@dataclass(frozen=True, eq=False)
class ModelSpec:
    mass: float
    oscillators: tuple[OscillatorSpec, ...] = ()
    mean_field: MeanFieldSpec | None = None

    def __post_init__(self):
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise ValueError("mass must be positive and finite")
        osc = tuple(self.oscillators)
        object.__setattr__(self, "oscillators", osc)
        if osc and self.mean_field is not None:
            raise ValueError("choose either oscillators or a mean-field coupling, not both")
        pos = [o.position for o in osc]
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError("oscillator positions must be strictly increasing")

    @property
    def kind(self) -> str:
        if self.mean_field is not None:
            return "meanfield"
        if self.oscillators:
            return "oscillators"
        return "free"

    @property
    def positions(self) -> list[float]:
        return [o.position for o in self.oscillators]


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on [-half_width, half_width] with an odd number of nodes, x=0 a node."""

    half_width: float
    dx: float

    def __post_init__(self):
        if not (self.half_width > 0 and self.dx > 0):
            raise ValueError("half_width and dx must be positive")
        ratio = self.half_width / self.dx
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValueError(
                f"half_width={self.half_width} is not an integer multiple of dx={self.dx}"
            )

    @property
    def n_half(self) -> int:
        return int(round(self.half_width / self.dx))

    @property
    def n_points(self) -> int:
        return 2 * self.n_half + 1

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.n_points) - self.n_half) * self.dx

    def node_index(self, position: float) -> int:
        return int(round(position / self.dx)) + self.n_half

    def on_grid(self, position: float, rtol: float = 1e-9) -> bool:
        j = position / self.dx
        return abs(j - round(j)) <= rtol * max(1.0, abs(j)) and abs(position) <= self.half_width

    def trapezoid_weights(self, periodic: bool = False) -> np.ndarray:
        w = np.full(self.n_points, self.dx)
        if not periodic:
            w[0] = w[-1] = 0.5 * self.dx
        return w


@dataclass
class FieldState:
    psi: np.ndarray
    pi: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=complex)
        self.pi = np.asarray(self.pi, dtype=complex)
        if self.psi.shape != self.pi.shape or self.psi.ndim != 1:
            raise ValueError("psi and pi must be 1-d arrays of equal length")

    @classmethod
    def zeros(cls, grid: GridSpec, time: float = 0.0) -> "FieldState":
        n = grid.n_points
        return cls(np.zeros(n, complex), np.zeros(n, complex), time)

    def copy(self) -> "FieldState":
        return FieldState(self.psi.copy(), self.pi.copy(), self.time)

    def rotate(self, theta: float) -> "FieldState":
        """U(1) action (psi, pi) -> e^{i theta} (psi, pi)."""
        ph = np.exp(1j * theta)
        return FieldState(ph * self.psi, ph * self.pi, self.time)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.psi)) and np.all(np.isfinite(self.pi)))

    def __sub__(self, other: "FieldState") -> "FieldState":
        return FieldState(self.psi - other.psi, self.pi - other.pi, self.time)

    def __add__(self, other: "FieldState") -> "FieldState":
        return FieldState(self.psi + other.psi, self.pi + other.pi, self.time)


def oscillator_nodes(model: ModelSpec, grid: GridSpec) -> list[int]:
    nodes = []
    for o in model.oscillators:
        if not grid.on_grid(o.position):
            raise ValueError(f"oscillator at x={o.position} is not a grid node (dx={grid.dx})")
        nodes.append(grid.node_index(o.position))
    return nodes


@dataclass(frozen=True)
class GapCheck:
    holds: bool
    lhs: float
    rhs: float
    vacuous: bool = False


def check_gap_condition(model: ModelSpec) -> GapCheck:
    """Spacing condition that excludes trapped modes between strictly nonlinear oscillators.

    lhs = min_J sqrt(pi^2 / |X_{J+1} - X_J|^2 + m^2),
    rhs = m * max_J min(prod_{l<=J}(2 p_l - 1), prod_{l>=J}(2 p_l - 1)).
    """
    osc = model.oscillators
    if model.mean_field is not None:
        raise ValueError("gap condition applies to oscillator couplings only")
    for j, o in enumerate(osc):
        if not o.strictly_nonlinear:
            raise ValueError(
                f"oscillator {j + 1} is not strictly nonlinear (need u_p > 0 and p >= 2)"
            )
    m = model.mass
    factors = [2 * o.degree - 1 for o in osc]
    rhs = m * max(
        (min(math.prod(factors[: j + 1]), math.prod(factors[j:])) for j in range(len(osc))),
        default=0.0,
    )
    if len(osc) < 2:
        return GapCheck(holds=True, lhs=math.inf, rhs=float(rhs), vacuous=True)
    gaps = np.diff([o.position for o in osc])
    lhs = float(np.min(np.sqrt(math.pi**2 / gaps**2 + m * m)))
    return GapCheck(holds=lhs > rhs, lhs=lhs, rhs=float(rhs))


@dataclass(frozen=True)
class Finding:
    kind: str  # off_grid | not_strictly_nonlinear | unbounded_below | bad_rho
    index: int | None
    message: str


def validate_model(model: ModelSpec, grid: GridSpec) -> list[Finding]:
    """Report problems with a model/grid pair; an empty list means valid."""
    out: list[Finding] = []
    for j, o in enumerate(model.oscillators):
        if not grid.on_grid(o.position):
            out.append(Finding("off_grid", j, f"off-grid oscillator at x={o.position} (dx={grid.dx})"))
        if not o.strictly_nonlinear:
            out.append(Finding("not_strictly_nonlinear", j,
                               f"oscillator {j + 1} is not strictly nonlinear (p={o.degree})"))
        if not o.bounded_below:
            out.append(Finding("unbounded_below", j,
                               f"potential of oscillator {j + 1} is not bounded below"))
    mf = model.mean_field
    if mf is not None:
        if mf.rho.shape != (grid.n_points,):
            out.append(Finding("bad_rho", None, "rho is not sampled on this grid"))
        if not mf.strictly_nonlinear:
            out.append(Finding("not_strictly_nonlinear", None,
                               f"mean-field potential is not strictly nonlinear (p={mf.degree})"))
        if not mf.bounded_below:
            out.append(Finding("unbounded_below", None, "mean-field potential is not bounded below"))
    return out
