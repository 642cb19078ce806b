"""Explicit leapfrog (velocity Verlet in (psi, pi) form) for the point-coupled and mean-field models.

The delta coupling acts at a single node with weight 1/dx. Boundary modes:

* ``dirichlet``: edges pinned to zero;
* ``periodic``: the last node wraps to the first (the grid is treated as a ring);
* ``transparent``: first-order outgoing relations psi_t = +psi_x (left), psi_t = -psi_x (right),
  discretized with Mur's one-sided update, exact transport for m = 0 at cfl = 1 and
  absorbing to first order otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .diagnostics.norms import charge, energy, energy_density, seminorms
from .diagnostics.report import DiagRecord
from .model import FieldState, GridSpec, ModelSpec, force, oscillator_nodes
from .solitary import manifold_distance

BOUNDARY_MODES = ("transparent", "dirichlet", "periodic")
REFLECTION_LIMIT = 1e-3


@dataclass(frozen=True)
class SchemeParams:
    dt: float
    dx: float
    bc: str = "transparent"
    buffer_check: bool = False
    overflow_guard: float = 1e12

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0 and math.isfinite(self.dx) and self.dx > 0):
            raise ValueError("dt and dx must be finite and positive")
        if self.bc not in BOUNDARY_MODES:
            raise ValueError(f"bc must be one of {BOUNDARY_MODES}, got {self.bc!r}")
        if not self.cfl < 1.0:
            raise ValueError(f"cfl = dt/dx = {self.cfl:.6g} must be < 1")

    @property
    def cfl(self) -> float:
        return self.dt / self.dx

    @classmethod
    def from_cfl(cls, grid: GridSpec, cfl: float = 0.5, **kw) -> "SchemeParams":
        return cls(dt=cfl * grid.dx, dx=grid.dx, **kw)


@dataclass
class DiagConfig:
    """What to record at every sample: seminorm radii, manifold-distance cadence (in samples, 0 = never)."""

    radii: tuple[float, ...] = (1.0, 2.0, 5.0, 10.0)
    distance_every: int = 20
    conserved: bool = True


@dataclass
class BoundaryFlux:
    outgoing: float = 0.0
    incoming: float = 0.0

    @property
    def reflection(self) -> float:
        return self.incoming / self.outgoing if self.outgoing > 0 else 0.0


@dataclass
class EvolveResult:
    final: FieldState
    records: list[DiagRecord]
    traces: np.ndarray  # (steps + 1, n_traces), psi at oscillator nodes then probes
    trace_labels: list[str]
    dt: float
    status: str  # completed | boundary_contaminated | blown_up
    regime: str  # causality_buffer | boundary_dependent
    steps: int
    flux: BoundaryFlux = field(default_factory=BoundaryFlux)

    def trace(self, label: str) -> np.ndarray:
        return self.traces[:, self.trace_labels.index(label)]

    def trace_dict(self) -> dict[str, np.ndarray]:
        return {lab: self.traces[:, k] for k, lab in enumerate(self.trace_labels)}


class _Coupling:
    """Acceleration D2 psi - m^2 psi + coupling, with grid data resolved once."""

    def __init__(self, model: ModelSpec, grid: GridSpec, bc: str):
        if model.mean_field is not None and len(model.mean_field.rho) != grid.n_points:
            raise ValueError("mean-field rho must be sampled on the grid")
        self.m2 = model.mass**2
        self.dx = grid.dx
        self.inv_dx2 = 1.0 / grid.dx**2
        self.periodic = bc == "periodic"
        self.osc = [(j, o.coeffs) for o, j in zip(model.oscillators, oscillator_nodes(model, grid))]
        self.mf = model.mean_field
        if self.mf is not None:
            self.rho = np.asarray(self.mf.rho, dtype=float)
            self.rho_w = grid.trapezoid_weights(self.periodic) * self.rho

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        acc = np.empty_like(psi)
        if self.periodic:
            acc[:] = (np.roll(psi, 1) - 2.0 * psi + np.roll(psi, -1)) * self.inv_dx2 - self.m2 * psi
        else:
            acc[1:-1] = (psi[:-2] - 2.0 * psi[1:-1] + psi[2:]) * self.inv_dx2 - self.m2 * psi[1:-1]
            acc[0] = acc[-1] = 0.0
        for j, c in self.osc:
            acc[j] += force(c, psi[j]) / self.dx
        if self.mf is not None:
            acc += self.rho * force(self.mf.coeffs, complex(np.dot(self.rho_w, psi)))
        return acc


def _impose_psi(psi: np.ndarray, old: np.ndarray, scheme: SchemeParams) -> None:
    if scheme.bc == "dirichlet":
        psi[0] = psi[-1] = 0.0
    elif scheme.bc == "transparent":
        r = (scheme.cfl - 1.0) / (scheme.cfl + 1.0)
        psi[0] = old[1] + r * (psi[1] - old[0])
        psi[-1] = old[-2] + r * (psi[-2] - old[-1])


def _impose_pi(psi: np.ndarray, pi: np.ndarray, scheme: SchemeParams) -> None:
    if scheme.bc == "dirichlet":
        pi[0] = pi[-1] = 0.0
    elif scheme.bc == "transparent":
        # psi_t = +psi_x on the left, -psi_x on the right
        pi[0] = (psi[1] - psi[0]) / scheme.dx
        pi[-1] = -(psi[-1] - psi[-2]) / scheme.dx


def apply_boundary(state: FieldState, scheme: SchemeParams, prev: FieldState | None = None) -> FieldState:
    """Impose the edge values of ``state`` in place; ``prev`` is the state one step earlier.

    Periodic needs nothing (the stencil wraps); transparent needs ``prev``.
    """
    if scheme.bc == "transparent" and prev is None:
        raise ValueError("transparent boundary needs the previous state")
    if prev is not None:
        _impose_psi(state.psi, prev.psi, scheme)
    elif scheme.bc == "dirichlet":
        _impose_psi(state.psi, state.psi, scheme)
    _impose_pi(state.psi, state.pi, scheme)
    return state


class Stepper:
    """Leapfrog stepping with the acceleration of the last produced state cached."""

    def __init__(self, model: ModelSpec, grid: GridSpec, scheme: SchemeParams):
        if abs(scheme.dx - grid.dx) > 1e-12 * grid.dx:
            raise ValueError("scheme dx does not match the grid")
        self.grid, self.scheme = grid, scheme
        self.accel = _Coupling(model, grid, scheme.bc)
        self._acc = None
        self._acc_of = None

    def advance(self, state: FieldState, t_new: float) -> FieldState:
        dt = self.scheme.dt
        acc = self._acc if state.psi is self._acc_of else self.accel(state.psi)
        pi_half = state.pi + 0.5 * dt * acc
        psi = state.psi + dt * pi_half
        _impose_psi(psi, state.psi, self.scheme)
        acc = self.accel(psi)
        pi = pi_half + 0.5 * dt * acc
        _impose_pi(psi, pi, self.scheme)
        self._acc, self._acc_of = acc, psi
        return FieldState(psi, pi, t_new)


def step(state: FieldState, model: ModelSpec, grid: GridSpec, scheme: SchemeParams) -> FieldState:
    """One leapfrog step including the boundary update."""
    return Stepper(model, grid, scheme).advance(state, state.time + scheme.dt)


# ---------------------------------------------------------------------------
# causality buffer and boundary flux


def support_radius(state: FieldState, grid: GridSpec, m: float, rel: float = 1e-12) -> float:
    """Largest |x| where the energy density exceeds ``rel`` times its maximum."""
    node, _ = energy_density(state, grid, m)
    top = float(node.max())
    if top == 0.0:
        return 0.0
    idx = np.nonzero(node > rel * top)[0]
    return float(np.abs(grid.x[idx]).max())


def causality_buffered(state: FieldState, grid: GridSpec, m: float, T: float) -> bool:
    """True when nothing emitted from the data's support can reach the edge and return within T."""
    return T <= 2.0 * (grid.half_width - support_radius(state, grid, m))


class _FluxMonitor:
    """Accumulates outgoing vs incoming characteristic energy a few nodes in from each edge."""

    def __init__(self, grid: GridSpec, depth: int = 10):
        n = grid.n_points
        self.left = min(depth, n // 4)
        self.right = n - 1 - self.left
        self.dx = grid.dx
        self.flux = BoundaryFlux()

    def update(self, s: FieldState):
        for j, sign in ((self.left, +1), (self.right, -1)):
            dpsi = (s.psi[j + 1] - s.psi[j - 1]) / (2 * self.dx)
            plus = 0.5 * (s.pi[j] + dpsi)  # left-moving content
            minus = 0.5 * (s.pi[j] - dpsi)  # right-moving content
            out, inc = (plus, minus) if sign > 0 else (minus, plus)
            self.flux.outgoing += abs(out) ** 2
            self.flux.incoming += abs(inc) ** 2


# ---------------------------------------------------------------------------
# evolution


def _record(state: FieldState, model: ModelSpec, grid: GridSpec, diag: DiagConfig, periodic: bool,
            with_distance: bool) -> DiagRecord:
    m = model.mass
    rec = DiagRecord(
        time=state.time,
        energy=energy(state, model, grid, periodic) if diag.conserved else math.nan,
        charge=charge(state, grid, periodic) if diag.conserved else math.nan,
        seminorms=seminorms(state, grid, diag.radii, m) if diag.radii else {},
    )
    if with_distance and model.kind != "free":
        rep = manifold_distance(state, model, grid)
        rec.ef_metric_to_S = rep.distance
        rec.best_omega = rep.best_omega
        rec.best_amplitude = rep.best_amplitude
    return rec


def evolve(state0: FieldState, model: ModelSpec, grid: GridSpec, scheme: SchemeParams, T: float,
           sample_every: int = 100, diagnostics: DiagConfig | None = None,
           probes: Sequence[float] = (), snapshot: Callable[[FieldState], None] | None = None,
           snapshot_every: int = 0) -> EvolveResult:
    """Evolve ``state0`` up to time ``state0.time + T``.

    ``traces`` hold psi at every oscillator node and every probe position at every step.
    Records are taken every ``sample_every`` steps (and at the end); the manifold
    distance every ``diagnostics.distance_every`` records.
    """
    if not T >= 0:
        raise ValueError("T must be >= 0")
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    if state0.psi.shape != (grid.n_points,):
        raise ValueError("state does not match the grid")
    diag = diagnostics or DiagConfig()
    periodic = scheme.bc == "periodic"
    stepper = Stepper(model, grid, scheme)
    n_steps = int(round(T / scheme.dt))
    t0 = state0.time

    nodes = oscillator_nodes(model, grid)
    labels = [f"osc{k}" for k in range(len(nodes))]
    for p in probes:
        if not grid.on_grid(p):
            raise ValueError(f"probe position {p} is not a grid node")
        nodes.append(grid.node_index(p))
        labels.append(f"x={p:.17g}")
    nodes_arr = np.array(nodes, dtype=int)
    traces = np.empty((n_steps + 1, len(nodes)), dtype=complex)

    buffered = causality_buffered(state0, grid, model.mass, T)
    regime = "causality_buffer" if buffered else "boundary_dependent"
    monitor = _FluxMonitor(grid) if scheme.buffer_check and not buffered else None

    state = state0.copy()
    traces[0] = state.psi[nodes_arr]
    records = []
    n_rec = 0

    def take_record(s):
        nonlocal n_rec
        with_d = diag.distance_every > 0 and n_rec % diag.distance_every == 0
        records.append(_record(s, model, grid, diag, periodic, with_d))
        n_rec += 1

    take_record(state)
    guard = scheme.overflow_guard
    status = "completed"
    k = 0
    for k in range(1, n_steps + 1):
        state = stepper.advance(state, t0 + k * scheme.dt)
        traces[k] = state.psi[nodes_arr]
        top = max(float(np.abs(state.psi).max()), float(np.abs(state.pi).max()))
        if not top <= guard:  # also catches nan
            status = "blown_up"
            traces = traces[: k + 1]
            break
        if monitor is not None:
            monitor.update(state)
        if snapshot is not None and snapshot_every and k % snapshot_every == 0:
            snapshot(state)
        if k % sample_every == 0 or k == n_steps:
            take_record(state)
    else:
        k = n_steps
    flux = monitor.flux if monitor is not None else BoundaryFlux()
    if status == "completed" and monitor is not None and flux.reflection > REFLECTION_LIMIT:
        status = "boundary_contaminated"
    return EvolveResult(
        final=state, records=records, traces=traces, trace_labels=labels, dt=scheme.dt,
        status=status, regime=regime, steps=k, flux=flux,
    )


def evolve_free(state0: FieldState, m: float, grid: GridSpec, scheme: SchemeParams, T: float,
                sample_every: int = 100, diagnostics: DiagConfig | None = None,
                probes: Sequence[float] = ()) -> EvolveResult:
    """Same scheme with every coupling term removed."""
    diag = diagnostics or DiagConfig(distance_every=0)
    return evolve(state0, ModelSpec(mass=m), grid, scheme, T, sample_every, diag, probes)
