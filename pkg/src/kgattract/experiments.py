"""Desk-scale experiments shared by the acceptance suite and the scripts.

Each function runs one evolution (or a small family of them) and returns the raw
numbers; judging them against thresholds is left to the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .diagnostics.norms import seminorm_E_R
from .diagnostics.report import AttractionSummary, attraction_report, stable_lines
from .diagnostics.spectrum import SpectrumReport, time_spectrum
from .initial import GaussianSpec, gaussian_state
from .integrator import DiagConfig, SchemeParams, evolve, evolve_free
from .model import FieldState, GridSpec, ModelSpec, OscillatorSpec
from .multifreq import aligned_grid, eval_multifreq, initial_state
from .solitary import manifold_distance, sample_solitary, solitary_waves

QUINTIC = (0.0, -1.0, 0.25)
NO_DIAG = DiagConfig(radii=(), distance_every=0, conserved=False)


def single_oscillator(m: float = 1.0, coeffs=QUINTIC) -> ModelSpec:
    return ModelSpec(m, (OscillatorSpec(0.0, tuple(coeffs)),))


# ---------------------------------------------------------------- solitary persistence


@dataclass
class PersistenceResult:
    dx: float
    distance: float
    best_omega: float
    energy_drift: float
    charge_drift: float


def solitary_persistence(dx: float, T: float = 50.0, omega: float = 0.8, half_width: float = 40.0,
                         cfl: float = 0.5) -> PersistenceResult:
    """Seed the exact solitary wave, evolve with transparent edges, measure the final distance to S."""
    model = single_oscillator()
    grid = GridSpec(half_width, dx)
    (wave,) = solitary_waves(QUINTIC, omega, model.mass)
    s0 = sample_solitary(wave, grid)
    diag = DiagConfig(radii=(), distance_every=0)
    res = evolve(s0, model, grid, SchemeParams.from_cfl(grid, cfl), T, sample_every=10**9, diagnostics=diag)
    rep = manifold_distance(res.final, model, grid)
    e = [r.energy for r in res.records]
    q = [r.charge for r in res.records]
    return PersistenceResult(dx, rep.distance, rep.best_omega,
                             abs(e[-1] - e[0]) / abs(e[0]), abs(q[-1] - q[0]) / abs(q[0]))


# ---------------------------------------------------------------- generic attraction


@dataclass
class AttractionResult:
    seed: int
    summary: AttractionSummary
    distances: list[tuple[float, float]]
    spectra: list[SpectrumReport]
    status: str

    @property
    def dominance(self) -> list[float]:
        return [s.dominance for s in self.spectra]

    @property
    def dominant_omega(self) -> list[float]:
        return [abs(s.dominant.frequency) if s.dominant else math.nan for s in self.spectra]

    @property
    def bin_width(self) -> float:
        return max(s.bin_width for s in self.spectra)


def gaussian_attraction(seed: int = 0, T: float = 200.0, dx: float = 0.01, half_width: float = 40.0,
                        sample_every: int = 400, distance_every: int = 5) -> AttractionResult:
    model = single_oscillator()
    grid = GridSpec(half_width, dx)
    s0 = gaussian_state(GaussianSpec.from_seed(seed), grid, model.mass)
    diag = DiagConfig(radii=(1.0, 2.0, 5.0, 10.0), distance_every=distance_every)
    res = evolve(s0, model, grid, SchemeParams.from_cfl(grid), T, sample_every, diag)
    summary = attraction_report(res.records, res.trace_dict(), res.dt, model.mass)
    dist = [(r.time, r.ef_metric_to_S) for r in res.records if r.ef_metric_to_S is not None]
    return AttractionResult(seed, summary, dist, summary.spectra["osc0"], res.status)


# ---------------------------------------------------------------- multifrequency data


@dataclass
class MultifreqResult:
    kind: str
    dx: float
    omega: float
    pointwise_error: float
    error_times: list[tuple[float, float]]
    probe_x: float
    window_lines: list[list[tuple[float, float]]]
    window_dominance: list[float]
    distances: list[tuple[float, float]]
    status: str
    notes: list[str] = field(default_factory=list)

    def lines_at(self, targets: tuple[float, ...], min_mass: float = 1e-2) -> list[bool]:
        """Per window: does every target frequency carry a line with >= ``min_mass``?"""
        out = []
        for lines, bw in zip(self.window_lines, self._bin_widths):
            out.append(all(any(abs(f - w) <= bw and mass >= min_mass for f, mass in lines) for w in targets))
        return out

    _bin_widths: list[float] = field(default_factory=list, repr=False)


def line_share(params, x: float, T: float = 60.0, dt: float = 0.005) -> tuple[float, float]:
    """Spectral mass of the omega and 3 omega lines of the exact solution at ``x``."""
    t = np.arange(int(round(T / dt)) + 1) * dt
    sp = time_spectrum(eval_multifreq(params, np.array([x]), t)[:, 0], dt, (0.0, T), params.m)
    out = []
    for w in (params.omega, 3 * params.omega):
        out.append(sum(mass for f, mass in sp.lines(min_mass=0.0) if abs(f - w) <= sp.bin_width))
    return out[0], out[1]


def line_probe(params) -> float:
    """Among the two oscillator sites and their midpoint, where the exact solution shows both lines best.

    The 3 omega standing wave of the wide-gap data vanishes at both oscillators, so
    a trace taken there cannot show it.
    """
    candidates = (0.0, params.L / 2, params.L)
    return max(candidates, key=lambda x: min(line_share(params, x)))


def multifreq_run(params, dx: float = 0.01, half_width: float = 40.0, T: float = 120.0,
                  t_compare: float = 20.0, compare_every: float = 0.5, n_windows: int = 3,
                  distance_times: tuple[float, ...] = (0.0, 20.0, 40.0, 60.0, 80.0, 100.0, 120.0),
                  cfl: float = 0.5, probe_x: float | None = None) -> MultifreqResult:
    """Evolve the exact two-frequency data on its own model and compare with the closed form.

    The pointwise error is the max over |x| <= L and t <= ``t_compare``. The spectrum is
    taken at ``probe_x`` (default: see ``line_probe``) and split into ``n_windows``
    windows covering the whole run (``n_windows=0`` skips the spectra).
    """
    grid = aligned_grid(params, half_width, dx)
    model = params.model()
    scheme = SchemeParams.from_cfl(grid, cfl)
    s0 = initial_state(params, grid)
    target = line_probe(params) if probe_x is None else probe_x
    probe = float(grid.x[np.argmin(np.abs(grid.x - target))])
    every = max(1, int(round(compare_every / scheme.dt)))
    dist_steps = {int(round(t / scheme.dt)) for t in distance_times}
    region = np.abs(grid.x) <= params.L + 1e-12
    errors: list[tuple[float, float]] = []
    snaps: dict[int, FieldState] = {}

    def watch(state: FieldState):
        k = int(round(state.time / scheme.dt))
        if state.time <= t_compare + 1e-9 and k % every == 0:
            exact = eval_multifreq(params, grid.x[region], state.time)
            errors.append((state.time, float(np.abs(state.psi[region] - exact).max())))
        if k in dist_steps:
            snaps[k] = state

    res = evolve(s0, model, grid, scheme, T, sample_every=10**9, diagnostics=NO_DIAG,
                 probes=(probe,), snapshot=watch, snapshot_every=1)
    if 0 in dist_steps:
        snaps[0] = s0
    distances = []
    for k in sorted(snaps):
        rep = manifold_distance(snaps[k], model, grid)
        distances.append((k * scheme.dt, rep.distance))

    trace = res.traces[:, -1]
    edges = np.linspace(0.0, res.steps * res.dt, n_windows + 1)
    lines, dom, bws = [], [], []
    for a, b in zip(edges[:-1], edges[1:]) if n_windows > 0 else ():
        sp = time_spectrum(trace, res.dt, (a, b), model.mass)
        lines.append(sp.lines(min_mass=0.0))
        dom.append(sp.dominance)
        bws.append(sp.bin_width)
    out = MultifreqResult(params.kind, grid.dx, params.omega, max(e for _, e in errors), errors,
                          probe, lines, dom, distances, res.status)
    out._bin_widths = bws
    return out


# ---------------------------------------------------------------- conservation


@dataclass
class ConservationResult:
    bc: str
    steps: int
    regime: str
    energy_rel: float  # max |E - E0| / E0
    energy_offset: float  # |E(first record) - E0| / E0
    energy_secular: float  # max |E - E(first record)| / E0 over the rest of the run
    charge_rel: float


def conservation_run(bc: str, seed: int = 0, steps: int = 10_000, dx: float = 0.01, half_width: float = 40.0,
                     cfl: float = 0.5) -> ConservationResult:
    model = single_oscillator()
    grid = GridSpec(half_width, dx)
    s0 = gaussian_state(GaussianSpec.from_seed(seed), grid, model.mass)
    scheme = SchemeParams.from_cfl(grid, cfl, bc=bc)
    diag = DiagConfig(radii=(), distance_every=0)
    res = evolve(s0, model, grid, scheme, steps * scheme.dt, sample_every=100, diagnostics=diag)
    e = np.array([r.energy for r in res.records])
    q = np.array([r.charge for r in res.records])
    e0, q0 = e[0], q[0]
    return ConservationResult(
        bc, res.steps, res.regime,
        float(np.abs(e - e0).max() / abs(e0)),
        float(abs(e[1] - e0) / abs(e0)),
        float(np.abs(e[1:] - e[1]).max() / abs(e0)),
        float(np.abs(q - q0).max() / abs(q0)),
    )


# ---------------------------------------------------------------- local energy decay


def _free_gaussian(grid: GridSpec, width: float) -> FieldState:
    psi = np.exp(-((grid.x / width) ** 2)).astype(complex)
    return FieldState(psi, np.zeros_like(psi))


def free_decay_ratio(dx: float, width: float = 1.0, T: float = 100.0, R: float = 5.0, m: float = 1.0,
                     half_width: float | None = None, cfl: float = 0.5) -> float:
    """seminorm_R(T) / seminorm_R(0) for the free field from a Gaussian at rest.

    The default domain is wide enough that nothing returns from the edges within T.
    """
    hw = half_width if half_width is not None else math.ceil(T / 2 + R + 5 * width + 5)
    grid = GridSpec(hw, dx)
    s0 = _free_gaussian(grid, width)
    res = evolve_free(s0, m, grid, SchemeParams.from_cfl(grid, cfl, bc="dirichlet"), T,
                      sample_every=10**9, diagnostics=NO_DIAG)
    return seminorm_E_R(res.final, grid, R, m) / seminorm_E_R(s0, grid, R, m)


def free_decay_ratio_spectral(width: float = 1.0, T: float = 100.0, R: float = 5.0, m: float = 1.0,
                              half_width: float = 400.0, n: int = 2**17) -> float:
    """Continuum reference: exact Fourier solution on a large periodic box, seminorm by quadrature."""
    L = 2 * half_width
    x = (np.arange(n) - n // 2) * (L / n)
    k = 2 * np.pi * np.fft.fftfreq(n, L / n)
    w = np.sqrt(k * k + m * m)
    f0 = np.fft.fft(np.exp(-((x / width) ** 2)))
    psi = np.fft.ifft(f0 * np.cos(w * T))
    pi = np.fft.ifft(-f0 * w * np.sin(w * T))
    dpsi = np.fft.ifft(1j * k * f0 * np.cos(w * T))
    dpsi0 = np.fft.ifft(1j * k * f0)
    psi0 = np.fft.ifft(f0)
    sel = np.abs(x) <= R
    h = L / n

    def sn(p, q, d):
        dens = np.abs(p) ** 2 + np.abs(d) ** 2 + m * m * np.abs(q) ** 2
        return math.sqrt(h * float(dens[sel].sum()))

    return sn(pi, psi, dpsi) / sn(np.zeros_like(psi0), psi0, dpsi0)


__all__ = [
    "PersistenceResult", "solitary_persistence", "AttractionResult", "gaussian_attraction",
    "MultifreqResult", "line_share", "line_probe", "multifreq_run", "ConservationResult", "conservation_run",
    "free_decay_ratio", "free_decay_ratio_spectral", "stable_lines",
]
