"""Solitary waves phi_omega(x) e^{-i omega t} for the three couplings, and distance to their manifold.

Single oscillator: phi = C exp(-kappa |x - X|) with 2 kappa = F(C)/C.
Several oscillators: piecewise combinations of exp(+-kappa x) glued by the jump
conditions, solved by Newton on the nodal values.
Mean field: phi = F(s) G with (-D2 + kappa^2) G = rho and s = <rho, phi>.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.linalg import solve_banded

from .diagnostics.norms import energy_density, link_gradient, metric_E_F, metric_weights, pairing, window_integrals
from .model import FieldState, GridSpec, MeanFieldSpec, ModelSpec, force_gain

NO_WAVES_MSG = "no nonzero solitary waves for |omega| >= m"


def kappa(omega: float, m: float) -> float:
    """Decay rate sqrt(m^2 - omega^2) of a solitary profile."""
    if abs(omega) > m:
        raise ValueError(f"|omega|={abs(omega)} > m={m}: {NO_WAVES_MSG}")
    return math.sqrt((m - omega) * (m + omega))


def _gain_poly(coeffs: Sequence[float]) -> np.ndarray:
    """Coefficients (ascending in s) of g(s) = F(C)/C at s = C^2."""
    c = np.asarray(coeffs, dtype=float)
    return np.array([-2.0 * l * c[l] for l in range(1, c.size)]) if c.size > 1 else np.zeros(1)


def gain_derivative(coeffs: Sequence[float], s):
    """g'(s) for g = force_gain."""
    d = P.polyder(_gain_poly(coeffs)) if len(coeffs) > 2 else np.zeros(1)
    return P.polyval(s, d)


def amplitude_roots(coeffs: Sequence[float], omega: float, m: float) -> list[float]:
    """All C > 0 with 2 kappa(omega) = F(C)/C, sorted ascending."""
    if abs(omega) >= m:
        raise ValueError(f"|omega|={abs(omega)} >= m={m}: {NO_WAVES_MSG}")
    k2 = 2.0 * kappa(omega, m)
    poly = _gain_poly(coeffs).copy()
    poly[0] -= k2
    nz = np.flatnonzero(poly)
    if nz.size == 0 or nz[-1] == 0:
        return []  # constant in s: no isolated roots
    poly = poly[: nz[-1] + 1]
    dpoly = P.polyder(poly)
    found = []
    for r in P.polyroots(poly):
        if abs(r.imag) > 1e-7 * (1.0 + abs(r)) or r.real <= 0:
            continue
        s = r.real
        for _ in range(3):
            d = P.polyval(s, dpoly)
            if d == 0:
                break
            s_new = s - P.polyval(s, poly) / d
            if not (s_new > 0):
                break
            s = s_new
        found.append(math.sqrt(s))
    found.sort()
    out: list[float] = []
    for C in found:
        if not out or abs(C - out[-1]) > 1e-12 * (1.0 + C):
            out.append(C)
    return out


@dataclass(frozen=True)
class SolitaryWave:
    omega: float
    amplitude: float
    kappa: float
    m: float
    center: float = 0.0
    model_tag: str = "single"

    def __post_init__(self):
        if not self.amplitude > 0:
            raise ValueError("amplitude must be positive")
        if abs(self.kappa**2 + self.omega**2 - self.m**2) > 1e-12 * max(1.0, self.m**2):
            raise ValueError("kappa^2 + omega^2 must equal m^2")

    @classmethod
    def from_root(cls, omega: float, C: float, m: float, center: float = 0.0) -> "SolitaryWave":
        return cls(float(omega), float(C), kappa(omega, m), float(m), float(center))

    def profile(self, x) -> np.ndarray:
        return self.amplitude * np.exp(-self.kappa * np.abs(np.asarray(x, dtype=float) - self.center))

    def jump_residual(self, coeffs: Sequence[float]) -> float:
        """phi'(X+) - phi'(X-) + F(phi(X)) for the exact profile."""
        C = self.amplitude
        return float(-2.0 * self.kappa * C + force_gain(coeffs, C * C) * C)


def sample_solitary(wave: SolitaryWave, grid: GridSpec, phase: float = 0.0) -> FieldState:
    psi = wave.profile(grid.x) * np.exp(1j * phase)
    return FieldState(psi, -1j * wave.omega * psi, 0.0)


def solitary_waves(coeffs: Sequence[float], omega: float, m: float, center: float = 0.0) -> list[SolitaryWave]:
    return [SolitaryWave.from_root(omega, C, m, center) for C in amplitude_roots(coeffs, omega, m)]


# ---------------------------------------------------------------- several oscillators


def _coth_csch(z: float) -> tuple[float, float]:
    q = math.exp(-2.0 * z)
    return (1.0 + q) / (1.0 - q), 2.0 * math.exp(-z) / (1.0 - q)


def jump_matrix(positions: Sequence[float], kap: float) -> np.ndarray:
    """Matrix M with (M phi)_J = phi'(X_J+) - phi'(X_J-) for the decaying piecewise-exponential profile."""
    n = len(positions)
    M = np.zeros((n, n))
    M[0, 0] -= kap
    M[-1, -1] -= kap
    for j in range(n - 1):
        coth, csch = _coth_csch(kap * (positions[j + 1] - positions[j]))
        M[j, j] -= kap * coth
        M[j, j + 1] += kap * csch
        M[j + 1, j + 1] -= kap * coth
        M[j + 1, j] += kap * csch
    return M


@dataclass
class MultiProfile:
    """Real profile determined by its values at the oscillator positions."""

    omega: float
    kappa: float
    positions: tuple[float, ...]
    nodal: np.ndarray
    residual: float

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        X, v, k = self.positions, self.nodal, self.kappa
        out = np.empty_like(x)
        left = x <= X[0]
        right = x >= X[-1]
        out[left] = v[0] * np.exp(-k * (X[0] - x[left]))
        out[right] = v[-1] * np.exp(-k * (x[right] - X[-1]))
        for j in range(len(X) - 1):
            sel = (x >= X[j]) & (x < X[j + 1])
            h = X[j + 1] - X[j]
            a, b = x[sel] - X[j], X[j + 1] - x[sel]
            # sinh ratios written with decaying exponentials only
            q = math.exp(-2 * k * h)
            wa = np.exp(-k * (h - a)) * (1 - np.exp(-2 * k * a)) / (1 - q)
            wb = np.exp(-k * (h - b)) * (1 - np.exp(-2 * k * b)) / (1 - q)
            out[sel] = v[j] * wb + v[j + 1] * wa
        return out

    def sample(self, grid: GridSpec, phase: float = 0.0) -> FieldState:
        psi = self.evaluate(grid.x) * np.exp(1j * phase)
        return FieldState(psi, -1j * self.omega * psi, 0.0)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.nodal)


@dataclass
class MultiProfileSet:
    profiles: list[MultiProfile]
    converged: bool
    seeds_tried: int
    failures: int


def _horner(c: list[float], s: float) -> float:
    acc = 0.0
    for a in c:
        acc = acc * s + a
    return acc


def _newton_nodal(M: np.ndarray, coeff_list, seed: np.ndarray, tol: float = 1e-13,
                  max_iter: int = 80) -> tuple[np.ndarray, float, bool]:
    # g(s) = -sum_l 2 l u_l s^(l-1) and g'(s), highest power first, as plain floats
    gs, dgs = [], []
    for c in coeff_list:
        g = [-2.0 * l * c[l] for l in range(len(c) - 1, 0, -1)]
        gs.append(g or [0.0])
        dgs.append([a * k for a, k in zip(g[:-1], range(len(g) - 1, 0, -1))] or [0.0])

    def resid(v):
        return M @ v + np.array([_horner(g, vj * vj) * vj for g, vj in zip(gs, v.tolist())])

    v = seed.astype(float).copy()
    r = resid(v)
    nr = float(np.linalg.norm(r))
    for _ in range(max_iter):
        scale = 1.0 + float(np.abs(v).max())
        if nr <= tol * scale**3:
            return v, nr, True
        Jd = np.array([_horner(g, vj * vj) + 2 * vj * vj * _horner(dg, vj * vj)
                       for g, dg, vj in zip(gs, dgs, v.tolist())])
        try:
            step = np.linalg.solve(M + np.diag(Jd), -r)
        except np.linalg.LinAlgError:
            return v, nr, False
        lam = 1.0
        while lam > 1e-6:
            v_new = v + lam * step
            r_new = resid(v_new)
            n_new = float(np.linalg.norm(r_new))
            if n_new < nr or n_new <= tol * (1 + float(np.abs(v_new).max())) ** 3:
                break
            lam *= 0.5
        else:
            return v, nr, False
        v, r, nr = v_new, r_new, n_new
    return v, nr, nr <= 1e-8


def solitary_profiles_multi(model: ModelSpec, omega: float, max_seeds: int = 4096) -> MultiProfileSet:
    """Solitary profiles for point oscillators at frequency ``omega`` (any N >= 1).

    Seeds are the single-oscillator amplitudes (and 0) at each node with all sign
    patterns. Only real nodal values are searched: a stationary profile carries
    zero current, so its phase is constant in x up to the global U(1) factor.
    """
    m = model.mass
    if abs(omega) >= m:
        raise ValueError(f"|omega|={abs(omega)} >= m={m}: {NO_WAVES_MSG}")
    osc = model.oscillators
    if not osc:
        raise ValueError("model has no oscillators")
    kap = kappa(omega, m)
    X = tuple(o.position for o in osc)
    coeffs = [o.coeffs for o in osc]
    M = jump_matrix(X, kap)
    per_node = []
    for c in coeffs:
        roots = amplitude_roots(c, omega, m)
        per_node.append([0.0] + [s * r for r in roots for s in (1.0, -1.0)])
    seeds = itertools.islice(itertools.product(*per_node), max_seeds)
    profiles: list[MultiProfile] = []
    tried = failures = 0
    for seed in seeds:
        tried += 1
        v, nr, ok = _newton_nodal(M, coeffs, np.array(seed))
        if not ok or nr > 1e-8:
            failures += 1
            continue
        v = np.where(np.abs(v) < 1e-14, 0.0, v)
        nzi = np.flatnonzero(np.abs(v) > 1e-9)
        if nzi.size and v[nzi[0]] < 0:
            v = -v
        if any(np.max(np.abs(p.nodal - v)) <= 1e-7 * (1 + np.abs(v).max()) for p in profiles):
            continue
        profiles.append(MultiProfile(omega, kap, X, v, nr))
    profiles.sort(key=lambda p: float(np.abs(p.nodal).sum()))
    return MultiProfileSet(profiles, converged=bool(profiles), seeds_tried=tried, failures=failures)


def multi_jump_residuals(profile: MultiProfile, model: ModelSpec, h: float = 0.0) -> np.ndarray:
    """Jump-condition residuals of ``profile`` evaluated from its closed form.

    With ``h > 0`` the one-sided derivatives come from finite differences of
    ``evaluate`` instead (an independent check of the gluing).
    """
    X = profile.positions
    v = profile.nodal
    if h > 0:
        xs = np.array(X)
        fp = (profile.evaluate(xs + h) - profile.evaluate(xs)) / h
        fm = (profile.evaluate(xs) - profile.evaluate(xs - h)) / h
        jump = fp - fm
    else:
        jump = jump_matrix(X, profile.kappa) @ v
    F = np.array([force_gain(o.coeffs, vj * vj) * vj for o, vj in zip(model.oscillators, v)])
    return jump + F


# ---------------------------------------------------------------- mean field


def _stationary_operator(grid: GridSpec, kap: float) -> np.ndarray:
    n = grid.n_points - 2
    ab = np.empty((3, n))
    inv = 1.0 / grid.dx**2
    ab[0, :] = -inv
    ab[1, :] = 2 * inv + kap * kap
    ab[2, :] = -inv
    return ab


def second_difference(psi: np.ndarray, dx: float) -> np.ndarray:
    """D2 at interior nodes, zero at the two edge nodes."""
    out = np.zeros_like(psi)
    out[1:-1] = (psi[2:] - 2 * psi[1:-1] + psi[:-2]) / dx**2
    return out


@dataclass
class MeanFieldProfile:
    omega: float
    s: float
    phi: np.ndarray
    residual: float

    def sample(self, grid: GridSpec, phase: float = 0.0) -> FieldState:
        psi = self.phi * np.exp(1j * phase)
        return FieldState(psi, -1j * self.omega * psi, 0.0)


@dataclass
class MeanFieldProfiles:
    profiles: list[MeanFieldProfile]
    sigma_grid: float
    degenerate: bool = False
    notes: list[str] = field(default_factory=list)


def meanfield_residual(phi: np.ndarray, spec: MeanFieldSpec, omega: float, m: float, grid: GridSpec) -> float:
    """Grid L2 norm of -omega^2 phi - (D2 phi - m^2 phi + rho F(<rho, phi>)) at interior nodes."""
    s = pairing(phi, spec.rho, grid)
    Fs = force_gain(spec.coeffs, abs(s) ** 2) * s
    r = -omega**2 * phi - (second_difference(phi, grid.dx) - m * m * phi + spec.rho * Fs)
    r = r[1:-1]
    return math.sqrt(grid.dx * float(np.sum(np.abs(r) ** 2)))


def meanfield_solitary(spec: MeanFieldSpec, omega: float, m: float, grid: GridSpec) -> MeanFieldProfiles:
    """Nonzero real stationary profiles of the mean-field model at frequency ``omega``.

    The linear response G solves the grid operator (-D2 + kappa^2) G = rho with zero
    edge values, so the resonance integral used here is the grid one,
    sigma_grid = <rho, G>; it converges to the continuum sigma(omega) as dx -> 0.
    Each nonzero root s of s = sigma_grid F(s) gives phi = F(s) G.
    """
    if abs(omega) >= m:
        raise ValueError(f"|omega|={abs(omega)} >= m={m}: no nonresonant mean-field solitary wave")
    kap = kappa(omega, m)
    G = np.zeros(grid.n_points)
    G[1:-1] = solve_banded((1, 1), _stationary_operator(grid, kap), spec.rho[1:-1])
    sig = float(pairing(G, spec.rho, grid).real)
    gp = _gain_poly(spec.coeffs) * sig
    gp[0] -= 1.0
    out = MeanFieldProfiles([], sig)
    nz = np.flatnonzero(np.abs(gp) > 1e-13 * max(1.0, np.abs(gp).max()))
    if nz.size == 0:
        out.degenerate = True
        out.notes.append("linear coupling with slope 1/sigma: every amplitude solves; one-parameter family")
        return out
    if nz[-1] == 0:
        return out
    gp = gp[: nz[-1] + 1]
    for r in P.polyroots(gp):
        if abs(r.imag) > 1e-9 * (1 + abs(r)) or r.real <= 0:
            continue
        u = r.real
        dgp = P.polyder(gp)
        for _ in range(3):
            d = P.polyval(u, dgp)
            if d == 0:
                break
            u = u - P.polyval(u, gp) / d
        s = math.sqrt(u)
        phi = float(force_gain(spec.coeffs, u)) * s * G
        res = meanfield_residual(phi, spec, omega, m, grid)
        out.profiles.append(MeanFieldProfile(omega, s, phi, res))
    out.profiles.sort(key=lambda p: p.s)
    return out


# ---------------------------------------------------------------- manifold distance


@dataclass
class ManifoldDistanceReport:
    distance: float
    best_omega: float
    best_amplitude: float
    best_phase: float
    candidates_examined: int
    best_state: FieldState | None = None
    search_distance: float = math.nan


def manifold_candidates(model: ModelSpec, grid: GridSpec, omega: float) -> list[np.ndarray]:
    """Real nonzero solitary profiles on the grid at frequency ``omega``."""
    m = model.mass
    if model.mean_field is not None:
        return [p.phi for p in meanfield_solitary(model.mean_field, omega, m, grid).profiles]
    osc = model.oscillators
    if not osc:
        return []
    if len(osc) == 1:
        o = osc[0]
        k = kappa(omega, m)
        return [C * np.exp(-k * np.abs(grid.x - o.position)) for C in amplitude_roots(o.coeffs, omega, m)]
    return [p.evaluate(grid.x) for p in solitary_profiles_multi(model, omega).profiles if not p.is_zero]


class _DistanceProblem:
    """Fast evaluation of the weighted metric to e^{i theta}(phi, -i omega phi).

    For every radius the squared seminorm of the difference is a + b - 2 Re(e^{-i theta} z)
    with a, b the squared seminorms of state and candidate and z their cross term.
    """

    N_SCAN = 64

    def __init__(self, state: FieldState, grid: GridSpec, m: float):
        self.grid, self.m = grid, m
        self.radii, self.w = metric_weights(grid)
        self.psi, self.pi = state.psi, state.pi
        self.dpsi = link_gradient(state.psi, grid.dx)
        node, link = energy_density(state, grid, m)
        self.a = window_integrals(node, grid, self.radii, link)
        self.zero_distance = float(np.dot(self.w, np.sqrt(np.maximum(self.a, 0.0))))
        self.examined = 0

    def objective(self, b, z, theta):
        d2 = self.a + b - 2.0 * (np.exp(-1j * theta) * z).real
        return float(np.dot(self.w, np.sqrt(np.maximum(d2, 0.0))))

    def evaluate(self, phi: np.ndarray, omega: float) -> tuple[float, float]:
        self.examined += 1
        dphi = link_gradient(phi, self.grid.dx)
        m2 = self.m * self.m
        b = window_integrals((omega * omega + m2) * phi**2, self.grid, self.radii, dphi**2)
        z = window_integrals(1j * omega * phi * self.pi + m2 * phi * self.psi, self.grid, self.radii,
                             dphi * self.dpsi)
        thetas = np.arange(self.N_SCAN) * (2 * math.pi / self.N_SCAN)
        vals = [self.objective(b, z, t) for t in thetas]
        k = int(np.argmin(vals))
        h = 2 * math.pi / self.N_SCAN
        theta = golden_section(lambda t: self.objective(b, z, t), thetas[k] - h, thetas[k] + h, 1e-11)
        return self.objective(b, z, theta), theta % (2 * math.pi)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f, a: float, b: float, tol: float) -> float:
    """Minimizer of a unimodal ``f`` on [a, b] to within ``tol``."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def manifold_distance(state: FieldState, model: ModelSpec, grid: GridSpec, n_omega: int = 257,
                      refine_passes: int = 2, refine_factor: int = 8,
                      omega_tol: float = 1e-12) -> ManifoldDistanceReport:
    """Distance from ``state`` to the solitary manifold in the weighted local-energy metric.

    Search: ``n_omega`` uniform frequencies in (-m, m), ``refine_passes`` local
    refinements by ``refine_factor``, then a golden-section polish in omega. Phases
    are optimized per candidate; the zero wave is always a candidate. The reported
    distance is recomputed directly from the best candidate state.
    """
    m = model.mass
    prob = _DistanceProblem(state, grid, m)
    cache: dict[float, list[np.ndarray]] = {}

    def candidates(omega: float) -> list[np.ndarray]:
        if omega not in cache:
            cache[omega] = manifold_candidates(model, grid, omega)
        return cache[omega]

    best = (prob.zero_distance, 0.0, 0, 0.0)  # distance, omega, candidate index (1-based; 0 = zero wave), phase

    def best_at(omega: float):
        out = None
        for i, phi in enumerate(candidates(omega), start=1):
            d, th = prob.evaluate(phi, omega)
            if out is None or d < out[0]:
                out = (d, omega, i, th)
        return out

    def consider(cands):
        nonlocal best
        for c in cands:
            if c is not None and c[0] < best[0]:
                best = c

    h = 2 * m / (n_omega + 1)
    consider(best_at(-m + h * (i + 1)) for i in range(n_omega))
    if best[2]:
        for _ in range(refine_passes):
            center, h = best[1], h / refine_factor
            grid_w = [center + h * k for k in range(-refine_factor, refine_factor + 1)]
            consider(best_at(w) for w in grid_w if abs(w) < m)
        lo, hi = max(best[1] - h, -m + 1e-12), min(best[1] + h, m - 1e-12)

        def f(w):
            c = best_at(w)
            return c[0] if c is not None else prob.zero_distance

        w_star = golden_section(f, lo, hi, omega_tol)
        consider([best_at(w_star)])

    d_search, omega, idx, theta = best
    if not idx:
        cand = FieldState.zeros(grid, state.time)
        dist = metric_E_F(state, cand, grid, m)
        return ManifoldDistanceReport(dist, 0.0, 0.0, 0.0, prob.examined, cand, d_search)

    # The fast objective loses ~sqrt(eps) to cancellation; finish on the direct metric.
    def direct(w: float, th: float) -> tuple[float, np.ndarray | None]:
        cands = candidates(w)
        if len(cands) < idx:
            return math.inf, None
        phi = cands[idx - 1]
        ph = np.exp(1j * th)
        c = FieldState(phi * ph, -1j * w * phi * ph, state.time)
        return metric_E_F(state, c, grid, m), phi

    dth = dom = 1e-5

    def best_phase(w: float) -> tuple[float, float]:
        th = golden_section(lambda t: direct(w, t)[0], theta - dth, theta + dth, 1e-12)
        return direct(w, th)[0], th

    lo, hi = max(omega - dom, -m + 1e-12), min(omega + dom, m - 1e-12)
    w_star = golden_section(lambda w: best_phase(w)[0], lo, hi, omega_tol)
    d_star, th_star = best_phase(w_star)
    if d_star <= direct(omega, theta)[0]:
        omega, theta = w_star, th_star
    dist, phi = direct(omega, theta)
    ph = np.exp(1j * theta)
    cand = FieldState(phi * ph, -1j * omega * phi * ph, state.time)
    return ManifoldDistanceReport(dist, omega, float(np.abs(phi).max()), theta % (2 * math.pi),
                                  prob.examined, cand, d_search)
