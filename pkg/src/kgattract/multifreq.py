"""Explicit two-frequency (omega, 3 omega) solutions for two point oscillators at x = 0 and x = L.

Both constructions rest on sin^3 t = (3/4) sin t - (1/4) sin 3t: a cubic force on a
pure sin(omega t) oscillation feeds exactly the 3 omega line and nothing else.

* ``build_linear_degenerate``: F_1 = alpha psi + beta |psi|^2 psi at 0, linear
  F_2 = gamma psi at L, 0 < omega < m/3 so both lines are localized.
* ``build_wide_gap``: F_1 = F_2 = alpha psi + beta |psi|^2 psi with
  k(3 omega) = pi / L, so the 3 omega line is a standing wave trapped in [0, L].

Objects are returned only after their defining algebraic residuals are certified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import FieldState, GridSpec, ModelSpec, OscillatorSpec, force

CERT_TOL = 1e-10


class ConstructionError(ValueError):
    """A multifrequency parameter set could not be built or certified."""


def kappa_real(omega: float, m: float) -> float:
    if abs(omega) >= m:
        raise ConstructionError(f"kappa({omega}) is not positive for m={m}")
    return math.sqrt((m - omega) * (m + omega))


def k_real(omega: float, m: float) -> float:
    """k(omega) = sqrt(omega^2 - m^2) on the real branch |omega| > m."""
    if abs(omega) <= m:
        raise ConstructionError(f"k({omega}) is not real for m={m}")
    return math.sqrt((omega - m) * (omega + m))


def cubic_coeffs(alpha: float, beta: float) -> tuple[float, float, float]:
    """Potential coefficients of F(psi) = alpha psi + beta |psi|^2 psi."""
    return (0.0, -alpha / 2.0, -beta / 4.0)


def wide_gap_threshold(m: float) -> float:
    """Smallest gap L admitting the trapped 3 omega line: pi / (2^{3/2} m)."""
    return math.pi / (2.0 ** 1.5 * m)


# ---------------------------------------------------------------- linear degeneration


@dataclass(frozen=True)
class LinearDegenerateParams:
    m: float
    omega: float
    L: float
    alpha: float
    beta: float
    gamma: float
    A: float
    B: float
    C: float

    kind = "lindeg"

    @property
    def kappa1(self) -> float:
        return kappa_real(self.omega, self.m)

    @property
    def kappa3(self) -> float:
        return kappa_real(3 * self.omega, self.m)

    def algebraic_residuals(self) -> dict[str, float]:
        """Residuals of the four collected-coefficient equations (sin wt / sin 3wt at x = 0, L)."""
        k1, k3 = self.kappa1, self.kappa3
        A, B, C, L = self.A, self.B, self.C, self.L
        S = A + B
        e = math.exp(k1 * L)
        return {
            "origin_omega": 2 * k1 * A - (self.alpha * S + 0.75 * self.beta * S**3),
            "origin_3omega": -k3 * C + 0.25 * self.beta * S**3,
            "gap_omega": 2 * B * k1 * e - self.gamma * (A / e + B * e),
            # the x >= L branch continues C sinh(k3 L) e^{-k3 (x - L)} so psi stays continuous
            "gap_3omega": k3 * C * math.sinh(k3 * L) + k3 * C * math.cosh(k3 * L)
            - self.gamma * C * math.sinh(k3 * L),
        }

    def model(self) -> ModelSpec:
        return ModelSpec(self.m, (
            OscillatorSpec(0.0, cubic_coeffs(self.alpha, self.beta)),
            OscillatorSpec(self.L, (0.0, -self.gamma / 2.0)),
        ))

    def scale(self) -> float:
        return max(abs(self.A), abs(self.B), abs(self.C), 1.0) ** 3


def _lindeg_gamma(k3: float, L: float) -> float:
    # k3 C sinh + k3 C cosh = gamma C sinh  =>  gamma = k3 (1 + coth(k3 L))
    return k3 * 2.0 / (1.0 - math.exp(-2.0 * k3 * L))


def build_linear_degenerate(m: float, omega: float, L: float, beta: float,
                            alpha: float | None = 0.0, A: float | None = None,
                            max_iter: int = 60) -> LinearDegenerateParams:
    """Two-frequency solution with a linear second oscillator.

    gamma follows from the 3 omega balance at x = L; (A, B) then solve the
    omega balances at x = 0 and x = L by Newton for the supplied ``alpha``.
    Passing ``A`` instead (with ``alpha=None``) solves for alpha.
    """
    if not (0 < omega and 3 * omega < m):
        raise ConstructionError(f"need 0 < omega < m/3 (got omega={omega}, m={m}); kappa(3 omega) must be real")
    if not L > 0:
        raise ConstructionError("L must be positive")
    if beta == 0:
        raise ConstructionError("beta must be nonzero")
    k1, k3 = kappa_real(omega, m), kappa_real(3 * omega, m)
    gamma = _lindeg_gamma(k3, L)
    e = math.exp(k1 * L)

    if alpha is None:
        if A is None:
            raise ConstructionError("supply alpha or A")
        # gap_omega is linear in B
        den = (2 * k1 - gamma) * e
        if den == 0:
            raise ConstructionError("2 kappa(omega) = gamma: the omega balance at L has no solution")
        B = gamma * A / e / den
        S = A + B
        if S == 0:
            raise ConstructionError("A + B = 0: no cubic coupling, alpha undetermined")
        alpha = (2 * k1 * A - 0.75 * beta * S**3) / S
    else:
        def resid(v):
            a, b = v
            s = a + b
            return np.array([2 * k1 * a - alpha * s - 0.75 * beta * s**3,
                             2 * b * k1 * e - gamma * (a / e + b * e)])

        def jac(v):
            s = v[0] + v[1]
            d = -alpha - 2.25 * beta * s * s
            return np.array([[2 * k1 + d, d], [-gamma / e, 2 * k1 * e - gamma * e]])

        v = np.array([math.sqrt(abs(4 * (2 * k1 - alpha) / (3 * beta))) or 1.0, 0.0])
        trace = []
        for _ in range(max_iter):
            r = resid(v)
            nr = float(np.abs(r).max())
            trace.append(nr)
            if nr <= 1e-14 * max(1.0, float(np.abs(v).max())) ** 3:
                break
            try:
                step = np.linalg.solve(jac(v), -r)
            except np.linalg.LinAlgError as exc:
                raise ConstructionError(f"singular Newton system; residual trace {trace}") from exc
            lam = 1.0
            while lam > 1e-8 and float(np.abs(resid(v + lam * step)).max()) >= nr:
                lam *= 0.5
            v = v + lam * step
        else:
            raise ConstructionError(f"Newton did not converge; residual trace {trace}")
        A, B = float(v[0]), float(v[1])
        if abs(A + B) <= 1e-12 * max(1.0, abs(A)):
            raise ConstructionError(f"Newton converged to the single-frequency branch A + B = 0; trace {trace}")
        if A + B < 0:
            A, B = -A, -B

    C = cubic_amplitude(beta, A, B, k3)
    params = LinearDegenerateParams(m, omega, L, float(alpha), beta, gamma, float(A), float(B), C)
    _certify(params)
    return params


def cubic_amplitude(beta: float, A: float, B: float, kappa3: float) -> float:
    """C from the 3 omega balance at the origin; zero exactly when A + B = 0."""
    return 0.25 * beta * (A + B) ** 3 / kappa3


# ---------------------------------------------------------------- wide gaps


@dataclass(frozen=True)
class WideGapParams:
    m: float
    L: float
    omega: float
    alpha: float
    beta: float
    A: float
    B: float

    kind = "widegap"

    @property
    def kappa1(self) -> float:
        return kappa_real(self.omega, self.m)

    @property
    def k3(self) -> float:
        return k_real(3 * self.omega, self.m)

    def algebraic_residuals(self) -> dict[str, float]:
        k1, k3 = self.kappa1, self.k3
        q1 = 1.0 + math.exp(-k1 * self.L)
        a2 = abs(self.A) ** 2
        return {
            "omega": 2 * self.A * k1 - (self.alpha * self.A * q1 + 0.75 * self.beta * a2 * self.A * q1**3),
            "3omega": self.B * k3 - 0.25 * self.beta * a2 * self.A * q1**3,
            "standing_wave": k3 * self.L - math.pi,
        }

    def model(self) -> ModelSpec:
        c = cubic_coeffs(self.alpha, self.beta)
        return ModelSpec(self.m, (OscillatorSpec(0.0, c), OscillatorSpec(self.L, c)))

    def scale(self) -> float:
        return max(abs(self.A), abs(self.B), 1.0) ** 3


def build_wide_gap(m: float, L: float, alpha: float, beta: float) -> WideGapParams:
    """Two-frequency solution with a 3 omega standing wave trapped between the oscillators."""
    thr = wide_gap_threshold(m)
    if not L > thr:
        raise ConstructionError(
            f"wide-gap construction needs L > pi/(2^(3/2) m) = {thr:.6f} (got L={L}); "
            "otherwise 3 omega > 3 m and kappa(omega) is not real"
        )
    omega = math.sqrt(math.pi**2 / L**2 + m * m) / 3.0
    k1 = kappa_real(omega, m)
    q1 = 1.0 + math.exp(-k1 * L)
    feas = (2 * k1 / q1 - alpha) * beta
    if not feas > 0:
        raise ConstructionError(
            f"no nonzero amplitude: need (2 kappa(omega)/(1 + exp(-kappa(omega) L)) - alpha) beta > 0, got {feas:.6g}"
        )
    a2 = (2 * k1 - alpha * q1) * 4.0 / (3.0 * beta * q1**3)
    A = math.sqrt(a2)
    k3 = math.pi / L
    B = beta * a2 * A * q1**3 / (4.0 * k3)
    params = WideGapParams(m, L, omega, alpha, beta, A, B)
    _certify(params)
    return params


# ---------------------------------------------------------------- evaluation


def _lindeg_parts(p: LinearDegenerateParams, x: np.ndarray, deriv: bool):
    k1, k3, L = p.kappa1, p.kappa3, p.L
    S = p.A + p.B
    sh3 = math.sinh(k3 * L)
    left, mid, right = x <= 0, (x > 0) & (x < L), x >= L
    xl, xm, xr = x[left], x[mid], x[right]
    u1 = np.empty_like(x)
    u3 = np.empty_like(x)
    u3[left] = 0.0
    if not deriv:
        u1[left] = S * np.exp(k1 * xl)
        u1[mid] = p.A * np.exp(-k1 * xm) + p.B * np.exp(k1 * xm)
        u3[mid] = p.C * np.sinh(k3 * xm)
        u1[right] = p.A * np.exp(-k1 * xr) + p.B * np.exp(k1 * (2 * L - xr))
        u3[right] = p.C * sh3 * np.exp(-k3 * (xr - L))
    else:
        u1[left] = k1 * S * np.exp(k1 * xl)
        u1[mid] = -k1 * p.A * np.exp(-k1 * xm) + k1 * p.B * np.exp(k1 * xm)
        u3[mid] = k3 * p.C * np.cosh(k3 * xm)
        u1[right] = -k1 * (p.A * np.exp(-k1 * xr) + p.B * np.exp(k1 * (2 * L - xr)))
        u3[right] = -k3 * p.C * sh3 * np.exp(-k3 * (xr - L))
    return u1, u3


def _widegap_parts(p: WideGapParams, x: np.ndarray, deriv: bool):
    k1, k3, L = p.kappa1, p.k3, p.L
    inside = (x >= 0) & (x <= L)
    if not deriv:
        u1 = p.A * (np.exp(-k1 * np.abs(x)) + np.exp(-k1 * np.abs(x - L)))
        u3 = np.where(inside, p.B * np.sin(k3 * x), 0.0)
    else:
        u1 = -k1 * p.A * (np.sign(x) * np.exp(-k1 * np.abs(x)) + np.sign(x - L) * np.exp(-k1 * np.abs(x - L)))
        u3 = np.where(inside, p.B * k3 * np.cos(k3 * x), 0.0)
    return u1, u3


def spatial_parts(params, x, deriv: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Profiles u1, u3 with psi(x, t) = u1(x) sin(omega t) + u3(x) sin(3 omega t)."""
    x = np.asarray(x, dtype=float)
    if isinstance(params, LinearDegenerateParams):
        return _lindeg_parts(params, x, deriv)
    return _widegap_parts(params, x, deriv)


def eval_multifreq(params, x, t, deriv: bool = False):
    """psi(x, t) of the exact solution (or d/dx psi with ``deriv``); real-valued.

    Broadcast shape is ``shape(t) + shape(x)``.
    """
    u1, u3 = spatial_parts(params, x, deriv)
    w = params.omega
    return np.multiply.outer(np.sin(w * np.asarray(t)), u1) + np.multiply.outer(np.sin(3 * w * np.asarray(t)), u3)


def eval_multifreq_dt(params, x, t):
    """d/dt psi(x, t)."""
    u1, u3 = spatial_parts(params, x)
    w = params.omega
    t = np.asarray(t)
    return np.multiply.outer(w * np.cos(w * t), u1) + np.multiply.outer(3 * w * np.cos(3 * w * t), u3)


def initial_state(params, grid: GridSpec, t0: float = 0.0) -> FieldState:
    psi = eval_multifreq(params, grid.x, t0)
    pi = eval_multifreq_dt(params, grid.x, t0)
    return FieldState(psi.astype(complex), pi.astype(complex), t0)


def residual_report(params, n_times: int = 64) -> list[float]:
    """Max |jump mismatch| over one period 2 pi/omega at each oscillator, from the exact formulas."""
    w = params.omega
    if w == 0:
        return [0.0, 0.0]
    t = np.arange(n_times) * (2 * math.pi / w / n_times)
    out = []
    for o in params.model().oscillators:
        X = o.position
        # branch selection is strict at the nodes; step an ulp-scale distance to each side
        eps = 1e-13 * max(1.0, abs(X))
        dl = eval_multifreq(params, np.array([X - eps]), t, deriv=True)[:, 0]
        dr = eval_multifreq(params, np.array([X + eps]), t, deriv=True)[:, 0]
        val = eval_multifreq(params, np.array([X]), t)[:, 0]
        out.append(float(np.max(np.abs(-dr + dl - force(o.coeffs, val).real))))
    return out


def _certify(params) -> None:
    res = params.algebraic_residuals()
    tol = CERT_TOL * params.scale()
    bad = {k: v for k, v in res.items() if not abs(v) <= tol}
    if bad:
        raise ConstructionError(f"certification failed: residuals {bad} exceed {tol:.3g}")
    jumps = residual_report(params)
    if max(jumps) > tol:
        raise ConstructionError(f"certification failed: jump residuals {jumps} exceed {tol:.3g}")


def aligned_grid(params, half_width: float, dx: float) -> GridSpec:
    """Grid with spacing close to ``dx`` that puts x = L on a node."""
    n = max(1, round(params.L / dx))
    dx_al = params.L / n
    return GridSpec(round(half_width / dx_al) * dx_al, dx_al)
