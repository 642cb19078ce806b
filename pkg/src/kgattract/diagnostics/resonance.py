"""Resonance integral sigma(omega) and the exceptional set Z_rho for the mean-field model (n = 1)."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from ..model import GridSpec

RhoHat = Callable[[np.ndarray], np.ndarray]


def rho_hat_from_samples(rho: np.ndarray, grid: GridSpec) -> RhoHat:
    """Fourier transform rho_hat(xi) = int rho(x) e^{-i xi x} dx by the trapezoid rule.

    The sampled transform is periodic in xi with period 2 pi / dx, so it is only
    meaningful on the Nyquist band |xi| <= pi / dx; that band is exposed as
    ``rho_hat.band`` and integrals over xi stop there.
    """
    x = grid.x
    wr = grid.trapezoid_weights() * np.asarray(rho, dtype=float)
    keep = np.abs(wr) > 0
    x, wr = x[keep], wr[keep]

    def rho_hat(xi):
        xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.exp(-1j * np.outer(xi_arr, x)) @ wr
        return out if np.ndim(xi) else out[0]

    rho_hat.band = math.pi / grid.dx
    return rho_hat


def _abs2_hat(rho_hat: RhoHat, xi: float) -> float:
    return abs(complex(np.asarray(rho_hat(xi)).reshape(-1)[0])) ** 2


def _integral(f, lo: float, hi: float, epsrel: float) -> float:
    val, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=epsrel, limit=400)
    return val


def sigma(rho_hat: RhoHat, omega: float, m: float, rtol: float = 1e-6,
          hat_tol: float = 1e-8) -> float:
    """(1/2 pi) int |rho_hat(xi)|^2 / (xi^2 + m^2 - omega^2) d xi.

    For |omega| > m the integrand has poles at xi = +-sqrt(omega^2 - m^2); they are
    removable only when rho_hat vanishes there (omega in Z_rho). In that case a
    symmetric neighbourhood of half-width eps is excluded around each pole and the
    eps -> 0 limit is taken by Richardson extrapolation. A ``band`` attribute on
    ``rho_hat`` limits the xi range.
    """
    kap2 = m * m - omega * omega
    band = getattr(rho_hat, "band", math.inf)
    epsrel = min(rtol, 1e-6) * 1e-3

    def f(xi):
        return _abs2_hat(rho_hat, xi) / (xi * xi + kap2)

    if kap2 > 0:
        return (_integral(f, 0.0, band, epsrel) + _integral(f, -band, 0.0, epsrel)) / (2 * math.pi)
    if kap2 == 0:
        raise ValueError("sigma is undefined at omega = +-m")

    xi0 = math.sqrt(-kap2)
    scale = max(_abs2_hat(rho_hat, t) for t in np.linspace(-3 * xi0 - 1, 3 * xi0 + 1, 61))
    scale = max(scale, _abs2_hat(rho_hat, xi0), _abs2_hat(rho_hat, -xi0))
    for p in (xi0, -xi0):
        if math.sqrt(_abs2_hat(rho_hat, p)) > hat_tol * math.sqrt(scale):
            raise ValueError(
                f"rho_hat does not vanish at the resonance xi={p:.6g}; sigma({omega}) is undefined"
            )

    def excluded(eps: float) -> float:
        cuts = [-band, -xi0 - eps, -xi0 + eps, xi0 - eps, xi0 + eps, band]
        return sum(_integral(f, cuts[i], cuts[i + 1], epsrel) for i in (0, 2, 4))

    eps0 = min(0.05, 0.25 * xi0)
    i1, i2, i3 = excluded(eps0), excluded(eps0 / 2), excluded(eps0 / 4)
    # symmetric exclusion: I(eps) = I - c1 eps - c3 eps^3 - ...
    r1 = 2 * i2 - i1
    r2 = 2 * i3 - i2
    return (8 * r2 - r1) / 7 / (2 * math.pi)


def find_Z_rho(rho_hat: RhoHat, m: float, omega_max: float, n_scan: int = 4000,
               xtol: float = 1e-13, hat_tol: float = 1e-8) -> list[float]:
    """Frequencies omega in (m, omega_max] with rho_hat(+-sqrt(omega^2 - m^2)) = 0."""
    if omega_max <= m:
        return []
    xi_max = math.sqrt(omega_max**2 - m * m)
    xi = np.linspace(0.0, xi_max, n_scan + 1)[1:]
    vals = np.asarray(rho_hat(xi), dtype=complex)
    # a real-valued transform (even rho) changes sign at a zero; otherwise track the
    # component with the larger spread
    use_real = np.ptp(vals.real) >= np.ptp(vals.imag)
    comp = vals.real if use_real else vals.imag
    scale = float(np.abs(vals).max()) or 1.0

    def g(t):
        v = complex(np.asarray(rho_hat(np.array([t]))).reshape(-1)[0])
        return v.real if use_real else v.imag

    roots = []
    for k in range(comp.size - 1):
        a, b = comp[k], comp[k + 1]
        if a == 0.0:
            roots.append(float(xi[k]))
        elif a * b < 0:
            roots.append(optimize.brentq(g, xi[k], xi[k + 1], xtol=xtol, rtol=4 * np.finfo(float).eps))
    out = []
    for r in roots:
        both = np.abs(np.asarray(rho_hat(np.array([r, -r]))))
        if np.all(both <= hat_tol * scale):
            out.append(math.sqrt(m * m + r * r))
    return out
