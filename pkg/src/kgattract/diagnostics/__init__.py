"""Observables: conserved quantities, local seminorms, spectra, resonance integrals, verdicts."""

from .norms import (
    charge, ef_norm, energy, energy_density, metric_E_F, seminorm_E_R, seminorms, window_integrals,
)
from .resonance import find_Z_rho, rho_hat_from_samples, sigma
from .spectrum import Peak, SpectrumReport, SupportCheck, time_spectrum, titchmarsh_support

__all__ = [
    "charge", "ef_norm", "energy", "energy_density", "metric_E_F", "seminorm_E_R", "seminorms",
    "window_integrals", "find_Z_rho", "rho_hat_from_samples", "sigma", "Peak", "SpectrumReport",
    "SupportCheck", "time_spectrum", "titchmarsh_support",
]
