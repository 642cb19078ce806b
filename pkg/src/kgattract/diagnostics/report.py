"""Per-sample diagnostic records and the end-of-run attraction verdict."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spectrum import SpectrumReport, time_spectrum

# Reporting heuristics only; a finite run cannot decide an asymptotic statement.
DOMINANCE_ATTRACTING = 0.99
DISTANCE_REDUCTION = 10.0
DOMINANCE_MULTIFREQ = 0.9
ON_MANIFOLD = 1e-3  # final distance relative to the state's largest seminorm
LINE_MIN_MASS = 1e-2


@dataclass
class DiagRecord:
    time: float
    energy: float
    charge: float
    seminorms: dict[float, float] = field(default_factory=dict)
    ef_metric_to_S: float | None = None
    best_omega: float | None = None
    best_amplitude: float | None = None
    spectral: SpectrumReport | None = None


@dataclass
class AttractionSummary:
    verdict: str  # attracting | multifrequency | inconclusive
    distance_slope: float | None
    distance_reduction: float | None
    final_omega: float | None
    final_amplitude: float | None
    spectra: dict[str, list[SpectrumReport]]
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "distance_slope": self.distance_slope,
            "distance_reduction": self.distance_reduction,
            "final_omega": self.final_omega,
            "final_amplitude": self.final_amplitude,
            "spectra": {k: [s.as_dict() for s in v] for k, v in self.spectra.items()},
            "notes": list(self.notes),
        }


def _distance_trend(records: list[DiagRecord]) -> tuple[float | None, float | None]:
    pts = [(r.time, r.ef_metric_to_S) for r in records if r.ef_metric_to_S is not None]
    if len(pts) < 2:
        return None, None
    t = np.array([p[0] for p in pts])
    d = np.array([p[1] for p in pts])
    late = t >= t[0] + 0.5 * (t[-1] - t[0])
    slope = None
    if late.sum() >= 2 and np.all(d[late] > 0):
        slope = float(np.polyfit(t[late], np.log(d[late]), 1)[0])
    reduction = float(d.max() / d[-1]) if d[-1] > 0 else math.inf
    return slope, reduction


def window_spectra(trace: np.ndarray, dt: float, m: float, t0: float = 0.0,
                   n_windows: int = 2) -> list[SpectrumReport]:
    """Spectra of the last half of ``trace`` split into ``n_windows`` consecutive windows."""
    t_end = t0 + (len(trace) - 1) * dt
    start = t0 + 0.5 * (t_end - t0)
    edges = np.linspace(start, t_end, n_windows + 1)
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        try:
            out.append(time_spectrum(trace, dt, (a, b), m, t0=t0))
        except ValueError:
            return []
    return out


def stable_lines(spectra: list[SpectrumReport], min_mass: float = LINE_MIN_MASS) -> list[float]:
    """|frequencies| carrying >= ``min_mass`` in every window (matched within two bins)."""
    if not spectra:
        return []
    common = [f for f, _ in spectra[0].lines(min_mass)]
    for s in spectra[1:]:
        tol = 2.0 * s.bin_width
        here = [f for f, _ in s.lines(min_mass)]
        common = [f for f in common if any(abs(f - g) <= tol for g in here)]
    return common


def attraction_report(records: list[DiagRecord], traces: dict[str, np.ndarray], dt: float, m: float,
                      t0: float = 0.0, n_windows: int = 2) -> AttractionSummary:
    """Summarize a finished run: distance trend, late-window spectra per trace, verdict.

    attracting     every trace has dominance >= 0.99 late and the distance dropped >= 10x
                   (or stayed below 1e-3 of the state's size, for runs started on the manifold);
    multifrequency some trace keeps >= 2 distinct lines with dominance <= 0.9 in all windows;
    inconclusive   otherwise.
    """
    slope, reduction = _distance_trend(records)
    last = next((r for r in reversed(records) if r.ef_metric_to_S is not None), None)
    spectra = {name: window_spectra(tr, dt, m, t0, n_windows) for name, tr in traces.items()}
    notes = []
    multi = False
    dominant = bool(spectra)
    for name, sp in spectra.items():
        if not sp:
            notes.append(f"{name}: trace too short for late-window spectra")
            dominant = False
            continue
        if any(s.dominance < DOMINANCE_ATTRACTING for s in sp):
            dominant = False
        lines = stable_lines(sp)
        if len(lines) >= 2 and all(s.dominance <= DOMINANCE_MULTIFREQ for s in sp):
            multi = True
            notes.append(f"{name}: stable lines at {', '.join(f'{f:.6g}' for f in sorted(lines))}")
    on_manifold = False
    if last is not None and last.seminorms:
        on_manifold = last.ef_metric_to_S <= ON_MANIFOLD * max(last.seminorms.values())
    if multi:
        verdict = "multifrequency"
    elif dominant and ((reduction is not None and reduction >= DISTANCE_REDUCTION) or on_manifold):
        verdict = "attracting"
        if on_manifold and not (reduction is not None and reduction >= DISTANCE_REDUCTION):
            notes.append("distance stayed near zero throughout (run started on the manifold)")
    else:
        verdict = "inconclusive"
    return AttractionSummary(
        verdict=verdict,
        distance_slope=slope,
        distance_reduction=reduction,
        final_omega=last.best_omega if last else None,
        final_amplitude=last.best_amplitude if last else None,
        spectra=spectra,
        notes=notes,
    )
