"""Time spectra of oscillator traces and the discrete support identity for convolutions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MIN_WINDOW_SAMPLES = 1024
PEAK_FLOOR = 1e-4
LOBE_BINS = 3  # Hann main lobe is +-2 bins; one extra bin keeps >99.99% of a tone


@dataclass(frozen=True)
class Peak:
    frequency: float
    magnitude: float
    mass: float  # share of total squared magnitude inside the peak's lobe


@dataclass
class SpectrumReport:
    window: tuple[float, float]
    peaks: list[Peak] = field(default_factory=list)
    in_band_fraction: float = 1.0
    dominance: float = 0.0
    bin_width: float = 0.0

    @property
    def dominant(self) -> Peak | None:
        return self.peaks[0] if self.peaks else None

    def lines(self, min_mass: float = 1e-2, fold: bool = True) -> list[tuple[float, float]]:
        """Distinct spectral lines as (frequency, mass), merging +-omega when ``fold``.

        Peaks closer than two bins (after folding) are one line.
        """
        out: list[list[float]] = []
        for p in self.peaks:
            f = abs(p.frequency) if fold else p.frequency
            for line in out:
                if abs(line[0] - f) <= 2.0 * self.bin_width:
                    line[1] += p.mass
                    break
            else:
                out.append([f, p.mass])
        return [(f, mass) for f, mass in out if mass >= min_mass]

    def as_dict(self) -> dict:
        return {
            "window": list(self.window),
            "peaks": [[p.frequency, p.magnitude, p.mass] for p in self.peaks],
            "in_band_fraction": self.in_band_fraction,
            "dominance": self.dominance,
            "bin_width": self.bin_width,
        }


def time_spectrum(trace, dt_sample: float, window: tuple[float, float], m: float,
                  t0: float = 0.0) -> SpectrumReport:
    """Hann-windowed DFT of ``trace`` restricted to ``window``.

    ``trace[k]`` is the sample at ``t0 + k*dt_sample``. Frequencies follow the
    convention psi ~ exp(-i omega t): a trace exp(-i w t) is reported at +w.
    """
    trace = np.asarray(trace, dtype=complex)
    ta, tb = window
    if not (tb > ta):
        raise ValueError("window must satisfy t_a < t_b")
    t_end = t0 + (trace.size - 1) * dt_sample
    tol = 1e-9 * dt_sample
    if ta < t0 - tol or tb > t_end + tol:
        raise ValueError(f"window [{ta}, {tb}] exceeds trace extent [{t0}, {t_end}]")
    i0 = int(math.ceil((ta - t0) / dt_sample - 1e-9))
    i1 = int(math.floor((tb - t0) / dt_sample + 1e-9))
    seg = trace[i0:i1 + 1]
    n = seg.size
    if n < MIN_WINDOW_SAMPLES:
        raise ValueError(f"window holds {n} samples; need at least {MIN_WINDOW_SAMPLES}")

    spec = np.fft.fftshift(np.fft.fft(seg * np.hanning(n)))
    # bin frequencies with the exp(-i omega t) sign convention, ascending order
    freqs = -2.0 * np.pi * np.fft.fftshift(np.fft.fftfreq(n, dt_sample))
    spec, freqs = spec[::-1], freqs[::-1]
    mag = np.abs(spec)
    power = mag**2
    total = float(power.sum())
    bw = 2.0 * np.pi / (n * dt_sample)
    report = SpectrumReport(window=(float(ta), float(tb)), bin_width=bw)
    if total == 0.0:
        return report

    report.in_band_fraction = float(power[np.abs(freqs) <= m].sum() / total)
    floor = PEAK_FLOOR * mag.max()
    found = []
    for k in range(n):
        left = mag[k - 1] if k > 0 else -1.0
        right = mag[k + 1] if k < n - 1 else -1.0
        if mag[k] < floor or mag[k] < left or mag[k] <= right:
            continue
        f, a = freqs[k], mag[k]
        if 0 < k < n - 1 and left > 0 and right > 0:
            la, lb, lc = math.log(left), math.log(mag[k]), math.log(right)
            denom = la - 2.0 * lb + lc
            if denom < 0:
                d = 0.5 * (la - lc) / denom
                f = freqs[k] + d * bw
                a = math.exp(lb - 0.25 * (la - lc) * d)
        found.append((k, float(f), float(a)))
    # each bin counts toward its nearest peak only, so overlapping lobes are not counted twice
    idx = np.array([k for k, _, _ in found], dtype=int)
    peaks = []
    for k, f, a in found:
        lo, hi = max(0, k - LOBE_BINS), min(n, k + LOBE_BINS + 1)
        bins = np.arange(lo, hi)
        if idx.size > 1:
            near = idx[np.argmin(np.abs(bins[:, None] - idx[None, :]), axis=1)]
            bins = bins[near == k]
        peaks.append(Peak(f, a, float(power[bins].sum() / total)))
    peaks.sort(key=lambda p: -p.magnitude)
    report.peaks = peaks
    report.dominance = max((p.mass for p in peaks), default=0.0)
    return report


@dataclass(frozen=True)
class SupportCheck:
    lhs: int
    rhs: int
    equal: bool


def _last_nonzero(a: np.ndarray, scale: float) -> int:
    idx = np.flatnonzero(np.abs(a) > 1e-14 * scale)
    return int(idx[-1]) if idx.size else -1


def titchmarsh_support(u, v) -> SupportCheck:
    """Compare the last support index of u*v with the sum of the last support indices."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    su, sv = float(np.abs(u).max(initial=0.0)), float(np.abs(v).max(initial=0.0))
    if su == 0.0 or sv == 0.0:
        raise ValueError("titchmarsh_support needs sequences that are not identically zero")
    w = np.convolve(u, v)
    lhs = _last_nonzero(w, su * sv)
    rhs = _last_nonzero(u, su) + _last_nonzero(v, sv)
    return SupportCheck(lhs, rhs, lhs == rhs)
