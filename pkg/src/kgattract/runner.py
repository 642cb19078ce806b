"""Run a loaded configuration end to end and write its outputs.

Files in the output directory (every data file starts with the config hash):

records.ndjson   header object, then one object per diagnostic record
traces.csv       psi at every oscillator node and probe, every step
snap_<step>.csv  full-field snapshots (x, Re psi, Im psi, Re pi, Im pi)
summary.json     attraction report
manifest.json    hash, version, wall times, status, file list (written last, atomically)
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .config import RunConfig
from .diagnostics.norms import boundary_mass
from .diagnostics.report import attraction_report
from .diagnostics.spectrum import time_spectrum
from .integrator import EvolveResult, evolve
from .model import FieldState

EXIT_OK, EXIT_CONFIG, EXIT_BLOWN_UP, EXIT_CONTAMINATED = 0, 2, 3, 4
STATUS_EXIT = {"completed": EXIT_OK, "blown_up": EXIT_BLOWN_UP, "boundary_contaminated": EXIT_CONTAMINATED}


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def to_json(obj) -> str:
    """Compact JSON with 17 significant digits for floats and null for non-finite values."""
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp_")
    with os.fdopen(fd, "w", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


class OutputConflict(RuntimeError):
    pass


def check_output_dir(directory: str, config_hash: str, force: bool) -> None:
    man = os.path.join(directory, "manifest.json")
    if os.path.exists(man) and not force:
        try:
            with open(man) as fh:
                old = json.load(fh).get("config_hash")
        except (OSError, ValueError):
            old = None
        if old != config_hash:
            raise OutputConflict(
                f"{directory} holds a run with config hash {old}; use --force to overwrite"
            )


def write_state_csv(path: str, state: FieldState, x: np.ndarray, config_hash: str) -> None:
    data = np.column_stack([x, state.psi.real, state.psi.imag, state.pi.real, state.pi.imag])
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# config_hash={config_hash}\n")
        fh.write("x,re_psi,im_psi,re_pi,im_pi\n")
        np.savetxt(fh, data, fmt="%.17g", delimiter=",")


def write_traces_csv(path: str, result: EvolveResult, t0: float, config_hash: str) -> None:
    cols = ["t"]
    for lab in result.trace_labels:
        cols += [f"re_{lab}", f"im_{lab}"]
    t = t0 + np.arange(result.traces.shape[0]) * result.dt
    data = np.empty((t.size, 1 + 2 * result.traces.shape[1]))
    data[:, 0] = t
    data[:, 1::2] = result.traces.real
    data[:, 2::2] = result.traces.imag
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# config_hash={config_hash}\n")
        fh.write(",".join(cols) + "\n")
        np.savetxt(fh, data, fmt="%.17g", delimiter=",")


def read_trace_csv(path: str, column: str | None = None) -> tuple[np.ndarray, np.ndarray, str]:
    """(t, complex trace, label) from a traces file; ``column`` picks the label (default: first)."""
    with open(path) as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    if len(lines) < 2:
        raise ValueError(f"{path}: no samples")
    header = [h.strip() for h in lines[0].split(",")]
    if header[0] != "t" or len(header) < 2:
        raise ValueError(f"{path}: expected a 't' column followed by trace columns")
    data = np.loadtxt(lines[1:], delimiter=",", ndmin=2)
    labels = [h[3:] for h in header[1:] if h.startswith("re_")]
    label = column or (labels[0] if labels else header[1])
    if f"re_{label}" in header:
        re = data[:, header.index(f"re_{label}")]
        im = data[:, header.index(f"im_{label}")] if f"im_{label}" in header else 0.0 * re
    elif label in header:
        re, im = data[:, header.index(label)], 0.0 * data[:, 0]
    else:
        raise ValueError(f"{path}: no column {label!r} (have {', '.join(header[1:])})")
    return data[:, 0], re + 1j * im, label


def record_dict(rec) -> dict:
    return {
        "t": rec.time,
        "E": rec.energy,
        "Q": rec.charge,
        "semi_R": {fmt(R): v for R, v in rec.seminorms.items()},
        "dist_S": rec.ef_metric_to_S,
        "best_omega": rec.best_omega,
        "best_amplitude": rec.best_amplitude,
        "peaks": [[p.frequency, p.magnitude, p.mass] for p in rec.spectral.peaks] if rec.spectral else None,
        "dominance": rec.spectral.dominance if rec.spectral else None,
    }


def attach_spectra(result: EvolveResult, t0: float, m: float, window: float) -> None:
    """Spectrum of the first trace over the trailing ``window`` at every record carrying a distance."""
    if not result.trace_labels:
        return
    tr = result.traces[:, 0]
    for rec in result.records:
        if rec.ef_metric_to_S is None or rec.time - window < t0 - 1e-9:
            continue
        try:
            rec.spectral = time_spectrum(tr, result.dt, (rec.time - window, rec.time), m, t0=t0)
        except ValueError:
            pass


@dataclass
class RunOutcome:
    exit_code: int
    status: str
    result: EvolveResult
    files: list[str]
    verdict: str


def run_simulation(cfg: RunConfig, force: bool = False, log=print) -> RunOutcome:
    out = cfg.output.directory
    check_output_dir(out, cfg.config_hash, force)
    started = time.time()
    for n in cfg.notes:
        log(f"note: {n}")

    snapshots: list[tuple[int, FieldState]] = []
    every = cfg.output.snapshot_every

    def keep(state: FieldState):
        snapshots.append((int(round((state.time - cfg.state0.time) / cfg.scheme.dt)), state))

    result = evolve(cfg.state0, cfg.model, cfg.grid, cfg.scheme, cfg.T, cfg.sample_every, cfg.diagnostics,
                    cfg.probes, snapshot=keep if every else None, snapshot_every=every)
    m = cfg.model.mass
    t0 = cfg.state0.time
    attach_spectra(result, t0, m, cfg.spectrum_window)
    summary = attraction_report(result.records, result.trace_dict(), result.dt, m, t0=t0)
    if cfg.model.kind == "free":
        summary.verdict = "inconclusive"
        summary.notes.append("free field: no solitary manifold")
    bm = boundary_mass(result.final, cfg.grid, m)
    if bm > 1e-6:
        summary.notes.append(f"energy within one unit of the edges is {bm:.3g}; truncated metric is approximate")

    os.makedirs(out, exist_ok=True)
    files = []
    header = {
        "kind": "header", "config_hash": cfg.config_hash, "version": __version__,
        "config": os.path.basename(cfg.path), "initial": cfg.initial_kind, "mass": m,
        "dx": cfg.grid.dx, "half_width": cfg.grid.half_width, "dt": cfg.scheme.dt, "bc": cfg.scheme.bc,
        "T": cfg.T, "steps": result.steps, "status": result.status, "regime": result.regime,
        "positions": cfg.model.positions, "probes": list(cfg.probes), "notes": cfg.notes,
    }
    lines = [to_json(header)] + [to_json(record_dict(r)) for r in result.records]
    _atomic_write(os.path.join(out, "records.ndjson"), "\n".join(lines) + "\n")
    files.append("records.ndjson")
    if cfg.output.write_traces:
        write_traces_csv(os.path.join(out, "traces.csv"), result, t0, cfg.config_hash)
        files.append("traces.csv")
    for k, s in snapshots:
        name = f"snap_{k:08d}.csv"
        write_state_csv(os.path.join(out, name), s, cfg.grid.x, cfg.config_hash)
        files.append(name)
    final_name = "final_state.csv"
    write_state_csv(os.path.join(out, final_name), result.final, cfg.grid.x, cfg.config_hash)
    files.append(final_name)
    summ = dict(config_hash=cfg.config_hash, status=result.status, regime=result.regime,
                reflection=result.flux.reflection, **summary.as_dict())
    _atomic_write(os.path.join(out, "summary.json"), to_json(summ) + "\n")
    files.append("summary.json")

    manifest = {
        "config_hash": cfg.config_hash, "version": __version__,
        "started": started, "finished": time.time(), "status": result.status, "files": files,
    }
    _atomic_write(os.path.join(out, "manifest.json"), json.dumps(manifest, indent=1) + "\n")
    code = STATUS_EXIT[result.status]
    log(f"status={result.status} regime={result.regime} verdict={summary.verdict} steps={result.steps}")
    return RunOutcome(code, result.status, result, files, summary.verdict)
