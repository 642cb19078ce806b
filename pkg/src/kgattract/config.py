"""Run configuration: a sectioned key-value file parsed with configparser.

Example::

    [model]
    mass = 1.0

    [oscillator.0]
    position_x = 0.0
    coeffs = 0, -1, 0.25

    [grid]
    half_width_x = 40
    dx = 0.01

    [time]
    T = 50
    cfl = 0.5
    sample_every = 200
    bc = transparent

    [initial]
    kind = solitary
    omega = 0.8

    [output]
    directory = runs/solitary

Errors carry the file name, line number, section and key.
"""

from __future__ import annotations

import configparser
import hashlib
import math
import os
import re
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .initial import GaussianSpec, gaussian_state, read_state_csv
from .integrator import BOUNDARY_MODES, DiagConfig, SchemeParams
from .model import FieldState, GridSpec, MeanFieldSpec, ModelSpec, OscillatorSpec, validate_model
from .multifreq import ConstructionError, aligned_grid, build_linear_degenerate, build_wide_gap, initial_state
from .solitary import NO_WAVES_MSG, amplitude_roots, kappa, meanfield_solitary, solitary_profiles_multi

INITIAL_KINDS = ("solitary", "multifreq_lindeg", "multifreq_widegap", "gaussian", "file")

KNOWN_KEYS = {
    "model": {"mass", "allow_unbounded"},
    "mean_field": {"coeffs", "rho", "rho_width", "rho_center", "rho_amplitude", "rho_file"},
    "grid": {"half_width_x", "dx"},
    "time": {"t", "dt", "cfl", "sample_every", "bc", "buffer_check", "overflow_guard"},
    "initial": {"kind", "omega", "branch", "phase", "l", "alpha", "beta", "amplitude_a", "t0",
                "center", "width", "omega0", "wavenumber", "energy_norm", "seed", "path"},
    "diagnostics": {"radii", "distance_every", "spectrum_window_t", "probes_x"},
    "output": {"directory", "snapshot_every", "write_traces"},
}
OSC_KEYS = {"position_x", "coeffs"}
_OSC_SECTION = re.compile(r"^oscillator\.(\w+)$")


class ConfigError(ValueError):
    pass


@dataclass
class OutputSpec:
    directory: str
    snapshot_every: int = 0
    write_traces: bool = True


@dataclass
class RunConfig:
    path: str
    model: ModelSpec
    grid: GridSpec
    scheme: SchemeParams
    T: float
    sample_every: int
    initial_kind: str
    state0: FieldState
    diagnostics: DiagConfig
    probes: tuple[float, ...]
    spectrum_window: float
    output: OutputSpec
    config_hash: str
    notes: list[str] = field(default_factory=list)
    multifreq: Any = None


_MISSING = object()


def _line_map(text: str) -> dict[tuple[str, str], int]:
    out, section = {}, None
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            out[(section, "")] = n
        elif section is not None:
            m = re.match(r"^([^=:]+?)\s*[=:]", line)
            if m:
                out[(section, m.group(1).strip().lower())] = n
    return out


def _floats(text: str) -> list[float]:
    parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
    return [float(p) for p in parts]


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


class _Reader:
    def __init__(self, path: str, text: str):
        self.path = path
        self.cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        try:
            self.cp.read_string(text, source=path)
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        self.lines = _line_map(text)

    def where(self, section: str, key: str = "") -> str:
        n = self.lines.get((section, key)) or self.lines.get((section, ""))
        loc = f"{self.path}:{n}" if n else self.path
        return f"{loc}: [{section}]" + (f" {key}" if key else "")

    def fail(self, section: str, key: str, msg: str):
        raise ConfigError(f"{self.where(section, key)}: {msg}")

    def has(self, section: str, key: str) -> bool:
        return self.cp.has_option(section, key)

    def get(self, section: str, key: str, conv: Callable[[str], Any] = str, default: Any = _MISSING):
        if not self.cp.has_option(section, key):
            if default is _MISSING:
                if not self.cp.has_section(section):
                    raise ConfigError(f"{self.path}: missing section [{section}]")
                self.fail(section, key, "required key is missing")
            return default
        raw = self.cp.get(section, key)
        try:
            return conv(raw)
        except (ValueError, TypeError) as exc:
            self.fail(section, key, f"bad value {raw!r} ({exc})")

    def check_keys(self):
        for sec in self.cp.sections():
            if _OSC_SECTION.match(sec):
                allowed = OSC_KEYS
            elif sec in KNOWN_KEYS:
                allowed = KNOWN_KEYS[sec]
            else:
                self.fail(sec, "", "unknown section")
            for key in self.cp.options(sec):
                if key not in allowed:
                    self.fail(sec, key, f"unknown key (allowed: {', '.join(sorted(allowed))})")

    def canonical(self) -> str:
        rows = []
        for sec in sorted(self.cp.sections()):
            for key in sorted(self.cp.options(sec)):
                if (sec, key) == ("output", "directory"):
                    continue
                rows.append(f"{sec}.{key}={' '.join(self.cp.get(sec, key).split())}")
        return "\n".join(rows)


def config_hash_of(canonical: str) -> str:
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------


def _positive(v: float) -> float:
    if not (math.isfinite(v) and v > 0):
        raise ValueError("must be positive and finite")
    return v


def _snap(position: float, grid: GridSpec) -> float:
    j = round(position / grid.dx)
    if abs(position - j * grid.dx) > 0.5 * grid.dx + 1e-12 or abs(j) > grid.n_half:
        raise ValueError(f"x={position} is outside the grid")
    return j * grid.dx


def _mean_field(r: _Reader, grid: GridSpec, base: str) -> MeanFieldSpec:
    coeffs = r.get("mean_field", "coeffs", _floats)
    kind = r.get("mean_field", "rho", default="gaussian").strip().lower()
    if kind == "gaussian":
        w = r.get("mean_field", "rho_width", lambda s: _positive(float(s)), 1.0)
        c = r.get("mean_field", "rho_center", float, 0.0)
        a = r.get("mean_field", "rho_amplitude", float, 1.0)
        rho = a * np.exp(-((grid.x - c) / w) ** 2)
    elif kind == "file":
        p = r.get("mean_field", "rho_file")
        full = p if os.path.isabs(p) else os.path.join(base, p)
        if not os.path.exists(full):
            r.fail("mean_field", "rho_file", f"file not found: {full}")
        data = np.loadtxt(full, delimiter=",", comments="#", ndmin=2)
        if data.shape[1] != 2:
            r.fail("mean_field", "rho_file", "expected two columns x,rho")
        rho = np.interp(grid.x, data[:, 0], data[:, 1], left=0.0, right=0.0)
    else:
        r.fail("mean_field", "rho", "must be 'gaussian' or 'file'")
    try:
        return MeanFieldSpec(rho, tuple(coeffs))
    except ValueError as exc:
        r.fail("mean_field", "coeffs", str(exc))


def _solitary_state(r: _Reader, model: ModelSpec, grid: GridSpec) -> FieldState:
    omega = r.get("initial", "omega", float)
    branch = r.get("initial", "branch", int, 0)
    phase = r.get("initial", "phase", float, 0.0)
    m = model.mass
    if not abs(omega) < m:
        r.fail("initial", "omega", NO_WAVES_MSG)
    if model.mean_field is not None:
        profiles = [p.phi for p in meanfield_solitary(model.mean_field, omega, m, grid).profiles]
    elif len(model.oscillators) == 1:
        o = model.oscillators[0]
        k = kappa(omega, m)
        profiles = [C * np.exp(-k * np.abs(grid.x - o.position)) for C in amplitude_roots(o.coeffs, omega, m)]
    elif model.oscillators:
        profiles = [p.evaluate(grid.x) for p in solitary_profiles_multi(model, omega).profiles if not p.is_zero]
    else:
        r.fail("initial", "kind", "the free field has no nonzero solitary waves")
    if not profiles:
        r.fail("initial", "omega", f"no nonzero solitary profile at omega={omega}")
    if not 0 <= branch < len(profiles):
        r.fail("initial", "branch", f"only {len(profiles)} profile(s) at omega={omega}")
    phi = profiles[branch] * np.exp(1j * phase)
    return FieldState(phi, -1j * omega * phi)


def load_config(path: str, output_dir: str | None = None) -> RunConfig:
    """Parse and validate a run configuration; nothing is written to disk."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path) as fh:
        text = fh.read()
    r = _Reader(path, text)
    r.check_keys()
    base = os.path.dirname(os.path.abspath(path))
    notes: list[str] = []

    mass = r.get("model", "mass", lambda s: _positive(float(s)))
    allow_unbounded = r.get("model", "allow_unbounded", _bool, False)

    hw = r.get("grid", "half_width_x", lambda s: _positive(float(s)))
    dx = r.get("grid", "dx", lambda s: _positive(float(s)))
    try:
        grid = GridSpec(hw, dx)
    except ValueError as exc:
        r.fail("grid", "half_width_x", str(exc))

    kind = r.get("initial", "kind").strip().lower()
    if kind not in INITIAL_KINDS:
        r.fail("initial", "kind", f"must be one of {', '.join(INITIAL_KINDS)}")

    osc_sections = sorted((s for s in r.cp.sections() if _OSC_SECTION.match(s)),
                          key=lambda s: r.lines.get((s, ""), 0))
    multifreq = None
    if kind.startswith("multifreq"):
        if osc_sections or r.cp.has_section("mean_field"):
            r.fail("initial", "kind", "multifrequency data defines its own two-oscillator model; "
                   "remove the oscillator/mean_field sections")
        try:
            if kind == "multifreq_widegap":
                multifreq = build_wide_gap(mass, r.get("initial", "l", float), r.get("initial", "alpha", float, 0.0),
                                           r.get("initial", "beta", float, 1.0))
            else:
                alpha = r.get("initial", "alpha", float, None)
                A = r.get("initial", "amplitude_a", float, None)
                multifreq = build_linear_degenerate(mass, r.get("initial", "omega", float), r.get("initial", "l", float),
                                                    r.get("initial", "beta", float, 1.0),
                                                    alpha=0.0 if alpha is None and A is None else alpha, A=A)
        except ConstructionError as exc:
            r.fail("initial", "kind", str(exc))
        model = multifreq.model()
        new_grid = aligned_grid(multifreq, hw, dx)
        if new_grid != grid:
            notes.append(f"grid aligned to put x=L on a node: dx={new_grid.dx!r}, half_width={new_grid.half_width!r}")
        grid = new_grid
    else:
        oscs = []
        for sec in osc_sections:
            pos = r.get(sec, "position_x", float)
            coeffs = r.get(sec, "coeffs", _floats)
            try:
                snapped = _snap(pos, grid)
            except ValueError as exc:
                r.fail(sec, "position_x", str(exc))
            if snapped != pos:
                notes.append(f"[{sec}] position_x snapped from {pos!r} to {snapped!r}")
            try:
                oscs.append(OscillatorSpec(snapped, tuple(coeffs)))
            except ValueError as exc:
                r.fail(sec, "coeffs", str(exc))
        mf = _mean_field(r, grid, base) if r.cp.has_section("mean_field") else None
        try:
            model = ModelSpec(mass, tuple(oscs), mf)
        except ValueError as exc:
            r.fail("model", "", str(exc))

    for f in validate_model(model, grid):
        if f.kind == "unbounded_below" and not allow_unbounded:
            r.fail("model", "allow_unbounded", f"{f.message}; set allow_unbounded = true to run anyway")
        if f.kind in ("off_grid", "bad_rho"):
            r.fail("model", "", f.message)
        notes.append(f"model: {f.message}")

    T = r.get("time", "t", float)
    if not (math.isfinite(T) and T >= 0):
        r.fail("time", "t", "must be finite and >= 0")
    if r.has("time", "dt") and r.has("time", "cfl"):
        r.fail("time", "dt", "give either dt or cfl, not both")
    bc = r.get("time", "bc", str, "transparent").strip().lower()
    if bc not in BOUNDARY_MODES:
        r.fail("time", "bc", f"must be one of {', '.join(BOUNDARY_MODES)}")
    dt = r.get("time", "dt", float) if r.has("time", "dt") else r.get("time", "cfl", float, 0.5) * grid.dx
    try:
        scheme = SchemeParams(dt=dt, dx=grid.dx, bc=bc,
                              buffer_check=r.get("time", "buffer_check", _bool, False),
                              overflow_guard=r.get("time", "overflow_guard", lambda s: _positive(float(s)), 1e12))
    except ValueError as exc:
        r.fail("time", "dt" if r.has("time", "dt") else "cfl", str(exc))
    sample_every = r.get("time", "sample_every", int, 100)
    if sample_every < 1:
        r.fail("time", "sample_every", "must be >= 1")

    if kind == "solitary":
        state0 = _solitary_state(r, model, grid)
    elif kind == "gaussian":
        fixed = {k: r.get("initial", k, float) for k in ("center", "width", "omega0", "wavenumber")
                 if r.has("initial", k)}
        en = r.get("initial", "energy_norm", float, 1.0)
        if r.has("initial", "seed"):
            spec = GaussianSpec.from_seed(r.get("initial", "seed", int), energy_norm=en, **fixed)
        else:
            spec = GaussianSpec(energy_norm=en, **fixed)
        notes.append(f"gaussian: {spec}")
        try:
            state0 = gaussian_state(spec, grid, model.mass)
        except ValueError as exc:
            r.fail("initial", "width", str(exc))
    elif kind == "file":
        p = r.get("initial", "path")
        full = p if os.path.isabs(p) else os.path.join(base, p)
        if not os.path.exists(full):
            r.fail("initial", "path", f"file not found: {full}")
        try:
            state0 = read_state_csv(full, grid)
        except ValueError as exc:
            r.fail("initial", "path", str(exc))
    else:
        state0 = initial_state(multifreq, grid, r.get("initial", "t0", float, 0.0))

    radii = tuple(r.get("diagnostics", "radii", _floats, [1.0, 2.0, 5.0, 10.0]))
    if any(not R > 0 for R in radii):
        r.fail("diagnostics", "radii", "radii must be positive")
    diag = DiagConfig(radii=tuple(sorted(radii)),
                      distance_every=r.get("diagnostics", "distance_every", int, 20))
    probes = []
    for p in r.get("diagnostics", "probes_x", _floats, []):
        try:
            sp = _snap(p, grid)
        except ValueError as exc:
            r.fail("diagnostics", "probes_x", str(exc))
        if sp != p:
            notes.append(f"probe x={p!r} snapped to {sp!r}")
        probes.append(sp)
    window = r.get("diagnostics", "spectrum_window_t", float, 30.0)

    directory = output_dir or r.get("output", "directory", str, None)
    if not directory:
        r.fail("output", "directory", "required (or pass --out)")
    if not os.path.isabs(directory) and output_dir is None:
        directory = os.path.join(base, directory)
    output = OutputSpec(directory=directory,
                        snapshot_every=r.get("output", "snapshot_every", int, 0),
                        write_traces=r.get("output", "write_traces", _bool, True))

    return RunConfig(
        path=path, model=model, grid=grid, scheme=scheme, T=T, sample_every=sample_every,
        initial_kind=kind, state0=state0, diagnostics=diag, probes=tuple(probes),
        spectrum_window=window, output=output, config_hash=config_hash_of(r.canonical()),
        notes=notes, multifreq=multifreq,
    )
