"""Command line: simulate, solitary, multifreq, gapcheck, spectrum, free-decay.

Exit codes: 0 completed, 2 configuration or input error, 3 blown up, 4 boundary contaminated.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys

import numpy as np

from .config import ConfigError, load_config
from .model import GridSpec, ModelSpec, OscillatorSpec, check_gap_condition
from .multifreq import ConstructionError, build_linear_degenerate, build_wide_gap, residual_report
from .runner import EXIT_CONFIG, OutputConflict, fmt, read_trace_csv, run_simulation, write_state_csv
from .solitary import NO_WAVES_MSG, SolitaryWave, amplitude_roots, sample_solitary


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]


def _err(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_CONFIG


def cmd_simulate(args) -> int:
    try:
        cfg = load_config(args.config, output_dir=args.out)
        if args.free:
            cfg = dataclasses.replace(cfg, model=ModelSpec(cfg.model.mass))
        outcome = run_simulation(cfg, force=args.force)
    except (ConfigError, OutputConflict) as exc:
        return _err(str(exc))
    print(f"verdict: {outcome.verdict}")
    print(f"output: {cfg.output.directory}")
    return outcome.exit_code


def cmd_free_decay(args) -> int:
    args.free = True
    try:
        cfg = load_config(args.config, output_dir=args.out)
    except ConfigError as exc:
        return _err(str(exc))
    cfg = dataclasses.replace(cfg, model=ModelSpec(cfg.model.mass),
                              diagnostics=dataclasses.replace(cfg.diagnostics, distance_every=0))
    try:
        outcome = run_simulation(cfg, force=args.force)
    except OutputConflict as exc:
        return _err(str(exc))
    first, last = outcome.result.records[0], outcome.result.records[-1]
    for R, v0 in first.seminorms.items():
        v1 = last.seminorms[R]
        ratio = v1 / v0 if v0 > 0 else math.nan
        print(f"R={fmt(R)}  initial={fmt(v0)}  final={fmt(v1)}  ratio={fmt(ratio)}")
    return outcome.exit_code


def cmd_solitary(args) -> int:
    m, omega = args.mass, args.omega
    coeffs = _floats(args.coeffs)
    if not abs(omega) < m:
        return _err(NO_WAVES_MSG)
    try:
        roots = amplitude_roots(coeffs, omega, m)
    except ValueError as exc:
        return _err(str(exc))
    print(f"mass={fmt(m)} omega={fmt(omega)} coeffs={coeffs}")
    if not roots:
        print("amplitudes: {} (no nonzero solitary waves)")
        return 0
    for C in roots:
        w = SolitaryWave.from_root(omega, C, m)
        res = w.jump_residual(coeffs)
        print(f"C={fmt(C)}  kappa={fmt(w.kappa)}  residual={abs(res):.3e}")
    if args.profile:
        grid = GridSpec(args.half_width, args.dx)
        w = SolitaryWave.from_root(omega, roots[args.branch], m)
        write_state_csv(args.profile, sample_solitary(w, grid), grid.x, "none")
        print(f"profile written to {args.profile}")
    return 0


def _stub(kind: str, p, extra: str) -> str:
    return (
        "[model]\n"
        f"mass = {fmt(p.m)}\n"
        "allow_unbounded = true\n\n"
        "[grid]\nhalf_width_x = 40\ndx = 0.01\n\n"
        "[time]\nT = 60\ncfl = 0.5\nsample_every = 200\nbc = transparent\n\n"
        f"[initial]\nkind = {kind}\n{extra}\n"
        "[diagnostics]\ndistance_every = 5\n"
        f"probes_x = {fmt(p.L / 2)}\n\n"
        f"[output]\ndirectory = runs/{kind}\n"
    )


def cmd_multifreq(args) -> int:
    try:
        if args.which == "widegap":
            p = build_wide_gap(args.mass, args.L, args.alpha, args.beta)
            extra = f"L = {fmt(args.L)}\nalpha = {fmt(args.alpha)}\nbeta = {fmt(args.beta)}\n"
            kind = "multifreq_widegap"
        else:
            alpha = None if args.A is not None and args.alpha is None else (args.alpha or 0.0)
            p = build_linear_degenerate(args.mass, args.omega, args.L, args.beta, alpha=alpha, A=args.A)
            extra = f"omega = {fmt(args.omega)}\nL = {fmt(args.L)}\nbeta = {fmt(args.beta)}\n"
            extra += f"amplitude_a = {fmt(args.A)}\n" if args.A is not None else f"alpha = {fmt(p.alpha)}\n"
            kind = "multifreq_lindeg"
    except ConstructionError as exc:
        return _err(str(exc))
    print(f"# {kind}")
    for f in dataclasses.fields(p):
        print(f"{f.name} = {fmt(getattr(p, f.name))}")
    for k, v in p.algebraic_residuals().items():
        print(f"residual[{k}] = {abs(v):.3e}")
    for j, v in enumerate(residual_report(p)):
        print(f"jump_residual[{j}] = {v:.3e}")
    stub = _stub(kind, p, extra)
    if args.config_out:
        with open(args.config_out, "w") as fh:
            fh.write(stub)
        print(f"config stub written to {args.config_out}")
    else:
        print("\n# config stub\n" + stub)
    return 0


def cmd_gapcheck(args) -> int:
    pos = _floats(args.positions)
    deg = [int(d) for d in _floats(args.degrees)]
    if len(pos) != len(deg):
        return _err("positions and degrees must have the same length")
    try:
        # u_p = 1 > 0 of the given degree; the gap condition depends on degrees only
        oscs = tuple(OscillatorSpec(x, tuple([0.0] * p + [1.0])) for x, p in zip(pos, deg))
        gc = check_gap_condition(ModelSpec(args.mass, oscs))
    except ValueError as exc:
        return _err(str(exc))
    if gc.vacuous:
        print(f"lhs=inf rhs={fmt(gc.rhs)} verdict=vacuous")
    else:
        print(f"lhs={fmt(gc.lhs)} rhs={fmt(gc.rhs)} verdict={'holds' if gc.holds else 'fails'}")
    return 0


def cmd_spectrum(args) -> int:
    from .diagnostics.spectrum import time_spectrum

    try:
        t, tr, label = read_trace_csv(args.trace, args.column)
        if t.size < 2:
            raise ValueError("trace needs at least two samples")
        dt = float(np.median(np.diff(t)))
        rep = time_spectrum(tr, dt, (args.window[0], args.window[1]), args.mass, t0=float(t[0]))
    except (OSError, ValueError) as exc:
        return _err(str(exc))
    print(f"trace={label} window=[{fmt(rep.window[0])}, {fmt(rep.window[1])}] bin_width={fmt(rep.bin_width)}")
    print(f"in_band_fraction={fmt(rep.in_band_fraction)} dominance={fmt(rep.dominance)}")
    for p in rep.peaks[: args.top]:
        print(f"peak omega={fmt(p.frequency)} magnitude={fmt(p.magnitude)} mass={fmt(p.mass)}")
    for f, mass in rep.lines():
        print(f"line |omega|={fmt(f)} mass={fmt(mass)}")
    if args.csv:
        i0 = int(np.ceil((args.window[0] - t[0]) / dt - 1e-9))
        i1 = int(np.floor((args.window[1] - t[0]) / dt + 1e-9))
        seg = tr[i0:i1 + 1]
        spec = np.fft.fftshift(np.fft.fft(seg * np.hanning(seg.size)))[::-1]
        freqs = (-2 * np.pi * np.fft.fftshift(np.fft.fftfreq(seg.size, dt)))[::-1]
        with open(args.csv, "w", newline="\n") as fh:
            fh.write("omega,magnitude\n")
            np.savetxt(fh, np.column_stack([freqs, np.abs(spec)]), fmt="%.17g", delimiter=",")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kgattract", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("simulate", help="run a configuration")
    s.add_argument("config")
    s.add_argument("--out", default=None, help="output directory (overrides [output] directory)")
    s.add_argument("--force", action="store_true", help="overwrite a directory from another config")
    s.set_defaults(func=cmd_simulate, free=False)

    s = sub.add_parser("free-decay", help="run a configuration with all couplings removed")
    s.add_argument("config")
    s.add_argument("--out", default=None)
    s.add_argument("--force", action="store_true")
    s.set_defaults(func=cmd_free_decay)

    s = sub.add_parser("solitary", help="amplitudes of single-oscillator solitary waves")
    s.add_argument("--mass", type=float, required=True)
    s.add_argument("--omega", type=float, required=True)
    s.add_argument("--coeffs", required=True, help="u_0,u_1,...,u_p (comma separated)")
    s.add_argument("--profile", default=None, help="write the sampled profile to this CSV")
    s.add_argument("--branch", type=int, default=0)
    s.add_argument("--half-width", type=float, default=40.0)
    s.add_argument("--dx", type=float, default=0.01)
    s.set_defaults(func=cmd_solitary)

    s = sub.add_parser("multifreq", help="two-frequency solutions for two oscillators")
    s.add_argument("which", choices=("lindeg", "widegap"))
    s.add_argument("--mass", type=float, default=1.0)
    s.add_argument("--L", type=float, required=True)
    s.add_argument("--omega", type=float, default=0.25, help="lindeg only")
    s.add_argument("--alpha", type=float, default=None)
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--A", type=float, default=None, help="lindeg: fix A and solve for alpha")
    s.add_argument("--config-out", default=None)
    s.set_defaults(func=cmd_multifreq)

    s = sub.add_parser("gapcheck", help="spacing condition for strictly nonlinear oscillators")
    s.add_argument("--mass", type=float, required=True)
    s.add_argument("--positions", required=True)
    s.add_argument("--degrees", required=True)
    s.set_defaults(func=cmd_gapcheck)

    s = sub.add_parser("spectrum", help="windowed spectrum of a trace file")
    s.add_argument("trace")
    s.add_argument("--window", type=float, nargs=2, required=True, metavar=("T_A", "T_B"))
    s.add_argument("--mass", type=float, required=True)
    s.add_argument("--column", default=None)
    s.add_argument("--top", type=int, default=8)
    s.add_argument("--csv", default=None)
    s.set_defaults(func=cmd_spectrum)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.cmd == "multifreq" and args.which == "widegap" and args.alpha is None:
        args.alpha = 0.0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
