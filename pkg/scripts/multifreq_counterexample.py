"""Evolve the closed-form two-frequency solutions and follow error, spectral lines and distance to S.

    python scripts/multifreq_counterexample.py --kind widegap --T 120
"""

import argparse
import math

from kgattract.experiments import line_share, multifreq_run
from kgattract.multifreq import build_linear_degenerate, build_wide_gap


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kind", choices=["widegap", "lindeg", "both"], default="both")
    ap.add_argument("--dx", type=float, default=0.01)
    ap.add_argument("--T", type=float, default=120.0)
    ap.add_argument("--windows", type=int, default=3)
    args = ap.parse_args()

    params = []
    if args.kind in ("widegap", "both"):
        params.append(build_wide_gap(1.0, math.pi, 0.0, 1.0))
    if args.kind in ("lindeg", "both"):
        params.append(build_linear_degenerate(1.0, 0.25, 1.0, 1.0))
    for p in params:
        times = tuple(float(t) for t in range(0, int(args.T) + 1, 20))
        r = multifreq_run(p, dx=args.dx, T=args.T, n_windows=args.windows, distance_times=times)
        w1, w3 = line_share(p, r.probe_x)
        print(f"{p.kind}: omega={p.omega:.6f}  probe x={r.probe_x:.4f}  exact line shares {w1:.4f} / {w3:.4f}")
        print("  error vs closed form:")
        for t, e in r.error_times[::4]:
            print(f"    t={t:6.2f}  {e:.3e}")
        print("  window lines (freq:mass):")
        for k, lines in enumerate(r.window_lines):
            print(f"    window {k}: " + ", ".join(f"{f:.4f}:{m:.3g}" for f, m in lines[:4]))
        print("  distance to S: " + ", ".join(f"t={t:.0f}:{d:.3e}" for t, d in r.distances))
        print(f"  status: {r.status}")


if __name__ == "__main__":
    main()
