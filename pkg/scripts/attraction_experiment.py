"""Gaussian data on the single cubic-quintic oscillator: does the trace collapse to one line?

    python scripts/attraction_experiment.py --seeds 0 1 2 --T 200
"""

import argparse

from kgattract.experiments import gaussian_attraction


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--T", type=float, default=200.0)
    ap.add_argument("--dx", type=float, default=0.01)
    ap.add_argument("--half-width", type=float, default=40.0)
    args = ap.parse_args()

    print("seed  verdict         dominance        |omega|            reduction  final_omega")
    for seed in args.seeds:
        r = gaussian_attraction(seed, T=args.T, dx=args.dx, half_width=args.half_width)
        s = r.summary
        dom = " ".join(f"{d:.4f}" for d in r.dominance)
        om = " ".join(f"{w:.4f}" for w in r.dominant_omega)
        red = f"{s.distance_reduction:.1f}x" if s.distance_reduction is not None else "n/a"
        fo = f"{s.final_omega:.4f}" if s.final_omega is not None else "n/a"
        print(f"{seed:<5} {s.verdict:<15} {dom:<16} {om:<18} {red:<10} {fo}  [{r.status}]")
        for note in s.notes:
            print(f"      note: {note}")


if __name__ == "__main__":
    main()
