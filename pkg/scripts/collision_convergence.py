"""Collision-model convergence study; tables on stderr, JSON summary on stdout.

    python scripts/collision_convergence.py --dt-sweep 1e-2:1e-5 --seed 3
"""
import argparse
import json

from qreversal.cli import collision_sweep, parse_sweep


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dt-sweep", default="1e-2:1e-5")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--points", type=int, default=8)
    args = parser.parse_args()
    hi, lo = parse_sweep(args.dt_sweep)
    records, _ = collision_sweep(hi, lo, args.seed, args.points)
    summary = {r["name"]: {k: v for k, v in r.items() if k not in ("name", "errors")} for r in records}
    print(json.dumps(summary, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
