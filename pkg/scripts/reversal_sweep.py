"""Build reversers for many random models and tabulate checker residuals.

    python scripts/reversal_sweep.py --n 200 --method kraus-theorem3
"""
import argparse
import time

import numpy as np

from qreversal.channel import channel_from_unitary, steady_state
from qreversal.antiunitary import Conjugation
from qreversal.random_ops import random_state, random_unitary
from qreversal.reversal import ReversalModel, build_reverser_from_kraus, build_reverser_unitary, run_checks

METHODS = {"isometry-completion": build_reverser_unitary, "kraus-theorem3": build_reverser_from_kraus}


def random_model(rng, d, d_e):
    while True:
        u, chi = random_unitary(d * d_e, rng), random_state(d_e, rng)
        ss = steady_state(channel_from_unitary(u, chi))
        if ss.full_rank:
            break
    return ReversalModel(u=u, chi=chi, sigma=ss.sigma, w=random_unitary(d, rng), theta=Conjugation(random_unitary(d, rng)))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--method", choices=list(METHODS), default="isometry-completion")
    parser.add_argument("--d", type=int, nargs="+", default=[2, 3])
    parser.add_argument("--d-e", type=int, nargs="+", default=[2, 3, 4])
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    worst: dict[str, float] = {}
    failures = 0
    t0 = time.perf_counter()
    for _ in range(args.n):
        m = random_model(rng, int(rng.choice(args.d)), int(rng.choice(args.d_e)))
        chi_tilde = random_state(m.d_E, rng)
        m = m.with_reverser(METHODS[args.method](m, chi_tilde, rng=rng), chi_tilde)
        for report in run_checks(m):
            worst[report.name] = max(worst.get(report.name, 0.0), report.residual)
            failures += not report.passed
    print(f"{args.n} models, method {args.method}, {time.perf_counter() - t0:.2f} s, {failures} failed checks")
    for name, value in worst.items():
        print(f"  {name:18s} max residual {value:.3e}")


if __name__ == "__main__":
    main()
