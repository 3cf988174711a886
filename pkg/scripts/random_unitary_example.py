"""Random-unitary-channel example: reverser Hamiltonians for two relabelings
and end-to-end checks of the exponential-form reverser family.

    python scripts/random_unitary_example.py --d 3 --omega 1.0 --c 0.2
"""
import argparse

import numpy as np

from qreversal.antiunitary import Conjugation
from qreversal.models import RandomUnitarySpec, build_random_unitary_model, build_reverser_variant, reverser_hamiltonian
from qreversal.random_ops import random_hermitian, random_state
from qreversal.reversal import run_checks


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--d", type=int, default=3)
    parser.add_argument("--d-e", type=int, default=2)
    parser.add_argument("--omega", type=float, default=1.0)
    parser.add_argument("--c", type=float, default=0.2)
    parser.add_argument("--t", type=float, default=0.7)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    d = args.d
    h = args.omega * np.diag(np.arange(d))
    spec = RandomUnitarySpec(h=h, x=random_hermitian(d, rng), lambdas=rng.uniform(-1, 1, args.d_e),
                             chi_amps=random_state(args.d_e, rng), t=args.t, c_phase=args.c)
    std = Conjugation.standard(d)
    np.set_printoptions(precision=4, suppress=True)
    for label, w in [("identity relabeling", np.eye(d)), ("reversed relabeling", np.eye(d)[::-1])]:
        h_b = reverser_hamiltonian(h, w, std, args.c)
        print(f"{label}: diag(H~) = {np.diag(h_b).real}")
        model = build_random_unitary_model(spec, w, std)
        for r in (1.0, 2.0, -1.0):
            v = build_reverser_variant(spec, r, w, std)
            reports = run_checks(model.with_reverser(v, model.chi_tilde))
            worst = max(rep.residual for rep in reports)
            print(f"  r = {r:+.1f}: all pass {all(rep.passed for rep in reports)}, worst residual {worst:.2e}")
        v = build_reverser_variant(spec, 1.0, w, std, sign=1.0)
        verdicts = {rep.name: rep.passed for rep in run_checks(model.with_reverser(v, model.chi_tilde))}
        print(f"  wrong sign: {verdicts}")


if __name__ == "__main__":
    main()
