"""Level-by-level refinement of the harmonic ground state.

Solves the symmetric stationary eigenproblem at increasing resolution and
reports the successive inter-level differences used by the refinement stop
criterion, plus the scale split of the accepted solution.
"""

import argparse
import os

import numpy as np

from wigner.assembly import PhaseSpaceBasis, assemble_stationary_pair
from wigner.basis import WaveletBasis, daubechies_filter
from wigner.model import ModelParams, parse_potential
from wigner.solve import reconstruct_by_scale, refine_until, stationary_eigen


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--order", type=int, default=10)
    ap.add_argument("--epsilon", type=float, default=1e-4)
    ap.add_argument("--n-min", type=int, default=4)
    ap.add_argument("--n-max", type=int, default=7)
    ap.add_argument("--box", type=float, default=3.2)
    args = ap.parse_args()

    U = parse_potential("0.5*q^2")
    params = ModelParams()
    filt = daubechies_filter(args.order)

    def solve_at_level(j):
        mk = lambda: WaveletBasis(filter=filt, j_coarse=min(3, j), j_fine=j,
                                  domain=(-args.box, args.box))
        ps = PhaseSpaceBasis(mk(), mk())
        A_sym, _ = assemble_stationary_pair(ps, U, params)
        return stationary_eigen(A_sym, 1)[0][1]

    W, report = refine_until(solve_at_level, epsilon=args.epsilon,
                             n_max=args.n_max, n_min=args.n_min)
    print("# level ||W^{N+1} - W^N||")
    for level, diff in report.levels_tried:
        print(f"{level:5d}  {diff:.6e}")
    print(f"accepted level: {report.accepted_level}")
    print(f"converged: {report.converged}   monotone: {report.monotone}")

    cut = W.ps.basis_q.j_coarse + 1
    if cut <= W.ps.basis_q.j_fine:
        slow, fast = reconstruct_by_scale(W, cut)
        total = W.l2_norm() ** 2
        print(f"slow-scale energy fraction: {slow.l2_norm() ** 2 / total:.6f}")
        for i, part in enumerate(fast):
            print(f"detail level {cut + i} energy fraction: "
                  f"{part.l2_norm() ** 2 / total:.3e}")


if __name__ == "__main__":
    main()
