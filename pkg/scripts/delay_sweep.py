"""Distance and node count of lambda A2 + exp(-tau lambda) A1 + A0 as the delay grows."""
import argparse
import time

from dsing import problems as P
from dsing.outer import OuterOptions, distance_to_singularity
from dsing.verify import GridSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--taus", type=float, nargs="+", default=list(P.DELAY_SWEEP))
    ap.add_argument("--seed", type=int, default=2, help="seed of the frozen 2 x 2 coefficients")
    args = ap.parse_args()

    A2, A1, A0 = P.delay_family_matrices(args.seed)
    print(f"{'tau':>5}{'distance':>11}{'m':>5}{'max sig':>11}{'min sig':>11}{'iter':>6}{'|det| max':>11}{'time':>8}")
    for tau in args.taus:
        t0 = time.perf_counter()
        r = distance_to_singularity(P.delay_family(tau, A2, A1, A0), None, OuterOptions(verify_grid=GridSpec.function_default()))
        v = r.verification
        print(
            f"{tau:>5g}{r.eps_star:>11.4f}{max(r.m_history):>5}{v['grid_max_sigma_min']:>11.2e}"
            f"{v['grid_min_sigma_min']:>11.2e}{len(r.iterations):>6}{v['circle_det_max']:>11.2e}{time.perf_counter() - t0:>7.1f}s"
        )


if __name__ == "__main__":
    main()
