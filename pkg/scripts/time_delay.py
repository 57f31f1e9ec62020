"""Distance to singularity of the 3 x 3 time-delay benchmark under three structures."""
import argparse
import time

from dsing import problems as P
from dsing.outer import OuterOptions, distance_to_singularity
from dsing.verify import GridSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tol1", type=float, default=16e-8)
    ap.add_argument("--tol2", type=float, default=1e-6)
    ap.add_argument("--structures", nargs="+", default=["real", "sparsity", "time_delay"])
    args = ap.parse_args()

    F = P.time_delay()
    specs = P.time_delay_structures(F)
    opts = OuterOptions(tol1=args.tol1, tol2=args.tol2, verify_grid=GridSpec.function_default())
    print(f"{'structure':<12}{'eps*':>12}{'alpha*eps*':>14}{'iter':>6}{'m':>10}{'max sig':>11}{'min sig':>11}{'|det| max':>11}{'time':>8}")
    for name in args.structures:
        t0 = time.perf_counter()
        r = distance_to_singularity(F, specs[name], opts)
        v = r.verification
        ms = f"{min(r.m_history)}-{max(r.m_history)}"
        print(
            f"{name:<12}{r.eps_star:>12.5f}{r.eps_star_original:>14.5f}{len(r.iterations):>6}{ms:>10}"
            f"{v['grid_max_sigma_min']:>11.2e}{v['grid_min_sigma_min']:>11.2e}{v['circle_det_max']:>11.2e}"
            f"{time.perf_counter() - t0:>7.1f}s"
        )


if __name__ == "__main__":
    main()
