"""Adaptive node count vs (d-1)n+1 nodes on a matrix polynomial fixture."""
import argparse
from dataclasses import replace
from pathlib import Path

from dsing.cli import comparison_table
from dsing.io import load_problem
from dsing.outer import distance_to_singularity, fta_points_for
from dsing.verify import GridSpec

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("problem", nargs="?", default=FIXTURES / "omnicam_like.json", type=Path)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    prob = load_problem(args.problem)
    opts = replace(prob.options, scaled=True, verify_grid=GridSpec.disk_default())
    rows = [
        ("adaptive", distance_to_singularity(prob.F, prob.spec, replace(opts, num_points=None))),
        ("fta", distance_to_singularity(prob.F, prob.spec, replace(opts, num_points=fta_points_for(prob.F)))),
    ]
    print(comparison_table(rows))


if __name__ == "__main__":
    main()
