"""Write the benchmark problems to fixtures/*.json."""
import argparse
from pathlib import Path

from dsing.io import save_problem
from dsing.problems import fixture_problems


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dir", type=Path, default=Path(__file__).resolve().parents[1] / "fixtures")
    args = ap.parse_args()
    args.dir.mkdir(parents=True, exist_ok=True)
    for name, prob in fixture_problems().items():
        save_problem(args.dir / f"{name}.json", prob)
        print(f"wrote {name}.json")


if __name__ == "__main__":
    main()
