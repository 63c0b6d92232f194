"""Run the acceptance criteria and print one line per criterion.

    python scripts/run_acceptance.py            # all
    python scripts/run_acceptance.py 2 8        # a subset
    python scripts/run_acceptance.py --json out.json
"""

import argparse
import json
import sys

from hitlab.acceptance import run_all


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("numbers", nargs="*", type=int)
    ap.add_argument("--json", help="also write the detailed results here")
    args = ap.parse_args()
    results = run_all(args.numbers or None)
    for r in results:
        print(r.line())
    if args.json:
        with open(args.json, "w") as fh:
            json.dump([r.to_json() for r in results], fh, indent=2, sort_keys=True, default=str)
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
