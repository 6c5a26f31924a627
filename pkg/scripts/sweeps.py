"""Radius-scale (alpha 0.2..1.0) and informative-portion (0.1..1.0) sweeps.

Thin wrapper over ``simpor sweep``; writes one CSV series per parameter.

    python3 scripts/sweeps.py data/keel/pima.csv data/keel/glass0.csv --outdir results/sweeps
"""

import argparse
import sys
from pathlib import Path

from simpor import cli

SERIES = {"alpha": "0.2:1.0:0.2", "ip": "0.1:1.0:0.1"}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("inputs", nargs="+")
    ap.add_argument("--outdir", type=Path, default=Path("results/sweeps"))
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--params", nargs="+", default=list(SERIES), choices=list(SERIES))
    ap.add_argument("--overwrite", action="store_true")
    args = ap.parse_args(argv)
    args.outdir.mkdir(parents=True, exist_ok=True)
    for p in args.params:
        argv = ["sweep", "--param", p, "--values", SERIES[p], "--inputs", *args.inputs,
                "--trials", str(args.trials), "--output", str(args.outdir / f"{p}.csv"),
                "--report", str(args.outdir / f"{p}.json")]
        rc = cli.main(argv + (["--overwrite"] if args.overwrite else []))
        if rc:
            return rc
    return 0


if __name__ == "__main__":
    sys.exit(main())
