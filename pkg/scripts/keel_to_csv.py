"""Convert KEEL ``.dat`` files to header-first CSVs readable by ``simpor``.

Sources may be a directory tree holding ``<name>.dat`` files or a zip/wheel
archive (e.g. the ``imbalanced_databases`` wheel). Nominal attributes are
ordinal-encoded in their declaration order (abalone's Sex {M, F, I} -> 0, 1, 2).

    python3 scripts/keel_to_csv.py SOURCE --out data/keel pima glass0 yeast1 abalone9-18
"""

from __future__ import annotations

import argparse
import csv
import re
import sys
import zipfile
from pathlib import Path

ATTR = re.compile(r"@attribute\s+(\S+)\s+(.*)$", re.IGNORECASE)


def parse_keel(text: str) -> tuple[list[str], list[list[str]]]:
    names, nominal, rows, in_data = [], {}, [], False
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("%"):
            continue
        if in_data:
            rows.append([c.strip() for c in line.split(",")])
            continue
        low = line.lower()
        if low.startswith("@data"):
            in_data = True
        elif low.startswith("@attribute"):
            m = ATTR.match(line)
            name, kind = m.group(1), m.group(2).strip()
            names.append(name)
            if kind.startswith("{"):
                nominal[len(names) - 1] = [v.strip() for v in kind.strip("{}").split(",")]
    label = len(names) - 1
    out = []
    for r in rows:
        if len(r) != len(names):
            raise ValueError(f"row with {len(r)} fields, expected {len(names)}: {r}")
        out.append([str(nominal[j].index(v)) if j in nominal and j != label else v
                    for j, v in enumerate(r)])
    return names, out


def read_source(source: Path, name: str) -> str:
    if source.is_dir():
        hits = sorted(source.rglob(f"{name}.dat"))
        if not hits:
            raise FileNotFoundError(f"{name}.dat not found under {source}")
        return hits[0].read_text(encoding="utf-8")
    with zipfile.ZipFile(source) as z:
        hits = sorted(n for n in z.namelist() if n.endswith(f"/{name}.dat") or n == f"{name}.dat")
        if not hits:
            raise FileNotFoundError(f"{name}.dat not found in {source}")
        return z.read(hits[0]).decode("utf-8")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("source", type=Path, help="directory or zip/wheel containing KEEL .dat files")
    ap.add_argument("names", nargs="+")
    ap.add_argument("--out", type=Path, default=Path("data/keel"))
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    for name in args.names:
        header, rows = parse_keel(read_source(args.source, name))
        path = args.out / f"{name}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
        pos = sum(r[-1] == "positive" for r in rows)
        print(f"{path}: {len(rows)} rows, {len(header) - 1} features, {pos} positive")
    return 0


if __name__ == "__main__":
    sys.exit(main())
