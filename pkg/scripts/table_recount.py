"""Recount winning times and SIMPOR-vs-rest Wilcoxon p-values from the
reference 41-dataset F1 and AUC tables (tests/data/table_*.csv).

    python3 scripts/table_recount.py
"""

import csv
import sys
from pathlib import Path

from simpor.metrics import wilcoxon_signed_rank, winning_times

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"


def load(name):
    with open(DATA / f"table_{name}.csv") as fh:
        rows = list(csv.DictReader(fh))
    return {m: [float(r[m]) for r in rows] for m in rows[0] if m != "dataset"}


def main() -> int:
    with open(DATA / "table_wilcoxon.csv") as fh:
        reference = {r["method"]: r for r in csv.DictReader(fh)}
    for metric in ("f1", "auc"):
        t = load(metric)
        wins = winning_times(t)
        print(f"{metric.upper()} winning times over {len(t['SIMPOR'])} datasets:")
        print("  " + ", ".join(f"{m} {w}" for m, w in sorted(wins.items(), key=lambda kv: -kv[1])))
        print(f"  {'SIMPOR vs':<10}{'p (cc)':>11}{'p (no cc)':>11}{'reference':>11}")
        for m in t:
            if m == "SIMPOR":
                continue
            cc = wilcoxon_signed_rank(t["SIMPOR"], t[m]).p_value
            raw = wilcoxon_signed_rank(t["SIMPOR"], t[m], continuity=False).p_value
            print(f"  {m:<10}{cc:11.2e}{raw:11.2e}{float(reference[m][metric + '_p']):11.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
