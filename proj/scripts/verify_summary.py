#!/usr/bin/env python3
"""Recompute a summary JSON from its metrics CSV and compare.

Independent check that the emitted summaries follow from the emitted
per-round metrics: for every (cell, held-out domain), the mean over seeds of
the final round's global accuracy must match the JSON entry, and "ave" must
be the mean of the domain entries.

usage: verify_summary.py <metrics.csv> <summary.json>
"""

import csv
import json
import sys
from collections import defaultdict

TOL = 1e-12


def main() -> int:
    if len(sys.argv) != 3:
        print(f"usage: {sys.argv[0]} <metrics.csv> <summary.json>")
        return 2
    csv_path, json_path = sys.argv[1], sys.argv[2]

    # (cell, held_out, seed) -> (last round seen, its accuracy)
    final = {}
    with open(csv_path, newline="") as f:
        for row in csv.DictReader(f):
            key = (row["cell"], row["held_out"], int(row["seed"]))
            rnd = int(row["round"])
            if key not in final or rnd >= final[key][0]:
                final[key] = (rnd, float(row["global_acc"]))

    by_domain = defaultdict(list)
    for (cell, dom, seed), (_rnd, acc) in sorted(final.items(), key=lambda kv: kv[0][2]):
        by_domain[(cell, dom)].append(acc)

    with open(json_path) as f:
        summary = json.load(f)

    failures = 0
    for cell, entries in summary.items():
        domain_values = []
        for dom, value in entries.items():
            if dom == "ave":
                continue
            accs = by_domain.get((cell, dom))
            if accs is None:
                print(f"FAIL {cell}/{dom}: not present in the csv")
                failures += 1
                continue
            mean = sum(accs) / len(accs)
            domain_values.append(value)
            if abs(mean - value) > TOL:
                print(f"FAIL {cell}/{dom}: csv mean {mean!r} != json {value!r}")
                failures += 1
        ave = sum(domain_values) / len(domain_values)
        if abs(ave - entries["ave"]) > TOL:
            print(f"FAIL {cell}/ave: recomputed {ave!r} != json {entries['ave']!r}")
            failures += 1

    print("OK" if failures == 0 else f"{failures} mismatches")
    return 0 if failures == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
