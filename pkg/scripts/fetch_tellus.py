#!/usr/bin/env python3
"""Fetch the Tellus soil-geochemistry table and convert it to the toolkit
CSV layout expected by the reproduction test suite.

The reproduction tests (tests/test_acceptance.py, criteria 12-19) look for
``data/tellus.csv``: one row per soil sample, a leading row-id column, 52
element cation-count columns, and a ``group`` column holding the age
bracket. The source table is the Tellus survey (Northern Ireland,
2004-2006 XRF soil samples, expressed as cation counts, N = 6799, D = 52),
distributed through public compositional-data-analysis teaching
repositories; pass its URL or a local path.

Usage:
    python scripts/fetch_tellus.py --url https://<host>/<path>/tellus.csv
    python scripts/fetch_tellus.py --file ~/Downloads/tellus_raw.csv \
        --id-column SampleID --group-column AGE --drop X_COORD,Y_COORD

Any column that is not the id, the group, or explicitly dropped is treated
as an element part. Needs ordinary network access when --url is used.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import urllib.request
from pathlib import Path


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--url", help="HTTP(S) location of the source CSV")
    source.add_argument("--file", help="local path of the source CSV")
    parser.add_argument("--out", default="data/tellus.csv",
                        help="destination (default data/tellus.csv)")
    parser.add_argument("--id-column", default=None,
                        help="row-id column name (default: first column)")
    parser.add_argument("--group-column", default=None,
                        help="age-bracket column name (default: none)")
    parser.add_argument("--drop", default="",
                        help="comma-separated non-element columns to drop")
    return parser.parse_args()


def load_rows(args) -> list[dict]:
    if args.url:
        with urllib.request.urlopen(args.url) as response:
            text = response.read().decode("utf-8-sig")
    else:
        text = Path(args.file).read_text(encoding="utf-8-sig")
    return list(csv.DictReader(io.StringIO(text)))


def main() -> int:
    args = parse_args()
    rows = load_rows(args)
    if not rows:
        print("source table is empty", file=sys.stderr)
        return 1
    header = list(rows[0].keys())
    id_col = args.id_column or header[0]
    drop = {c.strip() for c in args.drop.split(",") if c.strip()}
    skip = drop | {id_col}
    if args.group_column:
        skip.add(args.group_column)
    parts = [c for c in header if c not in skip]
    if len(parts) < 2:
        print("fewer than 2 element columns left after dropping", file=sys.stderr)
        return 1

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        head = ["id", *parts]
        if args.group_column:
            head.append("group")
        writer.writerow(head)
        for row in rows:
            record = [row[id_col], *(row[c] for c in parts)]
            if args.group_column:
                record.append(row[args.group_column])
            writer.writerow(record)
    print(f"wrote {len(rows)} samples x {len(parts)} parts to {out}")
    print("run the reproduction suite with: pytest tests/test_acceptance.py -v")
    return 0


if __name__ == "__main__":
    sys.exit(main())
