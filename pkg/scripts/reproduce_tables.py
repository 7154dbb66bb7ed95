"""Reproduce the transaction (table1) and utilization (table2) replication tables.

    python scripts/reproduce_tables.py --scale 0.2 --threads 4
    python scripts/reproduce_tables.py --table table1 --scale 1.0   # full 5000 x 60000
"""

import argparse
import json
import time
from dataclasses import asdict

from occr import harness


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--table", choices=["table1", "table2", "both"], default="both")
    ap.add_argument("--scale", type=float, default=0.2, help="fraction of 5000 replications x 60000 draws")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", help="write all rows as JSON")
    args = ap.parse_args()

    tables = ["table1", "table2"] if args.table == "both" else [args.table]
    dump = {}
    for table in tables:
        t0 = time.perf_counter()
        rows = harness.reproduce_table(table, args.scale, rng_seed=args.seed, threads=args.threads)
        print(f"\n{table} (scale {args.scale}, {time.perf_counter() - t0:.1f}s)")
        print(harness.format_table(rows, harness.TABLES[table][2]))
        dump[table] = [asdict(r) for r in rows]
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(dump, fh, indent=2)


if __name__ == "__main__":
    main()
