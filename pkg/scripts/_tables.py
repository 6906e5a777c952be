"""Shared CSV output helper for the study scripts."""

import csv
import dataclasses
import sys


def write_rows(results, out):
    """results: list of (tag, StudyResult).  Writes long-format CSV."""
    fh = open(out, "w", newline="") if out else sys.stdout
    writer = csv.writer(fh)
    wrote_header = False
    for tag, res in results:
        for row in res.rows:
            d = dataclasses.asdict(row)
            if not wrote_header:
                writer.writerow(["study"] + list(d))
                wrote_header = True
            writer.writerow([tag] + list(d.values()))
    if out:
        fh.close()
        print(f"wrote {out}")
    for tag, res in results:
        excl = {k: v for k, v in res.n_excluded.items() if v}
        if excl:
            print(f"note: {tag} excluded failed replicates: {excl}",
                  file=sys.stderr)
