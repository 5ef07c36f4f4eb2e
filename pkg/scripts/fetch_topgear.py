#!/usr/bin/env python3
"""Build the TopGear fixture CSVs used by the acceptance suite.

The TopGear car data (297 cars scraped from the Top Gear website, published
in the R package robustHD by A. Alfons) is not redistributable from this
repository, so the two single-column fixtures are generated from the public
Rdatasets mirror:

    python scripts/fetch_topgear.py

writes src/centranorm/data/topgear_mpg.csv and topgear_weight.csv. Pass a
local path to an already-downloaded TopGear.csv to skip the network:

    python scripts/fetch_topgear.py path/to/TopGear.csv
"""

import csv
import io
import pathlib
import sys
import urllib.request

URL = "https://vincentarelbundock.github.io/Rdatasets/csv/robustHD/TopGear.csv"
DATA_DIR = pathlib.Path(__file__).resolve().parent.parent / "src" / "centranorm" / "data"


def load_rows(source: str):
    if source.startswith("http"):
        with urllib.request.urlopen(source) as resp:
            text = resp.read().decode("utf-8")
    else:
        text = pathlib.Path(source).read_text(encoding="utf-8")
    return list(csv.DictReader(io.StringIO(text)))


def write_column(rows, column, out_name):
    out_path = DATA_DIR / out_name
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([column])
        n_missing = 0
        for row in rows:
            value = row[column].strip()
            if value in ("", "NA"):
                writer.writerow([""])
                n_missing += 1
            else:
                writer.writerow([value])
    print(f"wrote {out_path} ({len(rows)} rows, {n_missing} missing)")


def main():
    source = sys.argv[1] if len(sys.argv) > 1 else URL
    rows = load_rows(source)
    if len(rows) != 297:
        print(f"warning: expected 297 cars, got {len(rows)}", file=sys.stderr)
    write_column(rows, "MPG", "topgear_mpg.csv")
    write_column(rows, "Weight", "topgear_weight.csv")


if __name__ == "__main__":
    main()
