#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Convert manually downloaded trade and indicator files into harmnet inputs.

Nothing is downloaded. Fetch these by hand first:

  CEPII BACI (HS92 or later), one yearly file plus the country code table
    https://www.cepii.fr/CEPII/en/bdd_modele/bdd_modele_item.asp?id=37
    files: BACI_HS*_Y<year>_V*.csv, country_codes_V*.csv

  World Bank ESG data, CSV bundle
    https://datacatalog.worldbank.org/search/dataset/0037651
    file: ESGCSV.csv (or WDICSV.csv, same wide layout)

Then:

  scripts/prepare_trade_data.py \\
      --baci BACI_HS92_Y2020_V202401.csv --codes country_codes_V202401.csv \\
      --esg ESGCSV.csv --specs crates/cli/data/worldbank/specs.csv \\
      --year 2020 --out trade-data

The output directory holds flows.csv, indicators.csv, specs.csv and
SHA256SUMS covering both the raw inputs and the converted files. Point
HARMNET_TRADE_DATA at it to run the full-data acceptance checks.
"""

import argparse
import csv
import hashlib
import pathlib
import shutil
import sys

# HS chapter ranges grouped into coarse sectors.
SECTORS = [
    (1, 24, "agriculture"),
    (25, 27, "minerals"),
    (28, 40, "chemicals"),
    (41, 67, "textiles"),
    (68, 83, "metals"),
    (84, 85, "machinery"),
    (86, 89, "transport"),
    (90, 97, "other"),
]


def sector(product):
    chapter = int(str(product).zfill(6)[:2])
    for lo, hi, name in SECTORS:
        if lo <= chapter <= hi:
            return name
    return "other"


def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def baci_flows(baci, codes, year, out):
    iso3 = {}
    with open(codes, newline="", encoding="utf-8-sig") as f:
        for row in csv.DictReader(f):
            iso3[row["country_code"].strip()] = row["country_iso3"].strip()
    totals = {}
    with open(baci, newline="", encoding="utf-8-sig") as f:
        for row in csv.DictReader(f):
            if int(row["t"]) != year:
                continue
            o, d = iso3.get(row["i"].strip()), iso3.get(row["j"].strip())
            if not o or not d or o == d:
                continue
            key = (o, d, sector(row["k"]))
            # BACI values are in thousands of USD.
            totals[key] = totals.get(key, 0.0) + float(row["v"]) * 1000.0
    with open(out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["origin", "dest", "sector", "year", "value_usd"])
        for (o, d, s), v in sorted(totals.items()):
            w.writerow([o, d, s, year, f"{v:.2f}"])
    return len(totals)


def esg_indicators(esg, wanted, year, lookback, out):
    """Takes each series at `year`, or the latest earlier value within
    `lookback` years."""
    years = [str(y) for y in range(year, year - lookback - 1, -1)]
    rows = 0
    with open(esg, newline="", encoding="utf-8-sig") as f, open(out, "w", newline="") as g:
        w = csv.writer(g, lineterminator="\n")
        w.writerow(["entity", "indicator", "value"])
        for row in csv.DictReader(f):
            code = row.get("Indicator Code", "").strip()
            if code not in wanted:
                continue
            value = next((row[y] for y in years if row.get(y, "").strip()), "")
            if value:
                w.writerow([row["Country Code"].strip(), code, value.strip()])
                rows += 1
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--baci", required=True, type=pathlib.Path)
    p.add_argument("--codes", required=True, type=pathlib.Path)
    p.add_argument("--esg", required=True, type=pathlib.Path)
    p.add_argument("--specs", required=True, type=pathlib.Path)
    p.add_argument("--year", type=int, default=2020)
    p.add_argument("--lookback", type=int, default=0, help="years to fall back for missing indicator values")
    p.add_argument("--out", required=True, type=pathlib.Path)
    a = p.parse_args()

    a.out.mkdir(parents=True, exist_ok=True)
    with open(a.specs, newline="") as f:
        wanted = {r["indicator"] for r in csv.DictReader(line for line in f if not line.startswith("#"))}
    n = baci_flows(a.baci, a.codes, a.year, a.out / "flows.csv")
    m = esg_indicators(a.esg, wanted, a.year, a.lookback, a.out / "indicators.csv")
    shutil.copyfile(a.specs, a.out / "specs.csv")
    (a.out / "YEAR").write_text(f"{a.year}\n")

    files = [a.baci, a.codes, a.esg] + [a.out / x for x in ("flows.csv", "indicators.csv", "specs.csv")]
    with open(a.out / "SHA256SUMS", "w") as f:
        for path in files:
            f.write(f"{sha256(path)}  {path.name}\n")
    print(f"{n} flow rows, {m} indicator values, year {a.year} -> {a.out}", file=sys.stderr)


if __name__ == "__main__":
    main()
