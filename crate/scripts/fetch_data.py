#!/usr/bin/env python3
"""Prepare benchmark CSV files under data/.

Letter and Libras are extracted from the keel-ds wheel, fetched with pip.
Other registry datasets must be downloaded by hand from the UCI repository;
use --pool to merge split files (Hill-valley ships as train and test halves).
"""
import argparse
import glob
import pathlib
import subprocess
import sys
import tempfile
import zipfile

KEEL_FILES = {
    "letter": "keel_ds/data/balanced/raw/letter.dat",
    "libras": "keel_ds/data/balanced/raw/movement_libras.dat",
}


def keel(out: pathlib.Path) -> None:
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "-d", tmp, "keel-ds==0.2.5"],
            check=True,
        )
        wheel = zipfile.ZipFile(glob.glob(f"{tmp}/keel_ds-*.whl")[0])
        for name, member in KEEL_FILES.items():
            lines = [l for l in wheel.read(member).decode().splitlines() if l.strip() and not l.startswith("@")]
            (out / f"{name}.csv").write_text("\n".join(lines) + "\n")
            print(f"{name}: {len(lines)} rows -> {out / (name + '.csv')}")


def pool(out: pathlib.Path, name: str, parts: list[str]) -> None:
    rows, header = [], None
    for part in parts:
        lines = [l for l in pathlib.Path(part).read_text().splitlines() if l.strip()]
        if lines and any(c.isalpha() for c in lines[0].replace("e", "").replace("E", "")):
            header, lines = lines[0], lines[1:]
        rows.extend(lines)
    body = ([header] if header else []) + rows
    (out / f"{name}.csv").write_text("\n".join(body) + "\n")
    print(f"{name}: {len(rows)} rows pooled from {len(parts)} files")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--pool", nargs="+", metavar=("NAME", "FILE"), help="registry name followed by the files to concatenate")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.pool:
        pool(out, args.pool[0], args.pool[1:])
    else:
        keel(out)


if __name__ == "__main__":
    main()
