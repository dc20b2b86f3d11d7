#!/usr/bin/env python3
# Copyright 2026 The abcboost Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Materializes the benchmark CSVs under data/.

The UCI Pendigits and Optdigits sets are taken from the `keel-ds` wheel on
PyPI, which ships the combined train+test files. Optdigits keeps the UCI
order (3823 training rows followed by the 1797 test rows). Pendigits does
not keep a recoverable writer-disjoint split, so the first 7494 rows become
the training file and the remaining 3498 the test file.

Output CSVs put the class label in column 0.
"""

import argparse
import io
import pathlib
import subprocess
import sys
import tempfile
import zipfile

SETS = {
    # name: (member inside the wheel, training rows)
    "pendigits": ("keel_ds/data/balanced/raw/penbased.dat", 7494),
    "optdigits": ("keel_ds/data/balanced/raw/optdigits.dat", 3823),
}


def rows_of(text):
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        cells = [c.strip() for c in line.split(",")]
        yield [cells[-1]] + cells[:-1]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--wheel", help="path to an already downloaded keel_ds wheel")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    with tempfile.TemporaryDirectory() as tmp:
        wheel = args.wheel
        if wheel is None:
            subprocess.check_call([sys.executable, "-m", "pip", "download", "--no-deps",
                                   "-q", "keel-ds==0.2.5", "-d", tmp])
            wheel = next(pathlib.Path(tmp).glob("keel_ds-*.whl"))
        archive = zipfile.ZipFile(wheel)
        for name, (member, n_train) in SETS.items():
            rows = list(rows_of(archive.read(member).decode()))
            for suffix, part in (("train", rows[:n_train]), ("test", rows[n_train:])):
                path = out / f"{name}.{suffix}.csv"
                buf = io.StringIO()
                for r in part:
                    buf.write(",".join(r) + "\n")
                path.write_text(buf.getvalue())
                print(f"{path}: {len(part)} rows")


if __name__ == "__main__":
    main()
