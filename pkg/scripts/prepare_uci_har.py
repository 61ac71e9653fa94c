#!/usr/bin/env python3
"""Flatten the raw UCI-HAR inertial signals into one pooled CSV.

The public distribution stores each signal as fixed 128-sample windows with
50% overlap (rows of train/Inertial Signals/total_acc_x_train.txt and
friends). Keeping the overlap would double-count every other sample and bias
the pooled distributions, so this script de-overlaps: it keeps the first 64
samples of every window and appends the trailing 64 wherever a window is the
last one for its subject (subject ids come from subject_train/test.txt).

Usage:
    python3 scripts/prepare_uci_har.py --raw "/path/to/UCI HAR Dataset" \
        --out uci_har_pooled.csv

The output columns match manifests/uci-har.yaml: total acceleration in g,
body gyroscope in rad/s, both at 50 Hz.
"""

import argparse
import csv
import os
import sys

import numpy as np

SIGNALS = (
    "total_acc_x",
    "total_acc_y",
    "total_acc_z",
    "body_gyro_x",
    "body_gyro_y",
    "body_gyro_z",
)
WINDOW = 128
HALF = WINDOW // 2


def load_split(raw_root: str, split: str) -> tuple[np.ndarray, np.ndarray]:
    """Return (windows, subjects): windows is (rows, 6, 128)."""
    subjects = np.loadtxt(
        os.path.join(raw_root, split, f"subject_{split}.txt"), dtype=int
    )
    stacks = []
    for signal in SIGNALS:
        path = os.path.join(
            raw_root, split, "Inertial Signals", f"{signal}_{split}.txt"
        )
        data = np.loadtxt(path)
        if data.ndim != 2 or data.shape[1] != WINDOW:
            raise SystemExit(f"{path}: expected rows of {WINDOW} samples")
        if data.shape[0] != subjects.size:
            raise SystemExit(f"{path}: row count disagrees with subject file")
        stacks.append(data)
    return np.stack(stacks, axis=1), subjects


def deoverlap(windows: np.ndarray, subjects: np.ndarray) -> np.ndarray:
    """Concatenate windows into (samples, 6), dropping the 50% overlap."""
    out = []
    last_row = windows.shape[0] - 1
    for i in range(windows.shape[0]):
        out.append(windows[i, :, :HALF].T)
        boundary = i == last_row or subjects[i + 1] != subjects[i]
        if boundary:
            out.append(windows[i, :, HALF:].T)
    return np.concatenate(out, axis=0)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--raw", required=True,
                        help='path to the unpacked "UCI HAR Dataset" directory')
    parser.add_argument("--out", default="uci_har_pooled.csv",
                        help="CSV to write (default uci_har_pooled.csv)")
    args = parser.parse_args()

    blocks = []
    for split in ("train", "test"):
        windows, subjects = load_split(args.raw, split)
        flat = deoverlap(windows, subjects)
        print(f"{split}: {windows.shape[0]} windows -> {flat.shape[0]} samples")
        blocks.append(flat)
    pooled = np.concatenate(blocks, axis=0)

    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SIGNALS)
        for row in pooled:
            writer.writerow([f"{v:.8g}" for v in row])
    print(f"wrote {pooled.shape[0]} rows x {pooled.shape[1]} channels "
          f"to {args.out}")
    print("point ENTROSCOPE_UCI_HAR_DIR (or --data-root) at its directory "
          "to use manifests/uci-har.yaml")


if __name__ == "__main__":
    sys.exit(main())
