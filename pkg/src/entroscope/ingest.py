"""Dataset ingestion: YAML manifests, delimited text files, pooled tables.

A manifest names the dataset, lists the files to pool (each with a source
column to channel mapping), and declares which triaxial channels get a
synthesized vector-magnitude column. Values stay in raw physical units; the
loader never converts anything.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .errors import DataError, ManifestError

MISSING_POLICIES = ("drop-row-for-subset", "drop-value")


@dataclass(frozen=True)
class FileSpec:
    path: str
    columns: dict[str, str]  # source column name -> channel name
    delimiter: str = ","


@dataclass(frozen=True)
class MagnitudeSpec:
    x: str
    y: str
    z: str
    name: str


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    files: tuple[FileSpec, ...]
    channels: tuple[str, ...]
    magnitude_specs: tuple[MagnitudeSpec, ...] = ()
    missing_policy: str = "drop-row-for-subset"

    def __post_init__(self):
        if len(set(self.channels)) != len(self.channels):
            raise ManifestError("channel names must be unique")
        if self.missing_policy not in MISSING_POLICIES:
            raise ManifestError(f"unknown missing policy {self.missing_policy!r}")
        taken = set(self.channels)
        for spec in self.magnitude_specs:
            for ref in (spec.x, spec.y, spec.z):
                if ref not in self.channels:
                    raise ManifestError(
                        f"magnitude {spec.name!r} references undeclared channel {ref!r}"
                    )
            if spec.name in taken:
                raise ManifestError(f"magnitude name {spec.name!r} is already taken")
            taken.add(spec.name)
        for fs in self.files:
            for channel in fs.columns.values():
                if channel not in self.channels:
                    raise ManifestError(
                        f"file {fs.path!r} maps onto undeclared channel {channel!r}"
                    )


def load_manifest(path) -> DatasetManifest:
    """Parse and validate a manifest file."""
    text = Path(path).read_text()
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ManifestError(f"cannot parse manifest {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ManifestError(f"manifest {path} must be a mapping")
    try:
        files = tuple(
            FileSpec(
                path=str(entry["path"]),
                columns={str(k): str(v) for k, v in dict(entry["columns"]).items()},
                delimiter=str(entry.get("delimiter", ",")),
            )
            for entry in doc.get("files", []) or []
        )
        magnitudes = tuple(
            MagnitudeSpec(str(m["x"]), str(m["y"]), str(m["z"]), str(m["name"]))
            for m in doc.get("magnitudes", []) or []
        )
        return DatasetManifest(
            name=str(doc["name"]),
            files=files,
            channels=tuple(str(c) for c in doc["channels"]),
            magnitude_specs=magnitudes,
            missing_policy=str(doc.get("missing_policy", "drop-row-for-subset")),
        )
    except (KeyError, TypeError) as exc:
        raise ManifestError(f"manifest {path} is missing or mistypes a field: {exc}") from exc


@dataclass(frozen=True, eq=False)
class SampleTable:
    """Pooled, channel-aligned samples. NaN marks a missing slot."""

    channels: tuple[str, ...]
    rows: np.ndarray  # (row_count, len(channels)) float64
    source: str
    missing_policy: str = "drop-row-for-subset"

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        rows = np.asarray(self.rows, dtype=float)
        object.__setattr__(self, "rows", rows)
        if rows.ndim != 2 or rows.shape[1] != len(self.channels):
            raise DataError("rows must be a matrix with one column per channel")

    @property
    def row_count(self) -> int:
        return int(self.rows.shape[0])

    def column(self, name: str) -> np.ndarray:
        """Full aligned column for one channel, missing slots as NaN."""
        try:
            i = self.channels.index(name)
        except ValueError:
            raise DataError(f"unknown channel {name!r}") from None
        return self.rows[:, i]


def _parse_cell(cell: str, strict: bool, where: str) -> float:
    cell = cell.strip()
    if not cell:
        return math.nan
    try:
        return float(cell)
    except ValueError:
        if strict:
            raise DataError(f"non-numeric cell {cell!r} at {where}") from None
        return math.nan


def _load_file(fs: FileSpec, root: Path, channels: tuple[str, ...],
               strict: bool) -> np.ndarray:
    fpath = root / fs.path
    if not fpath.is_file():
        raise DataError(f"missing file {fpath}")
    with open(fpath, newline="") as fh:
        reader = csv.reader(fh, delimiter=fs.delimiter)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{fpath} has no header row")
        header = [h.strip() for h in header]
        positions: list[tuple[int, int]] = []  # (source index, channel index)
        for src, channel in fs.columns.items():
            if src not in header:
                raise DataError(f"column {src!r} not found in {fpath}")
            positions.append((header.index(src), channels.index(channel)))
        raw_rows = list(reader)

    block = np.full((len(raw_rows), len(channels)), np.nan)
    for r, row in enumerate(raw_rows):
        for src_i, ch_i in positions:
            if src_i < len(row):
                block[r, ch_i] = _parse_cell(row[src_i], strict, f"{fpath}:{r + 2}")
    return block


def load_table(manifest: DatasetManifest, root, strict: bool = True) -> SampleTable:
    """Pool every manifest file into one table, magnitudes appended last.

    Rows concatenate in manifest file order. Channels a file does not map
    stay missing for that file's rows. Empty cells are missing even under
    strict mode; strict only rejects non-numeric text.
    """
    if not manifest.files:
        raise ManifestError("empty manifest")
    root = Path(root)
    blocks = [_load_file(fs, root, manifest.channels, strict) for fs in manifest.files]
    table = SampleTable(
        channels=manifest.channels,
        rows=np.vstack(blocks),
        source=manifest.name,
        missing_policy=manifest.missing_policy,
    )
    for spec in manifest.magnitude_specs:
        table = add_magnitude(table, spec.x, spec.y, spec.z, spec.name)
    return table


def add_magnitude(table: SampleTable, x: str, y: str, z: str,
                  name: str) -> SampleTable:
    """Append the Euclidean norm of three channels as a new channel.

    A row's magnitude is missing whenever any component is missing.
    """
    if name in table.channels:
        raise DataError(f"duplicate channel name {name!r}")
    vx, vy, vz = table.column(x), table.column(y), table.column(z)
    mag = np.sqrt(vx ** 2 + vy ** 2 + vz ** 2)
    return SampleTable(
        channels=table.channels + (name,),
        rows=np.column_stack([table.rows, mag]),
        source=table.source,
        missing_policy=table.missing_policy,
    )
