"""Tabular datasets: CSV loading, seeded splitting and min-max scaling.

CSV layout: a header row ``f0,f1,...,f{d-1}`` optionally followed by a final
``label`` column holding 0 (normal) or 1 (anomaly).
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Dataset",
    "SplitSpec",
    "Scaler",
    "CsvFormatError",
    "load_csv",
    "save_csv",
    "split",
    "scale_fit",
    "scale_apply",
    "make_two_cluster",
    "make_manifest",
    "check_manifest",
    "ODDS_REFERENCE",
]

log = logging.getLogger(__name__)

TEST_CLIP = 1.5

# published size / dimension / anomaly count of the ODDS sets used here
ODDS_REFERENCE = {
    "cardio": {"n": 1831, "d": 21, "anomaly_count": 176},
    "thyroid": {"n": 3772, "d": 6, "anomaly_count": 93},
    "musk": {"n": 3062, "d": 166, "anomaly_count": 97},
}


class CsvFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    name: str
    features: np.ndarray
    labels: np.ndarray | None = None
    provenance: str = ""
    constant_features: tuple[int, ...] = field(default=())

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        if x.ndim != 2:
            raise ValueError("features must be an N x d matrix")
        if not np.all(np.isfinite(x)):
            raise ValueError("features contain NaN or inf")
        x.setflags(write=False)
        object.__setattr__(self, "features", x)
        if self.labels is not None:
            y = np.asarray(self.labels)
            if y.shape != (x.shape[0],):
                raise ValueError("labels must have one entry per row")
            if not np.all((y == 0) | (y == 1)):
                raise ValueError("labels must be 0 or 1")
            y = y.astype(np.int64)
            y.setflags(write=False)
            object.__setattr__(self, "labels", y)
        if not self.constant_features:
            const = tuple(int(j) for j in np.flatnonzero(np.ptp(x, axis=0) == 0)) if len(x) else ()
            object.__setattr__(self, "constant_features", const)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def anomaly_rate(self) -> float | None:
        return None if self.labels is None else float(self.labels.mean())

    def subset(self, rows, name: str | None = None) -> "Dataset":
        rows = np.asarray(rows)
        labels = None if self.labels is None else self.labels[rows]
        return Dataset(name or self.name, self.features[rows], labels, self.provenance)


def load_csv(path, name: str | None = None) -> Dataset:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file") from None
        has_label = bool(header) and header[-1] == "label"
        n_feat = len(header) - has_label
        expected = [f"f{j}" for j in range(n_feat)]
        if header[:n_feat] != expected:
            raise CsvFormatError(f"{path}: line 1: header must be f0..f{n_feat - 1}[,label]")
        rows, labels = [], []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise CsvFormatError(
                    f"{path}: line {line_no}: expected {len(header)} fields, got {len(row)}")
            try:
                values = [float(c) for c in row[:n_feat]]
            except ValueError as exc:
                raise CsvFormatError(f"{path}: line {line_no}: {exc}") from None
            rows.append(values)
            if has_label:
                lab = row[-1].strip()
                if lab not in ("0", "1", "0.0", "1.0"):
                    raise CsvFormatError(f"{path}: line {line_no}: label {lab!r} is not 0/1")
                labels.append(int(float(lab)))
    features = np.array(rows, dtype=np.float64).reshape(len(rows), n_feat)
    if not np.all(np.isfinite(features)):
        raise CsvFormatError(f"{path}: non-finite feature values")
    ds = Dataset(name or path.stem, features,
                 np.array(labels, dtype=np.int64) if has_label else None,
                 provenance=str(path))
    if ds.constant_features:
        log.warning("%s: constant feature columns %s", ds.name, list(ds.constant_features))
    return ds


def save_csv(ds: Dataset, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        header = [f"f{j}" for j in range(ds.d)]
        if ds.labels is not None:
            header.append("label")
        w.writerow(header)
        for i in range(ds.n):
            row = [repr(float(v)) for v in ds.features[i]]
            if ds.labels is not None:
                row.append(str(int(ds.labels[i])))
            w.writerow(row)


@dataclass(frozen=True)
class SplitSpec:
    n_train: int
    seed: int = 0


def split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Label-blind seeded shuffle; the first ``n_train`` rows train."""
    if not 0 < spec.n_train < ds.n:
        raise ValueError(f"n_train must lie in (0, {ds.n}), got {spec.n_train}")
    perm = np.random.default_rng(spec.seed).permutation(ds.n)
    return (ds.subset(perm[:spec.n_train], f"{ds.name}-train"),
            ds.subset(perm[spec.n_train:], f"{ds.name}-test"))


@dataclass(frozen=True)
class Scaler:
    lo: np.ndarray
    hi: np.ndarray

    def to_json(self) -> dict:
        return {"min": self.lo.tolist(), "max": self.hi.tolist()}

    @classmethod
    def from_json(cls, obj) -> "Scaler":
        return cls(np.array(obj["min"], dtype=np.float64), np.array(obj["max"], dtype=np.float64))


def scale_fit(train) -> Scaler:
    x = train.features if isinstance(train, Dataset) else np.asarray(train, dtype=np.float64)
    return Scaler(x.min(axis=0), x.max(axis=0))


def scale_apply(scaler: Scaler, features, clip: float = TEST_CLIP) -> np.ndarray:
    """Affine map of the fitted range onto [-1, 1], clipped to ``[-clip, clip]``.

    Constant training features map to 0.
    """
    x = np.asarray(features, dtype=np.float64)
    span = scaler.hi - scaler.lo
    const = span == 0
    safe = np.where(const, 1.0, span)
    out = 2.0 * (x - scaler.lo) / safe - 1.0
    out[..., const] = 0.0
    return np.clip(out, -clip, clip)


def make_two_cluster(n: int = 1000, d: int = 4, anomaly_rate: float = 0.05,
                     seed: int = 0, spread: float = 0.3, distance: float = 5.0,
                     outlier_spread: float = 1.5) -> Dataset:
    """Tight Gaussian cluster of normals plus a distant, diffuse outlier cloud."""
    rng = np.random.default_rng(seed)
    n_out = int(round(n * anomaly_rate))
    n_in = n - n_out
    direction = rng.normal(size=d)
    direction /= np.linalg.norm(direction)
    normal = rng.normal(0.0, spread, size=(n_in, d))
    outliers = distance * direction + rng.normal(0.0, outlier_spread, size=(n_out, d))
    x = np.vstack([normal, outliers])
    y = np.r_[np.zeros(n_in, dtype=np.int64), np.ones(n_out, dtype=np.int64)]
    perm = rng.permutation(n)
    return Dataset("two-cluster", x[perm], y[perm], provenance=f"synthetic seed={seed}")


def make_manifest(ds: Dataset) -> dict:
    return {
        "name": ds.name,
        "n": ds.n,
        "d": ds.d,
        "anomaly_count": None if ds.labels is None else int(ds.labels.sum()),
    }


def check_manifest(manifest: dict) -> list[str]:
    """Differences from the published ODDS figures (empty when consistent)."""
    ref = ODDS_REFERENCE.get(str(manifest["name"]).lower())
    if ref is None:
        return []
    return [f"{manifest['name']}: {key} is {manifest[key]}, expected {ref[key]}"
            for key in ("n", "d", "anomaly_count") if manifest.get(key) != ref[key]]


def write_manifest(ds: Dataset, path) -> list[str]:
    manifest = make_manifest(ds)
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True))
    problems = check_manifest(manifest)
    for msg in problems:
        log.warning(msg)
    return problems
