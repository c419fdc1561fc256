"""Dataset ingestion, scaling, fold plans, and corruption procedures.

Datasets are immutable after construction (arrays are marked read-only);
every operation returns a new value. Corruption operations return an
audit record that carries everything needed to restore the original
dataset bit-exactly, including the pre-corruption feature values, since
multiply-then-divide by the outlier factor is not exact in floating
point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DataFormatError, ParameterError, ShapeError


class DataFormat(str, enum.Enum):
    CSV = "csv"
    SPARSE = "sparse"


class CorruptionMode(str, enum.Enum):
    OUTLIERS = "outliers"
    LABEL_NOISE = "labels"


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    name: str = "dataset"
    normalized: bool = False
    scaler: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise ShapeError("features must be n-by-m with one label per row", X.shape, y.shape)
        if not np.isfinite(X).all():
            raise ParameterError("features contain NaN or Inf")
        if not np.isin(y, (-1.0, 1.0)).all():
            raise ParameterError("labels must be exactly -1 or +1")
        if self.normalized != (self.scaler is not None):
            raise ParameterError("scaler must be present exactly when the dataset is normalized")
        X = X.copy()
        y = y.copy()
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def m(self) -> int:
        return self.X.shape[1]

    def subset(self, indices, suffix: str = "") -> "Dataset":
        idx = np.asarray(indices, dtype=int)
        return replace(self, X=self.X[idx], y=self.y[idx], name=self.name + suffix)


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray
    seed: int

    def fold_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)


@dataclass(frozen=True)
class CorruptionRecord:
    mode: CorruptionMode
    rate: float
    touched_indices: tuple[int, ...]
    touched_features: tuple[int, ...] = ()
    original_values: tuple[float, ...] = ()
    factor: float = 10.0
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "rate": self.rate,
            "touched_indices": list(self.touched_indices),
            "touched_features": list(self.touched_features),
            "original_values": list(self.original_values),
            "factor": self.factor,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CorruptionRecord":
        return cls(
            mode=CorruptionMode(d["mode"]),
            rate=d["rate"],
            touched_indices=tuple(d["touched_indices"]),
            touched_features=tuple(d["touched_features"]),
            original_values=tuple(d["original_values"]),
            factor=d["factor"],
            seed=d["seed"],
        )


def _normalize_labels(raw: list[float]) -> np.ndarray:
    values = set(raw)
    if values <= {0.0, 1.0}:
        # common repository encoding; 0 maps to -1
        return np.array([1.0 if v == 1.0 else -1.0 for v in raw])
    if values <= {-1.0, 1.0}:
        return np.array(raw, dtype=float)
    raise DataFormatError(f"labels must be from {{0,1}} or {{-1,+1}}, found {sorted(values)}")


def _parse_csv(text: str, name: str) -> Dataset:
    rows: list[list[float]] = []
    lines = text.splitlines()
    start = 0
    if lines:
        first = [c.strip() for c in lines[0].split(",")]
        try:
            [float(c) for c in first]
        except ValueError:
            start = 1  # header row
    for lineno, line in enumerate(lines[start:], start=start + 1):
        if not line.strip():
            continue
        cells = [c.strip() for c in line.split(",")]
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise DataFormatError(f"non-numeric cell: {exc}", line=lineno) from None
        if len(rows[-1]) != len(rows[0]):
            raise DataFormatError(
                f"expected {len(rows[0])} columns, found {len(rows[-1])}", line=lineno
            )
        if len(rows[-1]) < 2:
            raise DataFormatError("rows need at least one feature and a label", line=lineno)
    if not rows:
        raise DataFormatError("file contains no data rows")
    arr = np.array(rows, dtype=float)
    return Dataset(X=arr[:, :-1], y=_normalize_labels(list(arr[:, -1])), name=name)


def _parse_sparse(text: str, name: str) -> Dataset:
    labels: list[float] = []
    entries: list[dict[int, float]] = []
    width = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        try:
            labels.append(float(parts[0]))
        except ValueError:
            raise DataFormatError(f"bad label {parts[0]!r}", line=lineno) from None
        row: dict[int, float] = {}
        for token in parts[1:]:
            try:
                idx_s, val_s = token.split(":")
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise DataFormatError(f"bad index:value token {token!r}", line=lineno) from None
            if idx < 1:
                raise DataFormatError(f"indices are 1-based, got {idx}", line=lineno)
            row[idx - 1] = val
            width = max(width, idx)
        entries.append(row)
    if not entries:
        raise DataFormatError("file contains no data rows")
    X = np.zeros((len(entries), width), dtype=float)
    for i, row in enumerate(entries):
        for j, v in row.items():
            X[i, j] = v
    return Dataset(X=X, y=_normalize_labels(labels), name=name)


def load_dataset(path, fmt: DataFormat = DataFormat.CSV, name: str | None = None) -> Dataset:
    """Load a dataset from disk.

    CSV files use the last column as the label ({0,1} is remapped to
    {-1,+1} with 0 -> -1); an optional header row is detected by a
    non-numeric first line. Sparse files use ``label idx:val ...`` lines
    with 1-based indices and implicit zeros.
    """
    fmt = DataFormat(fmt)
    path = str(path)
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stem = name if name is not None else path.rsplit("/", 1)[-1].rsplit(".", 1)[0]
    if fmt is DataFormat.CSV:
        return _parse_csv(text, stem)
    return _parse_sparse(text, stem)


def write_csv(ds: Dataset, path) -> None:
    """Write a dataset as feature columns plus a trailing label column.

    Floats are emitted with ``repr`` so a reload round-trips bit-exactly.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(ds.n):
            cells = [repr(float(v)) for v in ds.X[i]] + [repr(float(ds.y[i]))]
            fh.write(",".join(cells) + "\n")


def normalize(ds: Dataset) -> Dataset:
    """Affinely map every feature onto [-1, 1]; constant features map to 0."""
    if ds.normalized:
        raise ParameterError(f"dataset {ds.name!r} is already normalized")
    lo = ds.X.min(axis=0)
    hi = ds.X.max(axis=0)
    scaler = tuple((float(a), float(b)) for a, b in zip(lo, hi))
    return replace(ds, X=_scale(ds.X, scaler), normalized=True, scaler=scaler)


def apply_scaler(ds: Dataset, scaler) -> Dataset:
    """Apply a previously fitted scaler; values outside the fitted range
    land outside [-1, 1]."""
    scaler = tuple((float(a), float(b)) for a, b in scaler)
    if len(scaler) != ds.m:
        raise ShapeError("scaler width must match feature count", len(scaler), ds.m)
    return replace(ds, X=_scale(ds.X, scaler), normalized=True, scaler=scaler)


def _scale(X: np.ndarray, scaler) -> np.ndarray:
    lo = np.array([a for a, _ in scaler])
    hi = np.array([b for _, b in scaler])
    span = hi - lo
    out = np.zeros_like(X)
    nz = span != 0
    out[:, nz] = 2.0 * (X[:, nz] - lo[nz]) / span[nz] - 1.0
    return out


def make_folds(n: int, k: int = 5, seed: int = 0) -> FoldPlan:
    """Seeded uniform shuffle with round-robin fold assignment."""
    if not 2 <= k <= n:
        raise ParameterError(f"fold count k={k} must satisfy 2 <= k <= n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    assignments = np.empty(n, dtype=int)
    assignments[perm] = np.arange(n) % k
    return FoldPlan(k=k, assignments=assignments, seed=seed)


def _corruption_count(rate: float, n: int) -> int:
    if not 0.0 < rate < 1.0:
        raise ParameterError(f"corruption rate must lie in (0, 1), got {rate}")
    # round-half-up keeps the paper-style integer counts deterministic
    return int(math.floor(rate * n + 0.5))


def inject_outliers(ds: Dataset, rate: float, factor: float = 10.0, seed: int = 0):
    """Multiply one randomly chosen feature of round(rate*n) samples by
    ``factor``. Returns the corrupted dataset and an audit record."""
    count = _corruption_count(rate, ds.n)
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(ds.n, size=count, replace=False))
    feats = rng.integers(0, ds.m, size=count)
    X = ds.X.copy()
    originals = tuple(float(X[i, j]) for i, j in zip(idx, feats))
    for i, j in zip(idx, feats):
        X[i, j] = X[i, j] * factor
    record = CorruptionRecord(
        mode=CorruptionMode.OUTLIERS,
        rate=rate,
        touched_indices=tuple(int(i) for i in idx),
        touched_features=tuple(int(j) for j in feats),
        original_values=originals,
        factor=factor,
        seed=seed,
    )
    return replace(ds, X=X), record


def inject_label_noise(ds: Dataset, rate: float, seed: int = 0):
    """Flip the labels of round(rate*n) distinct samples."""
    count = _corruption_count(rate, ds.n)
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(ds.n, size=count, replace=False))
    y = ds.y.copy()
    originals = tuple(float(y[i]) for i in idx)
    y[idx] = -y[idx]
    record = CorruptionRecord(
        mode=CorruptionMode.LABEL_NOISE,
        rate=rate,
        touched_indices=tuple(int(i) for i in idx),
        original_values=originals,
        seed=seed,
    )
    return replace(ds, y=y), record


def invert_corruption(ds: Dataset, record: CorruptionRecord) -> Dataset:
    """Undo a recorded corruption, restoring the original dataset bit-exactly."""
    if record.mode is CorruptionMode.OUTLIERS:
        X = ds.X.copy()
        for i, j, v in zip(record.touched_indices, record.touched_features, record.original_values):
            X[i, j] = v
        return replace(ds, X=X)
    y = ds.y.copy()
    for i in record.touched_indices:
        y[i] = -y[i]
    return replace(ds, y=y)


def two_cluster_dataset(
    n: int = 200,
    m: int = 2,
    separation: float = 4.0,
    spread: float = 0.4,
    seed: int = 0,
    name: str = "two-clusters",
) -> Dataset:
    """Balanced Gaussian blobs around two centroids ``separation`` apart.

    Handy as an easy, linearly separable reference task whose labels a
    nearest-centroid rule recovers exactly when ``separation >> spread``.
    """
    rng = np.random.default_rng(seed)
    half = n // 2
    centers = np.zeros((2, m))
    centers[0, 0] = -separation / 2.0
    centers[1, 0] = separation / 2.0
    sizes = (half, n - half)
    X = np.vstack([c + spread * rng.standard_normal((s, m)) for c, s in zip(centers, sizes)])
    y = np.concatenate([np.full(sizes[0], -1.0), np.full(sizes[1], 1.0)])
    order = rng.permutation(n)
    return Dataset(X=X[order], y=y[order], name=name)
