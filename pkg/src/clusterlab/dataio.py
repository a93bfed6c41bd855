"""Dataset ingestion, standardization, and stratified subsampling.

Two on-disk source formats are understood: the IDX binary format used
by the digit image archives, and whitespace-separated text used by the
activity-recognition archive.  Everything else moves through the
internal CSV layout (one sample per line, features then integer label).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, InvalidInput
from .linalg import as_data_matrix
from .rng import Rng, split

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801

HAR_N_FEATURES = 561


@dataclass(frozen=True)
class LabeledDataset:
    """A data matrix paired with ground-truth integer labels."""

    data: np.ndarray
    labels: np.ndarray
    name: str

    def __post_init__(self):
        data = as_data_matrix(self.data, name="data")
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1 or labels.shape[0] != data.shape[0]:
            raise InvalidInput(
                f"labels must be a vector of length {data.shape[0]}, got shape {labels.shape}"
            )
        if labels.size and labels.min() < 0:
            raise InvalidInput("ground-truth labels must be >= 0")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "labels", labels)

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    @property
    def n_cols(self) -> int:
        return self.data.shape[1]

    @property
    def n_classes(self) -> int:
        return int(np.unique(self.labels).size)


@dataclass(frozen=True)
class StandardizationParams:
    """Per-feature location/scale recorded by `standardize`."""

    means: np.ndarray
    stds: np.ndarray


def _remap_contiguous(labels: np.ndarray) -> np.ndarray:
    """Map arbitrary integer labels onto {0..C-1}, order-preserving."""
    _, remapped = np.unique(labels, return_inverse=True)
    return remapped.astype(np.int64)


def _read_be_u32(buf: bytes, offset: int, path: str) -> int:
    if offset + 4 > len(buf):
        raise FormatError(f"{path}: truncated header")
    return struct.unpack_from(">I", buf, offset)[0]


def load_idx(image_path, label_path, name: str = "idx") -> LabeledDataset:
    """Load an IDX image/label file pair.

    Big-endian throughout.  Images: magic 0x00000803, dims
    (count, rows, cols), then count*rows*cols unsigned bytes.  Labels:
    magic 0x00000801, count, then count unsigned bytes.
    """
    image_path, label_path = str(image_path), str(label_path)
    with open(image_path, "rb") as fh:
        img_buf = fh.read()
    with open(label_path, "rb") as fh:
        lab_buf = fh.read()

    magic = _read_be_u32(img_buf, 0, image_path)
    if magic != IDX_IMAGE_MAGIC:
        raise FormatError(f"{image_path}: bad image magic 0x{magic:08X}, expected 0x{IDX_IMAGE_MAGIC:08X}")
    count = _read_be_u32(img_buf, 4, image_path)
    rows = _read_be_u32(img_buf, 8, image_path)
    cols = _read_be_u32(img_buf, 12, image_path)
    expected = 16 + count * rows * cols
    if len(img_buf) != expected:
        raise FormatError(f"{image_path}: expected {expected} bytes for {count}x{rows}x{cols}, got {len(img_buf)}")

    magic = _read_be_u32(lab_buf, 0, label_path)
    if magic != IDX_LABEL_MAGIC:
        raise FormatError(f"{label_path}: bad label magic 0x{magic:08X}, expected 0x{IDX_LABEL_MAGIC:08X}")
    lab_count = _read_be_u32(lab_buf, 4, label_path)
    if len(lab_buf) != 8 + lab_count:
        raise FormatError(f"{label_path}: expected {8 + lab_count} bytes for {lab_count} labels, got {len(lab_buf)}")

    if count != lab_count:
        raise InvalidInput(f"image count {count} != label count {lab_count}")

    pixels = np.frombuffer(img_buf, dtype=np.uint8, offset=16)
    data = pixels.reshape(count, rows * cols).astype(np.float64)
    labels = np.frombuffer(lab_buf, dtype=np.uint8, offset=8).astype(np.int64)
    return LabeledDataset(data=data, labels=_remap_contiguous(labels), name=name)


def load_har(
    features_path, labels_path, name: str = "har", expected_cols: int = HAR_N_FEATURES
) -> LabeledDataset:
    """Load whitespace-separated feature rows plus one integer label per line."""
    features_path, labels_path = str(features_path), str(labels_path)
    rows = []
    with open(features_path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            tokens = line.split()
            if not tokens:
                continue
            if len(tokens) != expected_cols:
                raise FormatError(
                    f"{features_path}:{lineno}: expected {expected_cols} values, got {len(tokens)}"
                )
            try:
                rows.append([float(t) for t in tokens])
            except ValueError as exc:
                raise FormatError(f"{features_path}:{lineno}: non-numeric value ({exc})") from exc
    labels = []
    with open(labels_path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            token = line.strip()
            if not token:
                continue
            try:
                labels.append(int(token))
            except ValueError as exc:
                raise FormatError(f"{labels_path}:{lineno}: non-integer label ({exc})") from exc
    if len(rows) != len(labels):
        raise InvalidInput(f"feature rows {len(rows)} != label rows {len(labels)}")
    data = np.asarray(rows, dtype=np.float64)
    return LabeledDataset(data=data, labels=_remap_contiguous(np.asarray(labels)), name=name)


def load_csv(path, name: str | None = None) -> LabeledDataset:
    """Load the internal CSV layout: features then integer label per line."""
    path = str(path)
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            tokens = text.split(",")
            if width is None:
                width = len(tokens)
                if width < 2:
                    raise FormatError(f"{path}:{lineno}: need at least one feature and a label")
            elif len(tokens) != width:
                raise FormatError(f"{path}:{lineno}: expected {width} fields, got {len(tokens)}")
            try:
                rows.append([float(t) for t in tokens])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: non-numeric value ({exc})") from exc
    if not rows:
        raise FormatError(f"{path}: no data rows")
    table = np.asarray(rows, dtype=np.float64)
    raw_labels = table[:, -1]
    if not np.all(raw_labels == np.round(raw_labels)):
        raise FormatError(f"{path}: label column contains non-integer values")
    return LabeledDataset(
        data=table[:, :-1],
        labels=_remap_contiguous(raw_labels.astype(np.int64)),
        name=name if name is not None else path,
    )


def write_csv(ds: LabeledDataset, path) -> None:
    """Write the internal CSV layout; floats serialized to round-trip exactly."""
    with open(str(path), "w", encoding="utf-8", newline="\n") as fh:
        for row, label in zip(ds.data, ds.labels):
            fh.write(",".join(format(v, ".17g") for v in row))
            fh.write(f",{int(label)}\n")


def standardize(X) -> tuple[np.ndarray, StandardizationParams]:
    """Center each column and scale to unit population variance.

    Constant columns (max == min) map to all-zeros and record sigma 0.
    """
    X = as_data_matrix(X, name="X")
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    # float summation can leave a constant column with a tiny nonzero std
    constant = X.max(axis=0) == X.min(axis=0)
    stds = np.where(constant, 0.0, stds)
    safe = np.where(stds > 0.0, stds, 1.0)
    Z = (X - means) / safe
    Z -= Z.mean(axis=0)  # second pass removes the cancellation residue when |mean| >> std
    Z[:, stds == 0.0] = 0.0
    return Z, StandardizationParams(means=means, stds=stds)


def subsample(ds: LabeledDataset, n: int, seed: int) -> LabeledDataset:
    """Stratified subsample: per-class quotas by largest remainder (+-1)."""
    total = ds.n_rows
    if not 1 <= n <= total:
        raise InvalidInput(f"subsample size must be in [1, {total}], got {n}")
    if n == total:
        return ds
    classes, counts = np.unique(ds.labels, return_counts=True)
    quotas = n * counts / total
    take = np.floor(quotas).astype(np.int64)
    remainders = quotas - take
    leftover = n - int(take.sum())
    # hand the leftover units to the largest remainders, lower class id on ties
    order = np.lexsort((classes, -remainders))
    take[order[:leftover]] += 1
    chosen = []
    for ci, cls in enumerate(classes):
        members = np.flatnonzero(ds.labels == cls)
        perm = Rng(split(seed, ci)).permutation(members.size)
        chosen.append(members[perm[: take[ci]]])
    keep = np.sort(np.concatenate(chosen))
    return LabeledDataset(data=ds.data[keep], labels=ds.labels[keep], name=ds.name)
