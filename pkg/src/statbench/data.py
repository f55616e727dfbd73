"""Core sample container shared by every generator, learner, and estimator."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np


class DataError(ValueError):
    """Raised when a dataset violates its structural invariants."""


@dataclass(frozen=True)
class Dataset:
    """Feature matrix (n x p, float64) with an optional label vector.

    Labels are real-valued for regression tasks and {0, 1} for
    classification tasks; unlabeled data carries ``labels=None``.
    """

    features: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise DataError(f"features must be a nonempty 2-d matrix, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise DataError("features contain NaN/Inf entries")
        object.__setattr__(self, "features", x)
        if self.labels is not None:
            y = np.asarray(self.labels, dtype=np.float64).ravel()
            if y.shape[0] != x.shape[0]:
                raise DataError(f"label length {y.shape[0]} != row count {x.shape[0]}")
            if not np.all(np.isfinite(y)):
                raise DataError("labels contain NaN/Inf entries")
            object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    @property
    def is_labeled(self) -> bool:
        return self.labels is not None

    def require_labels(self) -> np.ndarray:
        if self.labels is None:
            raise DataError("operation requires a labeled dataset")
        return self.labels

    def without_labels(self) -> "Dataset":
        return Dataset(self.features)

    def with_labels(self, labels: np.ndarray) -> "Dataset":
        return Dataset(self.features, labels)

    def subset(self, idx) -> "Dataset":
        y = None if self.labels is None else self.labels[idx]
        return Dataset(self.features[idx], y)

    # ------------------------------------------------------------------
    # serialization

    def to_csv(self, path_or_buf) -> None:
        """Write as CSV with header x1..xp[,y]."""
        header = [f"x{j + 1}" for j in range(self.p)]
        if self.is_labeled:
            header.append("y")
        own = isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__")
        fh = open(path_or_buf, "w", newline="") if own else path_or_buf
        try:
            w = csv.writer(fh)
            w.writerow(header)
            for i in range(self.n):
                row = [repr(float(v)) for v in self.features[i]]
                if self.is_labeled:
                    row.append(repr(float(self.labels[i])))
                w.writerow(row)
        finally:
            if own:
                fh.close()

    @classmethod
    def from_csv(cls, path_or_buf) -> "Dataset":
        own = isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__")
        fh = open(path_or_buf, "r", newline="") if own else path_or_buf
        try:
            r = csv.reader(fh)
            header = next(r)
            has_y = bool(header) and header[-1] == "y"
            rows = [[float(v) for v in row] for row in r if row]
        finally:
            if own:
                fh.close()
        arr = np.asarray(rows, dtype=np.float64)
        if has_y:
            return cls(arr[:, :-1], arr[:, -1])
        return cls(arr)

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()

    def to_wire(self) -> dict:
        """JSON dataset object of the predictor wire protocol."""
        obj = {"x": self.features.tolist()}
        if self.is_labeled:
            obj["y"] = self.labels.tolist()
        return obj

    @classmethod
    def from_wire(cls, obj: dict) -> "Dataset":
        return cls(np.asarray(obj["x"], dtype=np.float64),
                   None if obj.get("y") is None else np.asarray(obj["y"], dtype=np.float64))


def concat(*datasets: Dataset) -> Dataset:
    """Stack datasets row-wise; all labeled or all unlabeled."""
    labeled = datasets[0].is_labeled
    if any(d.is_labeled != labeled for d in datasets):
        raise DataError("cannot concatenate labeled with unlabeled datasets")
    x = np.vstack([d.features for d in datasets])
    y = np.concatenate([d.labels for d in datasets]) if labeled else None
    return Dataset(x, y)


@dataclass(frozen=True)
class SemiSupPair:
    """Labeled/unlabeled split drawn from one joint distribution."""

    labeled: Dataset
    unlabeled: Dataset
    setting: str

    def __post_init__(self):
        if not self.labeled.is_labeled:
            raise DataError("labeled half must carry labels")
        if self.unlabeled.is_labeled:
            raise DataError("unlabeled half must not carry labels")
        if self.labeled.p != self.unlabeled.p:
            raise DataError("labeled and unlabeled halves must share feature dimension")
